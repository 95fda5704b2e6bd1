"""Normalized solutions of -lap u = lam u + f(u) with prescribed L2 norm, for radial profiles.

N >= 3 uses f(t) = mu |t|^{q-2} t + |t|^{2*-2} t; N = 2 uses
f(t) = mu sgn(t) |t|^{p-1} exp(4 pi t^2).
"""

__version__ = "0.1.0"

from .errors import ConfigError, GeometryError, InvalidArgument, RangeError, RefinementError  # noqa: E402
from .radial import (  # noqa: E402
    RadialFunction,
    RadialGrid,
    dirichlet_form,
    geometric_ratio,
    grad_norm_sq,
    inner_product,
    laplacian,
    lp_norm_pow,
    make_grid,
    mass,
)
from .nonlinearity import CombinedPower, ExpCritical, F_eval, f_eval, f_prime, verify_growth  # noqa: E402
from .energy import (  # noqa: E402
    EnergyReport,
    augmented_energy,
    energy,
    energy_gradient,
    energy_report,
    lambda_multiplier,
    pohozaev,
)
from .fiber import dilate, max_over_dilations  # noqa: E402
from .optimizer import (  # noqa: E402
    SolutionReport,
    SolveConfig,
    geometry_probe,
    minimax_solve,
    newton_refine,
    solve,
)
from .constants import (  # noqa: E402
    exp_integrability_probe,
    gn_ratio,
    moser_functional,
    sobolev_constant,
)

__all__ = [
    "ConfigError", "GeometryError", "InvalidArgument", "RangeError", "RefinementError",
    "RadialFunction", "RadialGrid", "make_grid", "geometric_ratio", "mass", "lp_norm_pow",
    "grad_norm_sq", "dirichlet_form", "laplacian", "inner_product",
    "CombinedPower", "ExpCritical", "f_eval", "F_eval", "f_prime", "verify_growth",
    "EnergyReport", "energy", "energy_gradient", "pohozaev", "lambda_multiplier",
    "augmented_energy", "energy_report", "dilate", "max_over_dilations",
    "SolveConfig", "SolutionReport", "minimax_solve", "newton_refine", "solve", "geometry_probe",
    "sobolev_constant", "gn_ratio", "moser_functional", "exp_integrability_probe",
]

"""Backend selection for the node-sum kernels.

The compiled extension ``normsol._ckernels`` is used when it imports; the
numpy fallback otherwise. Setting ``NORMSOL_PURE_PYTHON=1`` forces the
fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("NORMSOL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

power_sums = _impl.power_sums
exp_sums = _impl.exp_sums
dirichlet_sum = _impl.dirichlet_sum


def nonlinear_sums(model, u, w, c=1.0, order=1):
    """(sum w F(cu), sum w f(cu) cu, sum w f'(cu) (cu)^2) for either model."""
    if model.kind == "combined_power":
        return power_sums(u, w, c, model.mu, model.q, model.p_crit, order)
    return exp_sums(u, w, c, model.mu, model.p, order)

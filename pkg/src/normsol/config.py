"""Run configuration: flat ``key = value`` files plus ``--key=value`` overrides."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields

from .errors import ConfigError, InvalidArgument
from .nonlinearity import CombinedPower, ExpCritical
from .optimizer import SolveConfig
from .radial import make_grid

__all__ = ["RunConfig", "KEYS", "load_config", "parse_value", "key_help", "OUT_ENV"]

OUT_ENV = "NORMSOL_OUT"

# key -> (type, default, help)
KEYS = {
    "N": (int, 3, "space dimension; 2 selects the exponential model"),
    "mu": (float, 50.0, "coupling of the lower-order term; reference mu for sweep grid scaling"),
    "q": (float, 4.0, "lower power for N >= 3, in (2 + 4/N, 2N/(N-2))"),
    "p": (float, 6.0, "power for N = 2, > 4"),
    "a": (float, 1.0, "prescribed L2 norm (mass a^2); N = 2 needs a < 1"),
    "R": (float, 40.0, "truncation radius at mu"),
    "M": (int, 8000, "number of grid nodes"),
    "grading": (str, "geometric", "uniform or geometric"),
    "ratio": (float, 1.0005, "spacing ratio of the geometric grid"),
    "mu_min": (float, 100.0, "sweep: smallest mu"),
    "mu_max": (float, 10000.0, "sweep: largest mu"),
    "mu_points": (int, 9, "sweep: number of log-spaced mu values (>= 5)"),
    "continuation": (bool, True, "sweep: seed each solve with the previous solution"),
    "bisect": (bool, True, "sweep: refine mu* to an interval by bisection"),
    "bisect_steps": (int, 6, "sweep: bisection steps for mu*"),
    "workers": (int, 1, "sweep: parallel solves when continuation is off"),
    "samples": (int, 50, "check: random profiles per sampled property"),
    "max_outer_iters": (int, 400, "minimax: maximum descent iterations"),
    "step_init": (float, 1.0, "minimax: initial (and maximal) step"),
    "tol_q": (float, None, "Pohozaev tolerance; default 1e-6 max(1, gradSq)"),
    "tol_r": (float, None, "PDE residual tolerance; default 1e-5 ||u||_H1"),
    "tol_step": (float, 1e-6, "minimax: stop when the step is below tol_step * a"),
    "s_max": (float, 4.0, "largest admissible dilation |s|"),
    "bracket_lo": (float, -3.0, "fiber search bracket, lower end"),
    "bracket_hi": (float, 3.0, "fiber search bracket, upper end"),
    "seed_kind": (str, "gaussian", "gaussian or custom"),
    "seed_width": (float, 1.0, "width of the Gaussian seed at mu"),
    "seed_path": (str, None, "custom seed: CSV with columns r,u"),
    "newton_max_iters": (int, 30, "Newton: maximum iterations"),
    "armijo_c1": (float, 1e-4, "line search sufficient-decrease constant"),
    "backtrack": (float, 0.5, "line search step reduction factor"),
    "out": (str, None, f"output directory (else ${OUT_ENV}, else the current directory)"),
    "seed": (int, 0, "random seed for sampled checks"),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_value(key: str, raw):
    if key not in KEYS:
        raise ConfigError(f"unknown configuration key {key!r}", key)
    typ, _, _ = KEYS[key]
    if raw is None or not isinstance(raw, str):
        return raw
    text = raw.strip()
    if text.lower() in ("", "none", "default") and KEYS[key][1] is None:
        return None
    try:
        if typ is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if typ is int:
            return int(text)
        if typ is float:
            v = float(text)
            if not math.isfinite(v):
                raise ValueError(text)
            return v
        return text
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for key {key!r} (expected {typ.__name__})", key) from None


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}", "config") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value', got {line!r}", line.split()[0])
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = parse_value(key, val)
    return out


def _key_in(message: str, keys) -> str:
    return next((k for k in keys if message.startswith(k) or f" {k} " in message), keys[0])


@dataclass
class RunConfig:
    mode: str = "solve"
    N: int = 3
    mu: float = 50.0
    q: float = 4.0
    p: float = 6.0
    a: float = 1.0
    R: float = 40.0
    M: int = 8000
    grading: str = "geometric"
    ratio: float = 1.0005
    mu_min: float = 100.0
    mu_max: float = 10000.0
    mu_points: int = 9
    continuation: bool = True
    bisect: bool = True
    bisect_steps: int = 6
    workers: int = 1
    samples: int = 50
    max_outer_iters: int = 400
    step_init: float = 1.0
    tol_q: float | None = None
    tol_r: float | None = None
    tol_step: float = 1e-6
    s_max: float = 4.0
    bracket_lo: float = -3.0
    bracket_hi: float = 3.0
    seed_kind: str = "gaussian"
    seed_width: float = 1.0
    seed_path: str | None = None
    newton_max_iters: int = 30
    armijo_c1: float = 1e-4
    backtrack: float = 0.5
    out: str | None = None
    seed: int = 0

    def validate(self) -> "RunConfig":
        if self.mode not in ("solve", "sweep", "check", "constants"):
            raise ConfigError(f"unknown mode {self.mode!r}", "mode")
        if self.N < 2:
            raise ConfigError("N must be >= 2", "N")
        if not self.a > 0:
            raise ConfigError("a must be positive", "a")
        if self.N == 2 and self.a >= 1:
            raise ConfigError("N = 2 requires a in (0, 1): the exponential problem is only "
                              "posed below the Trudinger-Moser mass threshold", "a")
        try:
            self.model()
        except InvalidArgument as exc:
            raise ConfigError(str(exc), _key_in(str(exc), ("mu", "q", "p", "N"))) from exc
        if self.grading not in ("uniform", "geometric"):
            raise ConfigError(f"grading must be uniform or geometric, got {self.grading!r}", "grading")
        try:
            self.grid()
        except InvalidArgument as exc:
            msg = str(exc)
            raise ConfigError(msg, "M" if "node count" in msg else "ratio" if "ratio" in msg else "R") from exc
        if self.mode == "sweep":
            if not (0 < self.mu_min < self.mu_max):
                raise ConfigError("sweep needs 0 < mu_min < mu_max", "mu_min")
            if self.mu_points < 5:
                raise ConfigError("sweep needs mu_points >= 5", "mu_points")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", "workers")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1", "samples")
        if self.bisect_steps < 0:
            raise ConfigError("bisect_steps must be >= 0", "bisect_steps")
        if self.seed_kind not in ("gaussian", "custom"):
            raise ConfigError(f"seed_kind must be gaussian or custom, got {self.seed_kind!r}", "seed_kind")
        if self.seed_kind == "custom" and not self.seed_path:
            raise ConfigError("seed_kind = custom needs seed_path", "seed_path")
        if not self.seed_width > 0:
            raise ConfigError("seed_width must be positive", "seed_width")
        try:
            self.solve_config()
        except InvalidArgument as exc:
            msg = str(exc)
            raise ConfigError(msg, _key_in(msg, ("tol_q", "tol_r", "tol_step", "step_init", "armijo_c1",
                                                 "backtrack"))) from exc
        if not self.bracket_lo < self.bracket_hi:
            raise ConfigError("bracket_lo must be below bracket_hi", "bracket_lo")
        return self

    def model(self, mu: float | None = None):
        mu = self.mu if mu is None else mu
        if self.N == 2:
            return ExpCritical(mu, self.p)
        return CombinedPower(mu, self.q, self.N)

    def length_exponent(self) -> float:
        """Solutions spread like mu^ell once the lower-order term dominates."""
        if self.N == 2:
            return 1.0 / (self.p - 4.0)
        return 2.0 / (self.N * (self.q - 2.0) - 4.0)

    def theoretical_exponent(self) -> float:
        """gamma_mu(a) decays like mu^{-exponent}."""
        if self.N == 2:
            return 2.0 / (self.p - 4.0)
        return 4.0 / (self.N * (self.q - 2.0) - 4.0)

    def length_scale(self, mu: float | None = None) -> float:
        """Grid growth factor at mu relative to the reference mu; never below 1, since
        below the reference the critical term keeps solutions from shrinking further."""
        if mu is None:
            return 1.0
        return max(1.0, (mu / self.mu) ** self.length_exponent())

    def grid(self, mu: float | None = None):
        return make_grid(self.N, self.R * self.length_scale(mu), self.M, self.grading, self.ratio)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            a=self.a, max_outer_iters=self.max_outer_iters, step_init=self.step_init,
            tol_q=self.tol_q, tol_r=self.tol_r, tol_step=self.tol_step, s_max=self.s_max,
            bracket=(self.bracket_lo, self.bracket_hi), seed_kind=self.seed_kind,
            seed_width=self.seed_width, seed_path=self.seed_path,
            newton_max_iters=self.newton_max_iters, armijo_c1=self.armijo_c1,
            backtrack=self.backtrack,
        )

    def out_dir(self) -> str:
        return self.out or os.environ.get(OUT_ENV) or "."

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(mode: str, path: str | None = None, overrides: dict | None = None) -> RunConfig:
    values = read_config_file(path) if path else {}
    for k, v in (overrides or {}).items():
        values[k] = parse_value(k, v)
    cfg = RunConfig(mode=mode)
    for k, v in values.items():
        if v is None and KEYS[k][1] is not None:
            raise ConfigError(f"key {k!r} needs a value", k)
        setattr(cfg, k, v)
    return cfg.validate()


def key_help() -> str:
    width = max(map(len, KEYS))
    lines = []
    for k, (typ, default, text) in KEYS.items():
        lines.append(f"  {k:<{width}}  {text} [{typ.__name__}, default {default}]")
    return "\n".join(lines)

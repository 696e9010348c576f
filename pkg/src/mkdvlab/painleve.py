"""Ablowitz-Segur solutions of Painleve II and the similarity form.

Substituting y = (3t)^{-1/3} p(s), s = x / (3t)^{1/3}, into
y_t - 6 y^2 y_x + y_xxx = 0 gives (p'' - s p - 2 p^3)' = 0; decay as s -> +inf
fixes the constant, so p'' = s p + 2 p^3.  Solutions with p ~ k Ai(s) at
+inf and |k| < 1 stay bounded on the real line.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .errors import BlowUpError, InputError
from .specfun import airy_ai, airy_ai_prime

logger = logging.getLogger(__name__)

__all__ = ["airy_ai", "airy_ai_prime", "PainleveProfile", "PIIConfig", "solve_pii",
           "similarity_eval", "similarity_variable", "default_s_max", "second_difference_residual"]


@dataclass(frozen=True)
class PIIConfig:
    ds: float = 0.005
    rtol: float = 1e-10
    atol: float = 1e-14
    method: str = "RK45"
    blowup: float = 1e3
    seed_tol: float = 1e-10

    def __post_init__(self):
        if not (self.ds > 0 and self.rtol > 0 and self.atol > 0 and self.blowup > 0):
            raise InputError("invalid Painleve step configuration")


def second_difference_residual(s: np.ndarray, p: np.ndarray) -> np.ndarray:
    """p'' - s p - 2 p^3 at interior nodes with the five-point fourth-order stencil."""
    h = s[1] - s[0]
    d2 = (-p[:-4] + 16 * p[1:-3] - 30 * p[2:-2] + 16 * p[3:-1] - p[4:]) / (12.0 * h * h)
    pc = p[2:-2]
    return d2 - s[2:-2] * pc - 2.0 * pc**3


@dataclass(frozen=True, eq=False)
class PainleveProfile:
    k: float
    sgrid: np.ndarray  # descending
    p: np.ndarray
    dp: np.ndarray
    residual_norm: float

    @property
    def s_max(self) -> float:
        return float(self.sgrid[0])

    @property
    def s_min(self) -> float:
        return float(self.sgrid[-1])

    @cached_property
    def _interp(self):
        return CubicHermiteSpline(self.sgrid[::-1], self.p[::-1], self.dp[::-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        lo, hi = self.s_min, self.s_max
        if np.any((s < lo - 1e-12) | (s > hi + 1e-12)):
            bad = s[(s < lo) | (s > hi)]
            raise InputError(
                f"s outside the profile [{lo:g}, {hi:g}]: need s_min <= {float(np.min(bad)):g} "
                f"and s_max >= {float(np.max(bad)):g}")
        return self._interp(np.clip(s, lo, hi))

    def residual(self) -> np.ndarray:
        return second_difference_residual(self.sgrid, self.p)

    def to_csv(self, path) -> None:
        from .io import write_csv

        res = np.full(self.p.size, np.nan)
        res[2:-2] = self.residual()
        write_csv(path, ["s", "p", "residual"], [self.sgrid, self.p, res])


def default_s_max(k: float, seed_tol: float = 1e-10) -> float:
    """Smallest integer s >= 4 with |k Ai(s)| below seed_tol."""
    s = 4.0
    while abs(k) * airy_ai(s) >= seed_tol:
        s += 1.0
    return s


def solve_pii(k: float, s_min: float = -10.0, s_max: float | None = None,
              cfg: PIIConfig | None = None, *, allow_large_k: bool = False) -> PainleveProfile:
    """Integrate p'' = s p + 2 p^3 from (k Ai, k Ai')(s_max) down to s_min."""
    cfg = cfg or PIIConfig()
    k = float(k)
    if abs(k) >= 1.0 and not allow_large_k:
        raise InputError(f"|k| = {abs(k):g} is outside the bounded family |k| < 1")
    if s_max is None:
        s_max = default_s_max(k, cfg.seed_tol)
    if not s_min < s_max:
        raise InputError("need s_min < s_max")
    if abs(k) * airy_ai(s_max) >= cfg.seed_tol:
        raise InputError(f"s_max = {s_max:g} too small: |k Ai(s_max)| >= {cfg.seed_tol:g}")
    n = int(round((s_max - s_min) / cfg.ds))
    n = max(n, 8)
    sgrid = s_max - (s_max - s_min) * np.arange(n + 1) / n
    sgrid[0], sgrid[-1] = s_max, s_min  # endpoints exact, so t_eval stays inside t_span
    if k == 0.0:
        zero = np.zeros(sgrid.size)
        return PainleveProfile(k, sgrid, zero, zero.copy(), 0.0)

    def rhs(s, u):
        return [u[1], s * u[0] + 2.0 * u[0] ** 3]

    def blow(s, u):
        return cfg.blowup - abs(u[0])

    blow.terminal = True
    y0 = [k * airy_ai(s_max), k * airy_ai_prime(s_max)]
    sol = solve_ivp(rhs, (s_max, s_min), y0, method=cfg.method, t_eval=sgrid, rtol=cfg.rtol,
                    atol=cfg.atol, events=blow, max_step=cfg.ds)
    if sol.status == 1 and sol.t_events[0].size:
        where = float(sol.t_events[0][0])
        raise BlowUpError(f"|p| exceeded {cfg.blowup:g} (k = {k:g})", where)
    if sol.status != 0:
        raise BlowUpError(f"integration failed: {sol.message}", float(sol.t[-1]))
    p, dp = sol.y
    res = second_difference_residual(sgrid, p)
    norm = float(np.max(np.abs(res))) if res.size else 0.0
    logger.debug("PII k=%g on [%g, %g]: %d rhs evaluations, residual %.2e",
                 k, s_min, s_max, sol.nfev, norm)
    return PainleveProfile(k, sgrid, p, dp, norm)


def similarity_variable(x: float, t: float) -> float:
    if not t > 0:
        raise InputError("similarity form needs t > 0")
    return x / (3.0 * t) ** (1.0 / 3.0)


def similarity_eval(x, t: float, profile: PainleveProfile):
    """(3t)^{-1/3} p(x / (3t)^{1/3})."""
    if not t > 0:
        raise InputError("similarity form needs t > 0")
    scale = (3.0 * t) ** (1.0 / 3.0)
    out = profile(np.asarray(x, dtype=float) / scale) / scale
    return float(out) if np.ndim(out) == 0 else out

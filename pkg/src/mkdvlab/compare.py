"""Cross-checks of the asymptotic formulas and the RH solver against the direct solver."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .asymptotics import stationary_point, y_a_eval
from .errors import InputError, NumericalError
from .inverse_rh import RHConfig, solve_y
from .mkdv_direct import Trajectory
from .painleve import solve_pii
from .scattering import ReflectionCoefficient, SampledPotential

logger = logging.getLogger(__name__)

__all__ = [
    "default_k", "RegionIIResult", "region_ii_validation", "RegionIVFit", "fit_region_iv",
    "rh_points", "round_trip", "p0_of_k", "k_of_p0",
]


def default_k(rc: ReflectionCoefficient) -> float:
    """Airy-seed coefficient k = i r(0).

    r(0) is purely imaginary by the symmetry r(z) = -conj(r(-z)), so k is real;
    |k| = |r(0)| and the sign matches the linear limit of the similarity form.
    """
    r0 = complex(rc(0.0))
    return float((1j * r0).real)


def _parallel_map(func, items, workers: int | None):
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(func, items))


# --- region II ---------------------------------------------------------------

@dataclass
class RegionIIResult:
    speed: float
    times: list
    max_error: list
    amplitude: list
    descriptor: list
    errors_by_time: dict = field(default_factory=dict)

    @property
    def relative(self) -> list:
        return [e / a for e, a in zip(self.max_error, self.amplitude)]

    def observed_ratios(self) -> list:
        e = self.max_error
        return [e[i + 1] / e[i] for i in range(len(e) - 1)]

    def predicted_ratios(self) -> list:
        d = self.descriptor
        return [d[i + 1] / d[i] for i in range(len(d) - 1)]

    def ratio_factors(self) -> list:
        """observed / predicted error ratio between consecutive times."""
        return [o / p for o, p in zip(self.observed_ratios(), self.predicted_ratios())]


def region_ii_validation(traj: Trajectory, rc: ReflectionCoefficient, times,
                         speed: float = 4.0, half_window: float = 10.0,
                         step: float = 0.5) -> RegionIIResult:
    """Compare y_a with the direct solution on x in -speed*t + [-w, w] at each t."""
    out = RegionIIResult(speed, [], [], [], [])
    offsets = np.arange(-half_window, half_window + step / 2, step)
    for t in times:
        xs = -speed * t + offsets
        yd = traj.value(xs, t)
        ya = np.array([y_a_eval(float(x), t, rc).y_a for x in xs])
        centre = y_a_eval(-speed * t, t, rc)
        err = np.abs(yd - ya)
        pp = stationary_point(-speed * t, t)
        out.times.append(float(t))
        out.max_error.append(float(err.max()))
        out.amplitude.append(float(centre.amplitude))
        out.descriptor.append(float((t * pp.z0) ** -0.5 * pp.tau ** -0.25))
        out.errors_by_time[float(t)] = (xs, yd, ya)
    return out


# --- region IV ---------------------------------------------------------------

def p0_of_k(k: float, s_max: float | None = None) -> float:
    """p(0) of the Painleve II solution seeded by k Ai at +infinity."""
    if k == 0:
        return 0.0
    return float(solve_pii(k, -0.05, s_max)(0.0))


def k_of_p0(p0: float) -> float:
    """Invert k -> p(0) on |k| < 1 (monotone on the bounded family)."""
    if p0 == 0:
        return 0.0
    sign = math.copysign(1.0, p0)
    target = abs(p0)
    hi = 0.999
    if p0_of_k(hi) < target:
        raise NumericalError(f"|p(0)| = {target:g} not attained for |k| < 1")
    k = brentq(lambda q: p0_of_k(q) - target, 1e-12, hi, xtol=1e-14, rtol=1e-13)
    return sign * k


@dataclass
class RegionIVFit:
    times: np.ndarray
    y_direct: np.ndarray
    k: float
    p0: float
    correction: float
    k_default: float
    residual: np.ndarray
    scaled: np.ndarray  # residual * t^{2/3}

    @property
    def constant(self) -> float:
        return float(np.median(np.abs(self.scaled)))

    def stable(self, spread: float = 0.5) -> bool:
        c = self.constant
        return bool(np.all(np.abs(np.abs(self.scaled) - c) <= spread * c))

    def bounded(self, factor: float = 5.0) -> bool:
        return bool(np.all(np.abs(self.residual) <= factor * self.constant * self.times ** (-2 / 3)))


def fit_region_iv(traj: Trajectory, times, rc: ReflectionCoefficient | None = None,
                  x: float = 0.0) -> RegionIVFit:
    """Least-squares fit of y(x, t) = (3t)^{-1/3} p_k(s) + c t^{-2/3} over the given times.

    The fitted k enters through P = p_k(x / (3t)^{1/3}); at x = 0 this is
    t-independent, so the model is linear in (P, c) and P is inverted for k.
    """
    times = np.asarray(sorted(times), dtype=float)
    if x != 0.0:
        raise InputError("the region IV fit is implemented on the centre line x = 0")
    yd = np.array([float(traj.value([x], t)[0]) for t in times])
    design = np.column_stack([(3 * times) ** (-1 / 3), times ** (-2 / 3)])
    (p0, corr), *_ = np.linalg.lstsq(design, yd, rcond=None)
    k = k_of_p0(float(p0))
    p0 = p0_of_k(k)
    resid = yd - (3 * times) ** (-1 / 3) * p0
    kd = default_k(rc) if rc is not None else math.nan
    return RegionIVFit(times, yd, k, p0, float(corr), kd, resid, resid * times ** (2 / 3))


# --- RH sweeps ---------------------------------------------------------------

def rh_points(rc: ReflectionCoefficient, points, cfg: RHConfig | None = None,
              workers: int | None = None):
    """RH reconstruction at a list of (x, t); order of the output follows the input."""
    cfg = cfg or RHConfig()
    return _parallel_map(lambda p: solve_y(rc, float(p[0]), float(p[1]), cfg), points, workers)


def round_trip(y0: SampledPotential, rc: ReflectionCoefficient, xs,
               cfg: RHConfig | None = None, workers: int | None = None):
    """RH reconstruction at t = 0 against the sampled input; returns (records, max error)."""
    xs = np.asarray(xs, dtype=float)
    recs = rh_points(rc, [(x, 0.0) for x in xs], cfg, workers)
    exact = np.interp(xs, y0.x, y0.values) if y0.source is None else y0.source(xs)
    err = np.abs(np.array([r.y_rh for r in recs]) - exact)
    return recs, float(err.max())

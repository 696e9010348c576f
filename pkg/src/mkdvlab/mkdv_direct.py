"""Pseudo-spectral reference solver for y_t - 6 y^2 y_x + y_xxx = 0.

The periodic domain is the grid of the initial :class:`SampledPotential`.
Writing y_t = -y_xxx + 2 (y^3)_x, each Fourier mode (y = sum yhat e^{ikx})
obeys ``yhat_t = i k^3 yhat + 2 i k (y^3)^``.  The linear part is integrated
exactly by an integrating factor, the nonlinear part by classical RK4 on the
transformed variable, with 2/3-rule truncation of the cubic term.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .errors import InputError, NumericalError
from .scattering import SampledPotential

logger = logging.getLogger(__name__)


@dataclass
class DirectConfig:
    """Step control for :func:`evolve`.

    A step is accepted when the relative change of sum |yhat|^2 (conserved by
    the exact flow) is at most ``drift_rate * dt``; otherwise dt is halved.
    After a quiet step (change below drift_rate * dt / 32, or at the noise
    level) dt doubles, up to ``dt_max``.  The nonlinear bound
    ``cfl / (6 max y^2 k_max)`` caps dt too.  ``roundoff`` is the per-step
    change treated as floating-point noise of the FFT round trip; without it
    small steps are rejected on noise alone and dt collapses on large grids.
    """
    dt: float = 0.1
    dt_max: float = 1.0
    dealias: bool = True
    cfl: float = 1.0
    drift_rate: float = 2e-12
    roundoff: float = 1e-14
    max_halvings: int = 12
    # relative change per step that counts as instability once halvings run out
    growth_tol: float = 1e-6
    edge_tol: float = 1e-8

    def __post_init__(self):
        vals = (self.dt, self.dt_max, self.cfl, self.drift_rate, self.growth_tol, self.edge_tol,
                self.roundoff)
        if not all(v > 0 for v in vals):
            raise InputError("direct solver tolerances and steps must be positive")


@dataclass
class Trajectory:
    grid_start: float
    spacing: float
    times: list = field(default_factory=list)
    fields: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    l2norm: list = field(default_factory=list)
    domain_limited: bool = False
    steps: int = 0
    dt_used: float = 0.0

    @property
    def n(self) -> int:
        return self.fields[0].size

    @property
    def length(self) -> float:
        return self.spacing * self.n

    @property
    def half_width(self) -> float:
        return 0.5 * self.length

    @property
    def x(self) -> np.ndarray:
        return self.grid_start + self.spacing * np.arange(self.n)

    def index(self, t: float) -> int:
        d = np.abs(np.asarray(self.times) - t)
        i = int(np.argmin(d))
        if d[i] > 1e-9 * max(1.0, abs(t)):
            raise InputError(f"no snapshot stored at t = {t}")
        return i

    def field_at(self, t: float) -> np.ndarray:
        return self.fields[self.index(t)]

    def value(self, x, t: float) -> np.ndarray:
        """Trigonometric interpolant of the snapshot at t, evaluated at x."""
        y = self.field_at(t)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        yhat = sfft.rfft(y) / self.n
        k = 2 * np.pi * sfft.rfftfreq(self.n, self.spacing)
        w = np.full(k.size, 2.0)
        w[0] = 1.0
        if self.n % 2 == 0:
            w[-1] = 1.0
        u = x - self.grid_start
        out = np.empty(x.size)
        for i, ui in enumerate(u):
            out[i] = np.real(np.sum(w * yhat * np.exp(1j * k * ui)))
        return out

    def mass_drift(self) -> float:
        m = np.abs(np.asarray(self.mass))
        ref = max(m[0], 1e-300)
        return float(np.max(np.abs(np.asarray(self.mass) - self.mass[0])) / ref) if m[0] > 0 else float(np.max(m))

    def l2_drift(self) -> float:
        e = np.asarray(self.l2norm)
        if e[0] == 0:
            return float(np.max(e))
        return float(np.max(np.abs(e - e[0])) / e[0])


def _wavenumbers(n: int, h: float) -> np.ndarray:
    return 2 * np.pi * sfft.rfftfreq(n, h)


def _check_grid(y0: SampledPotential) -> None:
    n = y0.n
    if n & (n - 1):
        raise InputError(f"direct solver needs a power-of-two grid, got N = {n}")


def linear_evolve(y0: SampledPotential, t: float) -> np.ndarray:
    """Exact solution of y_t + y_xxx = 0 on the periodic grid of y0."""
    _check_grid(y0)
    k = _wavenumbers(y0.n, y0.spacing)
    return sfft.irfft(sfft.rfft(y0.values) * np.exp(1j * k**3 * t), y0.n)


def _invariants(y: np.ndarray, h: float):
    return float(h * np.sum(y)), float(h * np.sum(y * y))


def _edge_max(y: np.ndarray) -> float:
    m = max(1, int(math.ceil(0.05 * y.size)))
    return float(max(np.max(np.abs(y[:m])), np.max(np.abs(y[-m:]))))


def evolve(y0: SampledPotential, t_end: float, cfg: DirectConfig | None = None,
           store_times=None) -> Trajectory:
    """Integrate from t = 0 to ``t_end`` (negative for backward integration).

    Snapshots are kept at ``store_times`` (default: only ``t_end``), plus t = 0.
    """
    cfg = cfg or DirectConfig()
    _check_grid(y0)
    if t_end == 0:
        raise InputError("t_end must be nonzero")
    direction = 1.0 if t_end > 0 else -1.0
    n, h = y0.n, y0.spacing
    k = _wavenumbers(n, h)
    kmax = k[-1]
    keep = (k <= (2.0 / 3.0) * kmax) if cfg.dealias else np.ones(k.size, bool)
    two_ik = 2j * k * keep
    k_eff = float(np.max(k[keep]))

    targets = sorted({float(t) for t in (store_times if store_times is not None else [t_end])},
                     key=lambda s: direction * s)
    if any(direction * s <= 0 or abs(s) > abs(t_end) * (1 + 1e-12) for s in targets):
        raise InputError("store_times must lie strictly between 0 and t_end")

    traj = Trajectory(y0.grid_start, h)
    mass0, l20 = _invariants(y0.values, h)
    traj.times.append(0.0)
    traj.fields.append(y0.values.copy())
    traj.mass.append(mass0)
    traj.l2norm.append(l20)

    def nonlinear(vh):
        y = sfft.irfft(vh, n)
        return two_ik * sfft.rfft(y * y * y)

    yh = sfft.rfft(y0.values)
    if cfg.dealias:
        # the initial data is projected onto the retained modes
        yh = yh * keep
    t = 0.0
    factors = {}

    def propagators(dt):
        if dt not in factors:
            e = np.exp(1j * k**3 * (0.5 * dt))
            factors.clear()
            factors[dt] = (e, e * e)
        return factors[dt]

    def dt_bound(vh):
        ymax = float(np.max(np.abs(sfft.irfft(vh, n))))
        bound = cfg.dt_max
        if ymax > 0:
            bound = min(bound, cfg.cfl / (6.0 * ymax**2 * k_eff))
        return bound

    dt_nom = min(cfg.dt, dt_bound(yh))
    steps = rejected = 0
    for target in targets:
        while direction * (target - t) > 1e-12 * max(1.0, abs(target)):
            dt = direction * min(dt_nom, abs(target - t))
            old_norm = np.vdot(yh, yh).real
            for halving in range(cfg.max_halvings + 1):
                e, e2 = propagators(dt)
                a = nonlinear(yh)
                b = nonlinear(e * (yh + 0.5 * dt * a))
                c = nonlinear(e * yh + 0.5 * dt * b)
                d = nonlinear(e2 * yh + dt * e * c)
                new = e2 * yh + (dt / 6.0) * (e2 * a + 2.0 * e * (b + c) + d)
                change = abs(np.vdot(new, new).real - old_norm) / old_norm if old_norm > 0 else 0.0
                finite = bool(np.all(np.isfinite(new)))
                allowed = max(cfg.drift_rate * abs(dt), cfg.roundoff)
                if finite and change <= allowed:
                    break
                if halving == cfg.max_halvings:
                    if finite and change <= cfg.growth_tol:
                        logger.warning("accepting step at t = %.6g with drift %.3g", t, change)
                        break
                    raise NumericalError(
                        f"direct solver unstable at t = {t:.6g} after {cfg.max_halvings} "
                        f"step halvings (dt = {abs(dt):.3g})")
                dt *= 0.5
                rejected += 1
            yh = new
            t += dt
            steps += 1
            logger.debug("t %.6g dt %.3g change %.2e halvings %d", t, dt, change, halving)
            if halving:
                dt_nom = abs(dt)
            if change <= max(cfg.drift_rate * abs(dt) / 32.0, 0.5 * cfg.roundoff):
                dt_nom = min(2.0 * dt_nom, dt_bound(yh))
        y = sfft.irfft(yh, n)
        mass, l2 = _invariants(y, h)
        traj.times.append(target)
        traj.fields.append(y)
        traj.mass.append(mass)
        traj.l2norm.append(l2)
        if _edge_max(y) > cfg.edge_tol:
            traj.domain_limited = True
        t = target
    traj.steps = steps
    traj.dt_used = dt_nom
    logger.info("%d steps, %d rejected, final dt %.3g", steps, rejected, dt_nom)
    if traj.domain_limited:
        logger.warning("solution exceeds %g in the outer 5%% of the domain", cfg.edge_tol)
    return traj


def periodic_potential(name: str, amplitude: float, n: int, spacing: float,
                       x_min: float | None = None, width: float = 1.0,
                       center: float = 0.0, edge_tol: float = 1e-12) -> SampledPotential:
    """Preset on a power-of-two periodic grid (default: centred on 0)."""
    from .scattering import preset_function

    if x_min is None:
        x_min = -0.5 * n * spacing
    func = preset_function(name, amplitude, width, center)
    values = func(x_min + spacing * np.arange(n))
    return SampledPotential(x_min, spacing, values, edge_tol, func,
                            f"{name}(amplitude={amplitude:g})")

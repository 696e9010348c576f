"""Forward scattering: potential y0(x) -> reflection coefficient r(z).

Convention (tag ``AKNS-defocusing-v1``)
---------------------------------------
The x-part of the Lax pair is ``psi_x = (-i z sigma3 + Q) psi`` with
``Q = [[0, i y], [-i y, 0]]``, which is Hermitian, i.e. the defocusing case.
With the Jost solution normalised at x -> -inf and the fast phase removed,
the first column obeys

    a' =  i y(x) exp(+2izx) b,     a(-inf) = 1
    b' = -i y(x) exp(-2izx) a,     b(-inf) = 0

and ``r(z) = b(+inf) / a(+inf)``.  For real y this gives
``r(z) = -conj(r(-z))``, ``|a|^2 - |b|^2 = 1`` and hence ``|r| < 1``; to first
order ``r(z) = -i * int y(x) exp(-2izx) dx``.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.signal import resample

from .errors import InputError, NumericalError

logger = logging.getLogger(__name__)

CONVENTION = "AKNS-defocusing-v1"
PRESETS = ("zero", "gaussian", "sech", "sech2")


@dataclass(frozen=True, eq=False)
class SampledPotential:
    """Real initial data on a uniform grid ``grid_start + spacing * j``."""

    grid_start: float
    spacing: float
    values: np.ndarray
    edge_tol: float = 1e-12
    # exact evaluator, used to refine the grid instead of FFT interpolation
    source: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 16:
            raise InputError("potential needs at least 16 samples")
        if not self.spacing > 0:
            raise InputError("grid spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise InputError("potential values must be finite")
        peak = np.max(np.abs(values))
        edge = self.edge_values()
        if np.max(np.abs(edge)) > self.edge_tol * peak:
            raise InputError(
                f"potential does not decay: edge max {np.max(np.abs(edge)):.3e} "
                f"exceeds {self.edge_tol:g} * max|y0| = {self.edge_tol * peak:.3e}"
            )

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.grid_start + self.spacing * np.arange(self.n)

    @property
    def half_width(self) -> float:
        return 0.5 * self.spacing * (self.n - 1)

    def edge_values(self) -> np.ndarray:
        m = max(1, int(np.ceil(0.05 * self.n)))
        return np.concatenate([self.values[:m], self.values[-m:]])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.float64([self.grid_start, self.spacing]).tobytes())
        h.update(self.values.tobytes())
        return h.hexdigest()[:16]

    def refined(self) -> "SampledPotential":
        """Same potential on a grid with half the spacing."""
        h = 0.5 * self.spacing
        n = 2 * self.n - 1
        if self.source is not None:
            vals = self.source(self.grid_start + h * np.arange(n))
        else:
            # band-limited interpolation of the (decayed, hence periodic) samples
            vals = resample(self.values, 2 * self.n)[:n]
        return SampledPotential(self.grid_start, h, vals, self.edge_tol, self.source, self.label)

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["x", "y0"], [self.x, self.values])


def preset_function(name: str, amplitude: float = 0.1, width: float = 1.0,
                    center: float = 0.0) -> Callable[[np.ndarray], np.ndarray]:
    """Analytic preset ``amplitude * f((x - center) / width)``."""
    if width <= 0:
        raise InputError("preset width must be positive")
    if name == "zero":
        return lambda x: np.zeros_like(np.asarray(x, dtype=float))

    def _sech(u):
        u = np.abs(u)
        e = np.exp(-u)
        return 2.0 * e / (1.0 + e * e)

    shapes = {
        "gaussian": lambda u: np.exp(-u * u),
        "sech": _sech,
        "sech2": lambda u: _sech(u) ** 2,
    }
    if name not in shapes:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    f = shapes[name]
    return lambda x: amplitude * f((np.asarray(x, dtype=float) - center) / width)


def preset_potential(name: str, amplitude: float = 0.1, width: float = 1.0,
                     center: float = 0.0, x_min: float = -40.0, x_max: float = 40.0,
                     spacing: float = 0.01, edge_tol: float = 1e-12) -> SampledPotential:
    func = preset_function(name, amplitude, width, center)
    n = int(round((x_max - x_min) / spacing)) + 1
    x = x_min + spacing * np.arange(n)
    label = f"{name}(amplitude={amplitude:g}, width={width:g}, center={center:g})"
    return SampledPotential(x_min, spacing, func(x), edge_tol, func, label)


def potential_from_csv(path, edge_tol: float = 1e-12) -> SampledPotential:
    """Read a two-column ``x, y0`` CSV (optional header) on a uniform grid."""
    try:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except ValueError:
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2, skiprows=1)
    except OSError as exc:
        raise InputError(f"cannot read potential file {path}: {exc}") from exc
    if data.shape[1] < 2:
        raise InputError("potential CSV needs two columns x, y0")
    x, y = data[:, 0], data[:, 1]
    dx = np.diff(x)
    if dx.size == 0 or not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
        raise InputError("potential CSV must be sampled on a uniform increasing grid")
    return SampledPotential(float(x[0]), float(np.mean(dx)), y, edge_tol, None, str(path))


@dataclass(frozen=True, eq=False)
class ReflectionCoefficient:
    """r(z) sampled on a grid symmetric about z = 0."""

    zgrid: np.ndarray
    values: np.ndarray
    potential_hash: str = ""
    convention: str = CONVENTION
    error_estimate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "zgrid", np.asarray(self.zgrid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if self.zgrid.shape != self.values.shape:
            raise InputError("zgrid and values must have equal length")

    @cached_property
    def _splines(self):
        return CubicSpline(self.zgrid, self.values.real), CubicSpline(self.zgrid, self.values.imag)

    def __call__(self, z):
        """Cubic-spline interpolant of r; zero outside the sampled range."""
        z = np.asarray(z, dtype=float)
        re, im = self._splines
        out = re(z) + 1j * im(z)
        outside = (z < self.zgrid[0]) | (z > self.zgrid[-1])
        return np.where(outside, 0.0, out)

    @property
    def spacing(self) -> float:
        return float(self.zgrid[1] - self.zgrid[0])

    @property
    def z_max(self) -> float:
        return float(self.zgrid[-1])

    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def symmetry_residual(self) -> float:
        """max |r(z) + conj(r(-z))| over the symmetric grid."""
        return float(np.max(np.abs(self.values + np.conj(self.values[::-1]))))

    def edge_ratio(self) -> float:
        sup = self.sup_abs()
        if sup == 0.0:
            return 0.0
        return float(max(abs(self.values[0]), abs(self.values[-1])) / sup)

    def phase_rotated(self, alpha: float) -> "ReflectionCoefficient":
        return ReflectionCoefficient(self.zgrid, self.values * np.exp(1j * alpha),
                                     self.potential_hash, self.convention)

    def to_csv(self, path) -> None:
        from .io import write_csv

        write_csv(path, ["z", "re_r", "im_r", "abs_r"],
                  [self.zgrid, self.values.real, self.values.imag, np.abs(self.values)])


def reflection_from_csv(path) -> ReflectionCoefficient:
    """Read r from a ``z, re_r, im_r[, abs_r]`` CSV as written by ``to_csv``."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read reflection coefficient {path}: {exc}") from exc
    if data.shape[1] < 3:
        raise InputError("reflection CSV needs columns z, re_r, im_r")
    z = data[:, 0]
    _check_symmetric(z)
    digest = hashlib.sha256(np.ascontiguousarray(data[:, :3]).tobytes()).hexdigest()
    return ReflectionCoefficient(z, data[:, 1] + 1j * data[:, 2], digest)


def symmetric_grid(z_max: float, n: int = 1025) -> np.ndarray:
    if n % 2 == 0:
        raise InputError("symmetric z grid needs an odd number of points")
    half = np.linspace(0.0, z_max, n // 2 + 1)
    return np.concatenate([-half[:0:-1], half])


def _check_symmetric(zgrid: np.ndarray) -> None:
    if zgrid.ndim != 1 or zgrid.size < 3:
        raise InputError("zgrid must be a 1-d array with at least 3 points")
    if np.max(np.abs(zgrid + zgrid[::-1])) > 1e-12 * max(1.0, np.max(np.abs(zgrid))):
        raise InputError("zgrid must be symmetric about 0")


def _rk4_sweep(y: np.ndarray, x0: float, h: float, z: np.ndarray, stride: int) -> np.ndarray:
    """RK4 over the sampled potential with step ``2 * stride * h``.

    Stage values at the half step are taken from the samples themselves, so
    ``len(y) - 1`` must be divisible by ``2 * stride``.
    """
    H = 2 * stride * h
    a = np.ones(z.shape, dtype=complex)
    b = np.zeros(z.shape, dtype=complex)
    two_iz = 2j * z
    e0 = np.exp(two_iz * x0)
    for j in range(0, y.size - 1, 2 * stride):
        xm = x0 + (j + stride) * h
        x1 = x0 + (j + 2 * stride) * h
        em = np.exp(two_iz * xm)
        e1 = np.exp(two_iz * x1)
        y0, ym, y1 = y[j], y[j + stride], y[j + 2 * stride]
        p0, pm, p1 = 1j * y0 * e0, 1j * ym * em, 1j * y1 * e1
        # a' = p b, b' = -conj-type coefficient * a
        q0, qm, q1 = -1j * y0 * np.conj(e0), -1j * ym * np.conj(em), -1j * y1 * np.conj(e1)
        k1a, k1b = p0 * b, q0 * a
        a2, b2 = a + 0.5 * H * k1a, b + 0.5 * H * k1b
        k2a, k2b = pm * b2, qm * a2
        a3, b3 = a + 0.5 * H * k2a, b + 0.5 * H * k2b
        k3a, k3b = pm * b3, qm * a3
        a4, b4 = a + H * k3a, b + H * k3b
        k4a, k4b = p1 * b4, q1 * a4
        a = a + H / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a)
        b = b + H / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b)
        e0 = e1
    return b / a


def _padded(values: np.ndarray, multiple: int) -> np.ndarray:
    extra = (-(values.size - 1)) % multiple
    if extra:
        values = np.concatenate([values, np.zeros(extra)])
    return values


def _jost_ratio(y0: SampledPotential, z: np.ndarray, chunk: int = 2048):
    """r on z with a Richardson estimate from steps 2h and 4h."""
    y = _padded(y0.values, 4)
    fine = np.empty(z.shape, dtype=complex)
    coarse = np.empty(z.shape, dtype=complex)
    for s in range(0, z.size, chunk):
        zz = z[s:s + chunk]
        fine[s:s + chunk] = _rk4_sweep(y, y0.grid_start, y0.spacing, zz, 1)
        coarse[s:s + chunk] = _rk4_sweep(y, y0.grid_start, y0.spacing, zz, 2)
    correction = (fine - coarse) / 15.0
    return fine + correction, np.abs(correction)


def _scatter_on(y0: SampledPotential, zgrid: np.ndarray, tol: float, max_refine: int):
    length = y0.spacing * (y0.n - 1)
    pot = y0
    for level in range(max_refine + 1):
        r, err = _jost_ratio(pot, zgrid)
        per_length = float(np.max(err)) / length
        if per_length <= tol:
            return r, per_length
        logger.debug("refining potential grid (level %d, error %.2e)", level, per_length)
        if level < max_refine:
            pot = pot.refined()
    raise NumericalError(
        f"forward scattering did not reach tolerance {tol:g} per unit length "
        f"(estimate {per_length:.2e}) after {max_refine} refinements"
    )


def default_zmax(y0: SampledPotential, decay: float = 1e-10) -> float:
    """Frequency bound from the Born spectrum: |y0^(2z)| < decay * max beyond it."""
    spec = np.abs(np.fft.rfft(y0.values))
    k = 2 * np.pi * np.fft.rfftfreq(y0.n, y0.spacing)
    peak = spec.max()
    if peak == 0.0:
        return 1.0
    above = np.nonzero(spec > decay * peak)[0]
    return max(1.0, 0.5 * k[above[-1]] * 1.25)


def forward_scatter(y0: SampledPotential, zgrid=None, *, tol: float = 1e-10,
                    tol_sym: float = 1e-8, edge_decay: float = 1e-10,
                    n_points: int = 1025, max_refine: int = 3,
                    max_extend: int = 4) -> ReflectionCoefficient:
    """Reflection coefficient of ``y0`` on ``zgrid``.

    With ``zgrid=None`` a uniform grid of ``n_points`` on ``[-z_max, z_max]``
    is used, ``z_max`` being extended until ``|r(z_max)| < edge_decay * sup|r|``.
    """
    if zgrid is None:
        z_max = default_zmax(y0, edge_decay)
        for _ in range(max_extend + 1):
            grid = symmetric_grid(z_max, n_points)
            r, err = _scatter_on(y0, grid, tol, max_refine)
            sup = np.max(np.abs(r))
            if sup == 0.0 or max(abs(r[0]), abs(r[-1])) < edge_decay * sup:
                break
            z_max *= 1.5
        else:
            logger.warning("r has not decayed to %g at z_max = %g", edge_decay, z_max)
    else:
        grid = np.asarray(zgrid, dtype=float)
        _check_symmetric(grid)
        r, err = _scatter_on(y0, grid, tol, max_refine)

    sup = float(np.max(np.abs(r)))
    if sup >= 1.0:
        raise NumericalError(
            f"sup|r| = {sup:.6f} >= 1: the defocusing bound failed, "
            "check the sampling of the potential"
        )
    rc = ReflectionCoefficient(grid, r, y0.digest(), CONVENTION, err)
    sym = rc.symmetry_residual()
    if sym > tol_sym:
        raise NumericalError(f"symmetry residual {sym:.3e} exceeds {tol_sym:g}")
    return rc


def born_approximation(y0: SampledPotential, zgrid, chunk: int = 512) -> ReflectionCoefficient:
    """First-order reflection coefficient ``-i * int y0(x) exp(-2izx) dx``.

    Trapezoidal quadrature, which is spectrally accurate for smooth data that
    has decayed at the grid ends.
    """
    z = np.asarray(zgrid, dtype=float)
    x = y0.x
    w = np.full(x.size, y0.spacing)
    w[0] = w[-1] = 0.5 * y0.spacing
    wy = w * y0.values
    out = np.empty(z.shape, dtype=complex)
    for s in range(0, z.size, chunk):
        zz = z[s:s + chunk, None]
        out[s:s + chunk] = -1j * (np.exp(-2j * zz * x[None, :]) @ wy)
    return ReflectionCoefficient(z, out, y0.digest(), CONVENTION + "/born")

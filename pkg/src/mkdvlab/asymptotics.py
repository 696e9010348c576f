"""Closed-form long-time quantities for the oscillatory region x < 0.

All logarithms are natural.  Angles are principal values in (-pi, pi].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhaseError, InputError, NumericalError
from .scattering import ReflectionCoefficient
from .specfun import arg_gamma_imag_axis, principal_angle

__all__ = [
    "PhasePoint", "AsymptoticParams", "stationary_point", "phase", "phase_derivative",
    "nu_of", "arg_gamma_imag", "phase_phi", "log_integral_term", "y_a_eval",
    "y_a_from_params", "scale_map", "inverse_scale_map", "local_scale",
]


@dataclass(frozen=True)
class PhasePoint:
    x: float
    t: float
    z0: float
    tau: float

    def theta(self, z):
        return phase(z, self.x, self.t)

    def theta_prime(self, z):
        return phase_derivative(z, self.x, self.t)

    def tau_alt(self) -> float:
        """tau from the second closed form, (|x| / (12 t^{1/3}))^{3/2}."""
        return (abs(self.x) / (12.0 * self.t ** (1.0 / 3.0))) ** 1.5


@dataclass(frozen=True)
class AsymptoticParams:
    z0: float
    tau: float
    nu: float
    phi: float
    amplitude: float
    total_phase: float
    y_a: float
    r_z0: complex = 0j
    log_term: float = 0.0


def phase(z, x, t):
    """theta(z) = 4 t z^3 + x z."""
    z = np.asarray(z, dtype=float)
    return 4.0 * t * z**3 + x * z


def phase_derivative(z, x, t):
    z = np.asarray(z, dtype=float)
    return 12.0 * t * z**2 + x


def stationary_point(x: float, t: float) -> PhasePoint:
    """Stationary points +-z0 of 4tz^3 + xz, for x < 0 and t > 0."""
    if not t > 0:
        raise InputError("stationary_point needs t > 0")
    if not x < 0:
        raise InputError("no real stationary points for x >= 0")
    z0 = math.sqrt(-x / (12.0 * t))
    return PhasePoint(float(x), float(t), z0, t * z0**3)


def nu_of(r_val: complex) -> float:
    """nu = -log(1 - |r|^2) / (2 pi)."""
    m2 = abs(r_val) ** 2
    if not m2 < 1.0:
        raise InputError(f"|r| = {abs(r_val):.6g} must be < 1")
    return -math.log1p(-m2) / (2.0 * math.pi)


def arg_gamma_imag(nu: float) -> float:
    """Principal value of arg Gamma(i nu), nu > 0."""
    if not nu > 0:
        raise InputError("arg Gamma(i nu) needs nu > 0")
    return arg_gamma_imag_axis(nu)


# --- the log-weighted integral ----------------------------------------------

def _spectral_abs2_derivative(rc: ReflectionCoefficient):
    """Fourier coefficients of |r|^2 on its native grid and an evaluator of d/ds log(1-|r|^2).

    |r|^2 has decayed at the grid ends, so its periodic extension is smooth and
    the trigonometric interpolant (and its derivative) is spectrally accurate.
    """
    z = rc.zgrid
    a2 = np.abs(rc.values) ** 2
    # drop the duplicated end point of the period
    n = z.size - 1
    h = rc.spacing
    period = n * h
    coef = np.fft.fft(a2[:n]) / n
    k = 2 * np.pi * np.fft.fftfreq(n, h)
    if n % 2 == 0:
        coef[n // 2] = 0.0  # symmetric treatment of the Nyquist mode
    z0 = z[0]

    def evaluate(s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        ph = np.exp(1j * np.outer(s - z0, k))
        val = (ph @ coef).real
        der = (ph @ (1j * k * coef)).real
        return val, der

    return evaluate, period


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def log_integral_term(rc: ReflectionCoefficient, z0: float, *, ratio: float = 0.25,
                      levels: int = 40, max_panel: float | None = None) -> float:
    """(1/pi) * int_{-z0}^{z0} log|s - z0| d log(1 - |r(s)|^2).

    With u = z0 - s the integrand is log(u) g(u), g(u) = (d/ds log(1-|r|^2))(z0-u).
    The interval [0, 2 z0] is split into geometrically graded panels towards
    u = 0; the innermost panel [0, delta] is integrated exactly for g
    constant, the rest by 24-point Gauss-Legendre.  Panels wider than
    ``max_panel`` (default 16 native r spacings) are split evenly.
    """
    if not z0 > 0:
        raise InputError("z0 must be positive")
    if z0 > rc.z_max:
        raise InputError(f"z0 = {z0} lies outside the r grid (z_max = {rc.z_max})")
    evaluate, _ = _spectral_abs2_derivative(rc)
    length = 2.0 * z0
    edges = [length]
    while len(edges) <= levels:
        edges.append(edges[-1] * ratio)
    edges = edges[::-1]  # increasing, edges[0] = delta
    cap = 16.0 * rc.spacing if max_panel is None else max_panel
    fine = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        m = max(1, int(math.ceil((b - a) / cap)))
        fine.extend(a + (b - a) * np.arange(1, m + 1) / m)
    edges = np.array(fine)
    delta = edges[0]
    mids = 0.5 * (edges[1:] + edges[:-1])
    halves = 0.5 * (edges[1:] - edges[:-1])
    u = (mids[:, None] + halves[:, None] * _GL_NODES[None, :]).ravel()
    w = (halves[:, None] * _GL_WEIGHTS[None, :]).ravel()
    all_u = np.concatenate([u, [0.0]])
    val, der = evaluate(z0 - all_u)
    if np.any(val >= 1.0):
        raise InputError("|r| >= 1 on [-z0, z0]")
    g = der / (1.0 - val)  # d/ds log(1 - |r|^2) = -(|r|^2)' / (1 - |r|^2)
    g = -g
    total = np.sum(w * np.log(u) * g[:-1]) + g[-1] * delta * (math.log(delta) - 1.0)
    if not math.isfinite(total):
        raise NumericalError("log-weighted quadrature produced a non-finite value")
    return float(total / math.pi)


def phase_phi(rc: ReflectionCoefficient, z0: float) -> tuple[float, float, complex, float]:
    """phi(z0) in (-pi, pi]; also returns nu, r(z0) and the integral term."""
    r0 = complex(rc(z0))
    if r0 == 0:
        raise DegeneratePhaseError("r(z0) = 0: phase undefined, amplitude vanishes")
    nu = nu_of(r0)
    if nu == 0.0:
        raise DegeneratePhaseError("nu underflows to 0 at z0")
    log_term = log_integral_term(rc, z0)
    phi = arg_gamma_imag(nu) - math.pi / 4 - math.atan2(r0.imag, r0.real) + log_term
    return principal_angle(phi), nu, r0, log_term


def y_a_from_params(nu: float, z0: float, t: float, phi: float) -> tuple[float, float, float]:
    """(y_a, amplitude, total phase) for given nu, z0, t and phi."""
    amplitude = math.sqrt(nu / (3.0 * t * z0))
    total = 16.0 * t * z0**3 - nu * math.log(192.0 * t * z0**3) + phi
    return amplitude * math.cos(total), amplitude, total


def y_a_eval(x: float, t: float, rc: ReflectionCoefficient) -> AsymptoticParams:
    """Leading oscillatory asymptotics at (x, t), x < 0."""
    pp = stationary_point(x, t)
    try:
        phi, nu, r0, log_term = phase_phi(rc, pp.z0)
    except DegeneratePhaseError:
        return AsymptoticParams(pp.z0, pp.tau, 0.0, math.nan, 0.0, math.nan, 0.0)
    y, amp, total = y_a_from_params(nu, pp.z0, t, phi)
    return AsymptoticParams(pp.z0, pp.tau, nu, phi, amp, total, y, r0, log_term)


# --- local scaling near the stationary points -------------------------------

def local_scale(x: float, t: float) -> float:
    """(48 t z0)^{-1/2}, the width of the cross neighbourhoods of +-z0."""
    pp = stationary_point(x, t)
    if pp.z0 == 0:
        raise InputError("z0 = 0: scaling degenerates")
    return (48.0 * t * pp.z0) ** -0.5


def scale_map(z_hat, x: float, t: float, branch: int = +1):
    """z = z_hat (48 t z0)^{-1/2} + branch * z0."""
    if branch not in (+1, -1):
        raise InputError("branch must be +1 or -1")
    pp = stationary_point(x, t)
    return np.asarray(z_hat) * local_scale(x, t) + branch * pp.z0


def inverse_scale_map(z, x: float, t: float, branch: int = +1):
    if branch not in (+1, -1):
        raise InputError("branch must be +1 or -1")
    pp = stationary_point(x, t)
    return (np.asarray(z) - branch * pp.z0) / local_scale(x, t)

"""Special functions: complex log-gamma and the Airy function Ai.

Both are implemented directly so that the asymptotic formulas do not depend
on the accuracy contract of an external special-function library; mpmath is
used only as an oracle in the tests.
"""
from __future__ import annotations

import cmath
import math
from decimal import Decimal, localcontext

import numpy as np

__all__ = ["loggamma", "arg_gamma_imag_axis", "airy_ai", "airy_ai_prime"]

# Lanczos approximation, g = 7, n = 9 (Godfrey's coefficients).
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993227684700473478,
    676.520368121885098567009190444019,
    -1259.13921672240287047156078755283,
    771.3234287776530788486528258894,
    -176.61502916214059906584551354,
    12.507343278686904814458936853,
    -0.13857109526572011689554707,
    9.984369578019570859563e-6,
    1.50563273514931155834e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _loggamma_right(z: complex) -> complex:
    # valid for Re z >= 1/2; the result is the continuous branch of log Gamma
    z = z - 1.0
    x = _LANCZOS_P[0]
    for i in range(1, len(_LANCZOS_P)):
        x += _LANCZOS_P[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(x)


def loggamma(z: complex) -> complex:
    """Complex log Gamma.

    For Re z >= 1/2 this is the branch continuous from the positive real
    axis. Left of that line the reflection formula is used, which may differ
    from the continuous branch by a multiple of 2*pi*i in the imaginary part.
    """
    z = complex(z)
    if z.real >= 0.5:
        return _loggamma_right(z)
    if z.imag == 0.0 and z.real == math.floor(z.real):
        raise ValueError(f"Gamma has a pole at {z.real}")
    return math.log(math.pi) - cmath.log(cmath.sin(math.pi * z)) - _loggamma_right(1.0 - z)


def arg_gamma_imag_axis(nu: float, continuous: bool = False) -> float:
    """arg Gamma(i*nu) for nu > 0 through Gamma(i nu) = Gamma(1 + i nu)/(i nu).

    With ``continuous=True`` the branch continuous in nu (tending to -pi/2 as
    nu -> 0+) is returned, otherwise the principal value in (-pi, pi].
    """
    if not nu > 0.0:
        raise ValueError("arg Gamma(i nu) requires nu > 0")
    arg = _loggamma_right(1.0 + 1j * nu).imag - 0.5 * math.pi
    if continuous:
        return arg
    return principal_angle(arg)


def principal_angle(a: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    a = math.remainder(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


# ---------------------------------------------------------------------------
# Airy function

_AI0 = Decimal("0.35502805388781723926006318600418317639797917419917724058332651")
_AIP0 = Decimal("-0.25881940379280679840518356018920396347909113835493458221000181")
_ASYMPTOTIC_SWITCH = 8.0
_SERIES_DIGITS = 45


def _maclaurin(s: float) -> tuple[float, float]:
    """Ai and Ai' from the Maclaurin series, summed in 45-digit decimal.

    The two power series cancel for large |s|; the extra digits absorb that
    cancellation for |s| <= 8.
    """
    with localcontext() as ctx:
        ctx.prec = _SERIES_DIGITS
        x = Decimal(s)  # exact conversion of the binary float
        x3 = x * x * x
        tiny = Decimal(10) ** (-(_SERIES_DIGITS - 5))
        # f = sum s^{3k}/prod (3j-1)(3j), g = sum s^{3k+1}/prod (3j)(3j+1)
        f = tf = Decimal(1)
        g = tg = x
        df = Decimal(0)
        tdf = x * x / 2
        dg = tdg = Decimal(1)
        k = 0
        while True:
            k += 1
            tf = tf * x3 / ((3 * k - 1) * (3 * k))
            tg = tg * x3 / ((3 * k) * (3 * k + 1))
            f += tf
            g += tg
            df += tdf
            tdf = tdf * x3 / ((3 * k) * (3 * k + 2))
            tdg = tdg * x3 / ((3 * k - 2) * (3 * k))
            dg += tdg
            if max(abs(tf), abs(tg), abs(tdf), abs(tdg)) < tiny:
                break
        ai = _AI0 * f + _AIP0 * g
        aip = _AI0 * df + _AIP0 * dg
        return float(ai), float(aip)


def _asymptotic_coeffs(nmax: int) -> tuple[list[float], list[float]]:
    u = [1.0]
    v = [1.0]
    for k in range(1, nmax + 1):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k))
        v.append(-(6 * k + 1) / (6 * k - 1) * u[-1])
    return u, v


_U, _V = _asymptotic_coeffs(80)


def _truncated(coeffs, zeta, sign_alt, parity=None):
    """Sum coeffs[k] * (+-1)^k / zeta^k up to the smallest term.

    ``parity`` selects even (0) or odd (1) indices, for the oscillatory side.
    """
    total = 0.0
    prev = math.inf
    idx = range(len(coeffs)) if parity is None else range(parity, len(coeffs), 2)
    for n, k in enumerate(idx):
        term = coeffs[k] / zeta**k
        if abs(term) > prev:
            break
        prev = abs(term)
        total += (-1) ** n * term if sign_alt else term
    return total


def _asymptotic(s: float) -> tuple[float, float]:
    a = abs(s)
    zeta = 2.0 / 3.0 * a**1.5
    q = a**0.25
    sqpi = math.sqrt(math.pi)
    if s > 0:
        e = math.exp(-zeta)
        ai = e / (2.0 * sqpi * q) * _truncated(_U, zeta, True)
        aip = -q * e / (2.0 * sqpi) * _truncated(_V, zeta, True)
        return ai, aip
    c = math.cos(zeta - math.pi / 4)
    sn = math.sin(zeta - math.pi / 4)
    ai = (c * _truncated(_U, zeta, True, 0) + sn * _truncated(_U, zeta, True, 1)) / (sqpi * q)
    aip = q * (sn * _truncated(_V, zeta, True, 0) - c * _truncated(_V, zeta, True, 1)) / sqpi
    return ai, aip


def _airy_pair(s: float) -> tuple[float, float]:
    s = float(s)
    if not math.isfinite(s):
        raise ValueError("Airy argument must be finite")
    if abs(s) <= _ASYMPTOTIC_SWITCH:
        return _maclaurin(s)
    return _asymptotic(s)


def airy_ai(s):
    """Airy function Ai(s) for scalar or array s."""
    if np.ndim(s) == 0:
        return _airy_pair(s)[0]
    return np.array([_airy_pair(v)[0] for v in np.ravel(s)]).reshape(np.shape(s))


def airy_ai_prime(s):
    """Derivative Ai'(s) for scalar or array s."""
    if np.ndim(s) == 0:
        return _airy_pair(s)[1]
    return np.array([_airy_pair(v)[1] for v in np.ravel(s)]).reshape(np.shape(s))

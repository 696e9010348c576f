"""Region classification of (x, t) and the matching leading-order formula.

Boundaries are configuration: the geometry of the six regions is only known
through the error terms, so the thresholds below are tunable defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotics import stationary_point, y_a_eval
from .errors import InputError
from .painleve import PainleveProfile, similarity_eval
from .scattering import ReflectionCoefficient
from .specfun import airy_ai

__all__ = ["RegionConfig", "AsymptoticPrediction", "REGIONS", "ERROR_ORDERS", "NOTES",
           "classify", "predict", "tau_of", "overlap_report", "coverage_check",
           "write_predictions"]

REGIONS = ("I", "II", "III", "IV", "V", "VI")

ERROR_ORDERS = {
    "I": "O((-x)^{-j} + (-x)^{-3/4} C_j(-x/t))",
    "II": "(t z0)^{-1/2} O(tau^{-1/4})",
    "III": "O(tau^{2/3} / t^{2/3})",
    "IV": "O(t^{-2/3})",
    "V": "O(t^{-j} + t^{-2/3} exp(-12 eta tau^{2/3}))",
    "VI": "O((x + t)^{-j})",
}

NOTES = {
    "I": "any order j; C_j rapidly decreasing, not constructive",
    "II": "",
    "III": "",
    "IV": "",
    "V": "any order j; some eta > 0, not constructive",
    "VI": "any order j",
}


@dataclass(frozen=True)
class RegionConfig:
    M: float = 1.0
    C: float = 1.0
    tau_lo: float = 1.0
    tau_hi: float = 10.0
    c: float = 1.0
    t_min: float = 1.0

    def __post_init__(self):
        if not all(v > 0 for v in (self.M, self.C, self.tau_lo, self.tau_hi, self.c, self.t_min)):
            raise InputError("region thresholds must be positive")
        if not self.tau_lo < self.tau_hi:
            raise InputError("need tau_lo < tau_hi")


@dataclass(frozen=True)
class AsymptoticPrediction:
    x: float
    t: float
    region: str
    value: float
    error_order: str
    notes: str = ""

    def row(self):
        return [self.x, self.t, self.region, self.value, self.error_order]


def tau_of(x: float, t: float) -> float:
    """tau = t z0^3 with z0 = sqrt(|x| / 12 t)."""
    return t * (abs(x) / (12.0 * t)) ** 1.5


def classify(x: float, t: float, cfg: RegionConfig | None = None) -> str:
    cfg = cfg or RegionConfig()
    if not (math.isfinite(x) and math.isfinite(t)):
        raise InputError("x and t must be finite")
    if t < cfg.t_min:
        raise InputError(f"t = {t:g} below t_min = {cfg.t_min:g}")
    if x >= cfg.c * t:
        return "VI"
    width = cfg.C * t ** (1.0 / 3.0)
    if x > width:
        return "V"
    if abs(x) <= width:
        return "IV"
    tau = tau_of(x, t)
    if tau <= cfg.tau_hi:
        return "III"
    if x > -cfg.M * t:
        return "II"
    return "I"


def _similarity(x: float, t: float, profile: PainleveProfile) -> float:
    s = x / (3.0 * t) ** (1.0 / 3.0)
    if s > profile.s_max:
        # beyond the seed point p coincides with k Ai(s) to the seeding tolerance
        return float(profile.k * airy_ai(s) / (3.0 * t) ** (1.0 / 3.0))
    return similarity_eval(x, t, profile)


def predict(x: float, t: float, rc: ReflectionCoefficient, profile: PainleveProfile,
            cfg: RegionConfig | None = None) -> AsymptoticPrediction:
    region = classify(x, t, cfg)
    if region in ("I", "II"):
        value = y_a_eval(x, t, rc).y_a
    elif region == "VI":
        value = 0.0
    else:
        value = _similarity(x, t, profile)
    if not math.isfinite(value):
        raise InputError(f"non-finite prediction at (x, t) = ({x:g}, {t:g})")
    return AsymptoticPrediction(float(x), float(t), region, float(value),
                                ERROR_ORDERS[region], NOTES[region])


def descriptor_magnitude(region: str, x: float, t: float) -> float:
    """The error descriptor with all unknown constants set to 1 (II and III only)."""
    tau = tau_of(x, t)
    if region == "II":
        z0 = stationary_point(x, t).z0
        return (t * z0) ** -0.5 * tau ** -0.25
    if region == "III":
        return tau ** (2.0 / 3.0) / t ** (2.0 / 3.0)
    raise InputError("descriptor magnitude is only defined for regions II and III")


def overlap_report(t: float, rc: ReflectionCoefficient, profile: PainleveProfile,
                   cfg: RegionConfig | None = None, n: int = 9) -> list[dict]:
    """Compare y_a and the similarity form across tau in [tau_lo, tau_hi] at fixed t."""
    cfg = cfg or RegionConfig()
    out = []
    for tau in np.geomspace(cfg.tau_lo, cfg.tau_hi, n):
        # invert tau = t (|x| / 12 t)^{3/2}
        x = -12.0 * t * (tau / t) ** (2.0 / 3.0)
        ya = y_a_eval(x, t, rc).y_a
        sim = _similarity(x, t, profile)
        diff = abs(ya - sim)
        d2 = descriptor_magnitude("II", x, t)
        d3 = descriptor_magnitude("III", x, t)
        out.append({"x": x, "t": t, "tau": float(tau), "y_a": ya, "y_sim": sim, "diff": diff,
                    "desc_II": d2, "desc_III": d3, "matched": bool(diff <= min(d2, d3))})
    return out


def coverage_check(cfg: RegionConfig | None = None, t_values=(1.0, 10.0, 100.0, 1000.0),
                   n: int = 401) -> dict:
    """Sample x on [-3t, 3t] for several t; every point gets exactly one tag."""
    cfg = cfg or RegionConfig()
    counts = {r: 0 for r in REGIONS}
    for t in t_values:
        for x in np.linspace(-3 * t, 3 * t, n):
            counts[classify(float(x), float(t), cfg)] += 1
    return counts


def write_predictions(path, predictions) -> None:
    from .io import write_csv

    header = ["x", "t", "region", "value", "error_order"]
    cols = [list(c) for c in zip(*[p.row() for p in predictions])] if predictions else [[]] * 5
    write_csv(path, header, cols)

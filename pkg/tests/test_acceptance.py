"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
The long direct-solver run (sech data, t up to 200) is shared at module scope.
"""
import math
import time

import mpmath as mp
import numpy as np
import pytest

from conftest import record_criterion
from mkdvlab.asymptotics import phase_phi
from mkdvlab.compare import fit_region_iv, region_ii_validation, round_trip
from mkdvlab.inverse_rh import solve_y
from mkdvlab.mkdv_direct import evolve, periodic_potential
from mkdvlab.scattering import PRESETS, forward_scatter, preset_potential
from mkdvlab.specfun import airy_ai, airy_ai_prime, loggamma, principal_angle
from test_asymptotics import BUMPS, bump_reflection, oracle_phi

LONG_TIMES = [20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 200.0]
CROSS_TIMES = [1.0, 5.0, 10.0]


@pytest.fixture(scope="module")
def long_run():
    # L = 32768 keeps the fastest resolved radiation from wrapping onto the
    # measurement windows before t = 200
    y0 = periodic_potential("sech", 0.1, 2**18, 0.125)
    start = time.perf_counter()
    traj = evolve(y0, 200.0, store_times=LONG_TIMES)
    return traj, time.perf_counter() - start


@pytest.fixture(scope="module")
def cross_run():
    y0 = periodic_potential("sech", 0.3, 2**16, 0.125)
    return evolve(y0, 10.0, store_times=CROSS_TIMES)


@pytest.fixture(scope="module")
def sech03():
    y0 = preset_potential("sech", 0.3, spacing=0.01)
    return y0, forward_scatter(y0)


def test_criterion_1_round_trip(sech001, sech01):
    xs = np.linspace(-8.0, 8.0, 33)
    start = time.perf_counter()
    _, err_small = round_trip(*sech001, xs)
    _, err_mid = round_trip(*sech01, xs)
    elapsed = time.perf_counter() - start
    ok = err_small <= 1e-4 and err_mid <= 1e-3
    record_criterion(1, ok, f"round trip max error {err_small:.2e} (eps=0.01, tol 1e-4), "
                            f"{err_mid:.2e} (eps=0.1, tol 1e-3), {elapsed:.0f} s")
    assert ok


def test_criterion_2_scattering_invariants():
    worst_sym, worst_sup = 0.0, 0.0
    for name in PRESETS:
        for amp in (0.1, 0.5, 0.9):
            rc = forward_scatter(preset_potential(name, amp, spacing=0.01))
            worst_sym = max(worst_sym, rc.symmetry_residual())
            worst_sup = max(worst_sup, rc.sup_abs())
    ok = worst_sym <= 1e-8 and worst_sup < 1
    record_criterion(2, ok, f"symmetry residual {worst_sym:.2e} (tol 1e-8), "
                            f"max sup|r| {worst_sup:.4f} (< 1)")
    assert ok


@pytest.mark.slow
def test_criterion_3_oscillatory_region(long_run, sech01):
    traj, _ = long_run
    _, rc = sech01
    res = region_ii_validation(traj, rc, [25.0, 50.0, 100.0, 200.0])
    first = res.relative[0]
    decreasing = all(r < 1 for r in res.observed_ratios())
    factors = res.ratio_factors()
    within = all(1 / 3 <= f <= 3 for f in factors)
    ok = first <= 0.2 and decreasing and within
    record_criterion(3, ok, f"error/amplitude at t=25 {first:.3f} (tol 0.2); "
                            f"ratios {np.round(res.observed_ratios(), 3).tolist()} vs "
                            f"{np.round(res.predicted_ratios(), 3).tolist()}, "
                            f"factors {np.round(factors, 2).tolist()} (within 3)")
    assert ok


@pytest.mark.slow
def test_criterion_4_similarity_region(long_run, sech01):
    traj, _ = long_run
    _, rc = sech01
    fit = fit_region_iv(traj, [t for t in LONG_TIMES if 20 <= t <= 100], rc)
    ok = fit.stable(0.5) and fit.bounded(5.0)
    spread = float(np.max(np.abs(np.abs(fit.scaled) - fit.constant)) / fit.constant)
    record_criterion(4, ok, f"fitted k {fit.k:.6f} (i r(0) = {fit.k_default:.6f}), "
                            f"constant {fit.constant:.3e}, max deviation {100 * spread:.0f}% "
                            f"(tol 50%), residual <= 5 t^(-2/3) constant: {fit.bounded(5.0)}")
    assert ok


@pytest.mark.slow
def test_criterion_5_right_decay(long_run):
    traj, _ = long_run
    val = abs(float(traj.value([100.0], 50.0)[0]))
    ok = val <= 1e-6
    record_criterion(5, ok, f"|y(100, 50)| = {val:.2e} (tol 1e-6)")
    assert ok


def test_criterion_6_special_functions():
    nus = np.geomspace(1e-3, 10.0, 200)
    worst = 0.0
    for nu in nus:
        # |Gamma(i nu)|^2 = pi / (nu sinh(pi nu)), compared in log form
        lhs = 2 * loggamma(1j * nu).real
        rhs = math.log(math.pi) - math.log(nu) - math.log(math.sinh(math.pi * nu))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(rhs)))
    with mp.workdps(40):
        ai0 = 1 / (mp.power(3, mp.mpf(2) / 3) * mp.gamma(mp.mpf(2) / 3))
        aip0 = -1 / (mp.power(3, mp.mpf(1) / 3) * mp.gamma(mp.mpf(1) / 3))
    e_ai = abs(airy_ai(0.0) - float(ai0))
    e_aip = abs(airy_ai_prime(0.0) - float(aip0))
    ok = worst <= 1e-12 and e_ai <= 1e-12 and e_aip <= 1e-12
    record_criterion(6, ok, f"|Gamma(i nu)| identity {worst:.1e}, Ai(0) {e_ai:.1e}, "
                            f"Ai'(0) {e_aip:.1e} (tol 1e-12)")
    assert ok


def test_criterion_7_phase_quadrature():
    worst = 0.0
    for name, (mod, abs2) in sorted(BUMPS.items()):
        rc = bump_reflection(mod, phase=lambda z: 0.3 * z**3)
        for z0 in (0.4, 1.0, 1.7):
            phi = phase_phi(rc, z0)[0]
            worst = max(worst, abs(principal_angle(phi - oracle_phi(rc, abs2, z0))))
    ok = worst <= 1e-8
    record_criterion(7, ok, f"max |phi - oracle| {worst:.1e} over 3 bumps x 3 points (tol 1e-8)")
    assert ok


@pytest.mark.slow
def test_criterion_8_conservation(long_run, cross_run):
    traj, seconds = long_run
    drifts = {"long mass": traj.mass_drift(), "long L2": traj.l2_drift(),
              "cross mass": cross_run.mass_drift(), "cross L2": cross_run.l2_drift()}
    ok = max(drifts.values()) <= 1e-9
    text = ", ".join(f"{k} {v:.1e}" for k, v in drifts.items())
    record_criterion(8, ok, f"{text} (tol 1e-9); long run {seconds:.0f} s, "
                            f"domain_limited={traj.domain_limited}")
    assert ok


@pytest.mark.slow
def test_criterion_9_rh_vs_direct(cross_run, sech03):
    _, rc = sech03
    xs = np.linspace(-20.0, 8.0, 20)
    worst = 0.0
    for t in CROSS_TIMES:
        yd = cross_run.value(xs, t)
        for x, ref in zip(xs, yd):
            worst = max(worst, abs(solve_y(rc, float(x), t).y_rh - ref))
    ok = worst <= 1e-3
    record_criterion(9, ok, f"max |y_RH - y_direct| {worst:.2e} at 20 x values, "
                            f"t in {CROSS_TIMES} (tol 1e-3)")
    assert ok

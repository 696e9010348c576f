import numpy as np
import pytest

from mkdvlab.errors import InputError, UnderResolvedError
from mkdvlab.inverse_rh import (CauchyOperator, RHConfig, build_oscillatory_jump, design_grid,
                                full_residual, neumann_mu, reconstruct_y,
                                reconstruction_integral, solve_mu, solve_y, write_records,
                                y_from_integral)
from mkdvlab.io import read_csv
from mkdvlab.mkdv_direct import evolve, periodic_potential
from mkdvlab.scattering import ReflectionCoefficient, symmetric_grid


def scaled(rc, sup):
    return ReflectionCoefficient(rc.zgrid, rc.values * (sup / rc.sup_abs()))


def test_zero_reflection_gives_identity():
    z = symmetric_grid(4.0, 129)
    rc = ReflectionCoefficient(z, np.zeros(z.size))
    jump = build_oscillatory_jump(rc, -1.0, 2.0, design_grid(rc, -1.0, 2.0))
    assert np.all(jump.v == np.eye(2))
    assert not np.any(jump.w_plus) and not np.any(jump.w_minus)
    mu = solve_mu(jump)
    assert np.all(mu.mu == np.eye(2))
    assert reconstruct_y(mu, jump) == 0.0


def test_jump_invariants(sech01):
    _, rc = sech01
    jump = build_oscillatory_jump(rc, -3.0, 0.7, design_grid(rc, -3.0, 0.7))
    chk = jump.check()
    assert chk["det"] < 1e-14
    assert chk["factorization"] < 1e-12
    assert chk["w_plus_shape"] == 0 and chk["w_minus_shape"] == 0


def test_stationary_points_of_the_phase(sech01):
    _, rc = sech01
    t = 2.0
    x = -12 * t
    jump = build_oscillatory_jump(rc, x, t, symmetric_grid(2.0, 401))
    z = jump.zgrid
    dtheta = np.gradient(jump.theta, z)
    for z0 in (-1.0, 1.0):
        i = int(np.argmin(np.abs(z - z0)))
        assert abs(12 * t * z[i] ** 2 + x) < 1e-12
        assert abs(dtheta[i]) < 1e-3


def test_reflection_at_least_one_rejected():
    z = symmetric_grid(3.0, 61)
    rc = ReflectionCoefficient(z, 1.2j * np.exp(-z**2) * np.ones(z.size))
    with pytest.raises(InputError):
        build_oscillatory_jump(rc, 0.0, 0.0, z)


def test_hilbert_of_lorentzian():
    # H[1/(1+x^2)] = x/(1+x^2) for H f(x) = (1/pi) p.v. int f(s)/(x-s) ds
    h = 0.05
    n = 40001
    z = h * (np.arange(n) - n // 2)
    cop = CauchyOperator(n, h)
    got = cop.hilbert(1 / (1 + z**2))
    mid = np.abs(z) < 5
    assert np.max(np.abs(got[mid] - (z / (1 + z**2))[mid])) < 1e-3


def test_cauchy_jump_relation():
    z = symmetric_grid(8.0, 801)
    cop = CauchyOperator(z.size, z[1] - z[0])
    f = np.exp(-z**2) * (1 + 0.3j * z)
    assert np.allclose(cop.plus(f) - cop.minus(f), f, atol=1e-15)
    assert np.allclose(np.conj(cop.plus(f)), -cop.minus(np.conj(f)), atol=1e-15)


def test_residual_and_edge_behaviour(sech01):
    _, rc = sech01
    jump = build_oscillatory_jump(rc, -5.0, 1.0, design_grid(rc, -5.0, 1.0))
    mu = solve_mu(jump)
    assert mu.residual_norm <= 1e-10
    assert full_residual(mu.mu, jump) <= 1e-10
    assert mu.edge_deviation(jump) <= 1e-8


def test_neumann_consistency_small_data(sech01):
    _, rc = sech01
    sup = 1e-3
    small = scaled(rc, sup)
    jump = build_oscillatory_jump(small, -2.0, 1.0, design_grid(small, -2.0, 1.0))
    mu = solve_mu(jump)
    mun = neumann_mu(jump)
    diff = np.max(np.abs(mu.mu - mun.mu))
    first = np.max(np.abs(mun.mu - np.eye(2)))
    assert first > 1e-5  # the first-order term is not trivially small
    assert diff <= 10 * sup**2


def test_dense_and_krylov_paths_agree(sech01):
    _, rc = sech01
    x, t = -1.0, 0.05
    grid = design_grid(rc, x, t)
    jump = build_oscillatory_jump(rc, x, t, grid)
    a = solve_mu(jump, RHConfig(dense_limit=10**9))
    b = solve_mu(jump, RHConfig(dense_limit=0))
    assert a.method == "dense" and b.method == "gmres"
    assert np.max(np.abs(a.mu - b.mu)) < 1e-10


def test_commutator_ignores_diagonal(sech01):
    _, rc = sech01
    jump = build_oscillatory_jump(rc, 0.5, 0.0, design_grid(rc, 0.5, 0.0))
    mu = solve_mu(jump)
    m = reconstruction_integral(mu, jump)
    off = m.copy()
    off[0, 0] = off[1, 1] = 0
    assert y_from_integral(m) == y_from_integral(off)


@pytest.mark.parametrize("x", [-4.0, -1.0, 0.0, 0.3, 2.0, 5.0])
def test_round_trip_small_amplitude(sech001, x):
    y0, rc = sech001
    rec = solve_y(rc, x, 0.0)
    assert abs(rec.y_rh - y0.source(np.array([x]))[0]) <= 1e-4
    assert rec.imag_residue <= 1e-8 * (1 + abs(rec.y_rh))


def test_round_trip_improves_with_resolution(sech01):
    y0, rc = sech01
    x = 0.7
    exact = y0.source(np.array([x]))[0]
    coarse = ReflectionCoefficient(rc.zgrid[::4], rc.values[::4])
    e_coarse = abs(solve_y(coarse, x, 0.0).y_rh - exact)
    e_fine = abs(solve_y(rc, x, 0.0).y_rh - exact)
    assert e_fine < e_coarse


def test_under_resolved_grid_rejected(sech01):
    _, rc = sech01
    coarse = symmetric_grid(6.0, 101)
    jump = build_oscillatory_jump(rc, -10.0, 5.0, coarse)
    with pytest.raises(UnderResolvedError) as info:
        solve_mu(jump)
    assert info.value.required_nodes > 101


def test_node_budget_reported(sech01):
    _, rc = sech01
    with pytest.raises(UnderResolvedError) as info:
        design_grid(rc, -10.0, 50.0, RHConfig(max_nodes=1000))
    assert info.value.required_nodes > 1000


def test_agrees_with_direct_solver_short_time(sech01):
    _, rc = sech01
    y0p = periodic_potential("sech", 0.1, 2**14, 400 / 2**14)
    traj = evolve(y0p, 1.0)
    xs = [-6.0, -2.0, 0.0, 1.5]
    yd = traj.value(xs, 1.0)
    for x, ref in zip(xs, yd):
        assert abs(solve_y(rc, x, 1.0).y_rh - ref) < 1e-6


def test_records_csv(tmp_path, sech01):
    _, rc = sech01
    recs = [solve_y(rc, x, 0.0) for x in (-1.0, 1.0)]
    write_records(tmp_path / "rh.csv", recs)
    data = read_csv(tmp_path / "rh.csv")
    assert list(data) == ["x", "t", "y_rh", "residual_norm", "imag_residue", "nodes_used"]
    assert np.allclose(data["y_rh"], [r.y_rh for r in recs], rtol=0, atol=0)

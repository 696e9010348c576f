import mpmath as mp
import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from mkdvlab.errors import InputError
from mkdvlab.scattering import (PRESETS, SampledPotential, born_approximation, forward_scatter,
                                potential_from_csv, preset_potential, reflection_from_csv,
                                symmetric_grid)

from conftest import exact_sech_abs_r


def test_zero_potential_has_zero_reflection():
    y0 = preset_potential("zero", spacing=0.05)
    rc = forward_scatter(y0)
    assert np.all(rc.values == 0)
    assert np.all(born_approximation(y0, rc.zgrid).values == 0)


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_sech_matches_closed_form_modulus(eps):
    y0 = preset_potential("sech", eps, spacing=0.01)
    rc = forward_scatter(y0)
    err = np.abs(np.abs(rc.values) - exact_sech_abs_r(rc.zgrid, eps))
    assert err.max() < 1e-9


def test_born_closed_form_and_high_precision_quadrature():
    eps = 0.01
    y0 = preset_potential("sech", eps, spacing=0.01)
    zg = np.array([-2.0, -1.3, -0.4, 0.0, 0.4, 1.3, 2.0])
    born = born_approximation(y0, zg).values
    assert np.allclose(np.abs(born), eps * np.pi / np.cosh(np.pi * zg), rtol=1e-9, atol=0)
    for zi, val in zip(zg, born):
        with mp.workdps(30):
            ref = -1j * mp.quad(lambda x: eps * mp.sech(x) * mp.exp(-2j * zi * x),
                                [-mp.inf] + list(range(-20, 21, 2)) + [mp.inf])
        assert abs(val - complex(ref)) < 1e-12


def test_born_linearity():
    y0 = preset_potential("gaussian", 0.2, spacing=0.02)
    z = symmetric_grid(3.0, 31)
    b1 = born_approximation(y0, z).values
    y2 = SampledPotential(y0.grid_start, y0.spacing, -3.5 * y0.values)
    b2 = born_approximation(y2, z).values
    assert np.allclose(b2, -3.5 * b1, rtol=0, atol=1e-15)


def test_forward_scatter_vs_born_small_amplitude(sech001):
    y0, rc = sech001
    born = born_approximation(y0, rc.zgrid).values
    rel = np.max(np.abs(rc.values - born)) / np.max(np.abs(born))
    assert rel < 0.01 * 5  # relative accuracy O(eps)


def test_born_difference_constant_is_grid_stable():
    eps = 1e-2
    consts = []
    for h in (0.02, 0.01):
        y0 = preset_potential("sech", eps, spacing=h)
        z = symmetric_grid(6.0, 257)
        rc = forward_scatter(y0, z)
        consts.append(np.max(np.abs(rc.values - born_approximation(y0, z).values)) / eps**2)
    assert abs(consts[0] / consts[1] - 1) < 0.05


def test_grid_convergence_under_halving():
    y0 = preset_potential("gaussian", 0.3, spacing=0.02)
    z = symmetric_grid(6.0, 129)
    r1 = forward_scatter(y0, z).values
    r2 = forward_scatter(y0.refined(), z).values
    assert np.max(np.abs(r1 - r2)) < 1e-8


@pytest.mark.parametrize("name", PRESETS[1:])
def test_presets_satisfy_invariants(name):
    rc = forward_scatter(preset_potential(name, 0.4, spacing=0.01))
    assert rc.symmetry_residual() <= 1e-8
    assert rc.sup_abs() < 1
    assert rc.edge_ratio() < 1e-10


@settings(max_examples=6, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(amp=st.floats(-0.8, 0.8), width=st.floats(0.7, 2.0), center=st.floats(-3, 3))
def test_symmetry_and_bound_random_gaussians(amp, width, center):
    y0 = preset_potential("gaussian", amp, width, center, x_min=-30, x_max=30, spacing=0.02)
    rc = forward_scatter(y0, symmetric_grid(6.0, 65))
    assert rc.symmetry_residual() <= 1e-8
    assert rc.sup_abs() < 1


def test_r0_is_imaginary_for_sech(sech01):
    _, rc = sech01
    r0 = complex(rc(0.0))
    assert abs(r0.real) < 1e-12
    assert abs(r0.imag + 0.304216) < 1e-6


def test_non_decaying_potential_rejected():
    x = np.linspace(-10, 10, 201)
    with pytest.raises(InputError):
        SampledPotential(x[0], x[1] - x[0], np.ones_like(x))


@pytest.mark.parametrize("bad", [dict(n=8), dict(h=0.0), dict(nan=True)])
def test_potential_validation(bad):
    n = bad.get("n", 64)
    h = bad.get("h", 0.5)
    vals = np.exp(-np.linspace(-8, 8, n) ** 2)
    if bad.get("nan"):
        vals[n // 2] = np.nan
    with pytest.raises(InputError):
        SampledPotential(-8.0, h, vals)


def test_asymmetric_zgrid_rejected():
    y0 = preset_potential("sech", 0.1, spacing=0.05)
    with pytest.raises(InputError):
        forward_scatter(y0, np.linspace(-1, 2, 31))


def test_csv_round_trips(tmp_path, sech01):
    y0, rc = sech01
    y0.to_csv(tmp_path / "y0.csv")
    back = potential_from_csv(tmp_path / "y0.csv")
    assert np.array_equal(back.values, y0.values)
    assert abs(back.spacing - y0.spacing) < 1e-15
    rc.to_csv(tmp_path / "r.csv")
    rb = reflection_from_csv(tmp_path / "r.csv")
    assert np.array_equal(rb.values, rc.values)
    assert np.array_equal(rb.zgrid, rc.zgrid)


def test_deterministic(sech01):
    y0, rc = sech01
    again = forward_scatter(y0)
    assert np.array_equal(again.values, rc.values)
    assert again.potential_hash == rc.potential_hash == y0.digest()


def test_phase_rotation_keeps_modulus(sech01):
    _, rc = sech01
    rot = rc.phase_rotated(0.7)
    assert np.allclose(np.abs(rot.values), np.abs(rc.values), rtol=0, atol=1e-15)

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracrate.energies import gagliardo_fourier
from fracrate.fields import (
    Field,
    GridSpec,
    ResolutionWarning,
    default_grid,
    dirichlet_energy,
    gaussian,
    gradient,
    hessian,
    l2_norm_sq,
    make_profile,
    read_binary,
    read_csv,
    sample,
    smooth_bump,
    spectral_decay,
    spectral_tail_ratio,
    to_field,
    to_spectrum,
    write_binary,
    write_csv,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(4, 1.0, 8)
    with pytest.raises(ValueError):
        GridSpec(1, 1.0, 7)
    with pytest.raises(ValueError):
        GridSpec(1, -1.0, 8)


def test_default_grids():
    assert default_grid(1) == GridSpec(1, 40.0, 1024)
    assert default_grid(2) == GridSpec(2, 20.0, 128)
    assert default_grid(3) == GridSpec(3, 10.0, 64)


def test_gaussian_boundary_tiny():
    u = sample(gaussian(1.0), GridSpec(1, 40.0, 512))
    assert abs(u.values[0]) <= math.exp(-200)
    assert u.support_ok()


def test_gaussian_rejected_in_small_box():
    with pytest.raises(ValueError):
        sample(gaussian(2.0), GridSpec(1, 10.0, 64))
    with pytest.raises(ValueError):
        sample(smooth_bump(6.0), GridSpec(1, 10.0, 64))


@pytest.mark.parametrize("N", [1, 2, 3])
def test_gaussian_transform_and_plancherel(N):
    g = default_grid(N)
    u = sample(gaussian(1.0), g)
    sp = to_spectrum(u)
    # the N = 3 default box clips the gaussian at exp(-12.5)
    tol = 1e-12 + 10 * u.support_tol
    np.testing.assert_allclose(sp.coeffs.real, np.exp(-0.5 * g.xi_mag ** 2), atol=tol)
    assert np.max(np.abs(sp.coeffs.imag)) <= 1e-12
    assert l2_norm_sq(u) == pytest.approx(math.pi ** (N / 2), rel=tol)
    assert float(np.sum(sp.power()) * g.dxi ** N) == pytest.approx(l2_norm_sq(u), rel=1e-12)
    assert sp.conjugate_symmetry_defect() <= 1e-14


@pytest.mark.parametrize("N", [1, 2, 3])
def test_dirichlet_energy_gaussian(N):
    # (omega_N / 2) int |grad e^{-|x|^2/2}|^2 = (omega_N / 2)(N / 2) pi^(N/2)
    w = {1: 2.0, 2: math.pi, 3: 4 * math.pi / 3}[N]
    u = sample(gaussian(1.0), default_grid(N))
    exact = 0.5 * w * 0.5 * N * math.pi ** (N / 2)
    assert dirichlet_energy(u) == pytest.approx(exact, rel=1e-10 + 100 * u.support_tol)


def test_round_trip(gauss1):
    back = to_field(to_spectrum(gauss1))
    np.testing.assert_allclose(back.values, gauss1.values, atol=1e-15)


def test_gradient_and_hessian_against_profile():
    g = default_grid(2)
    prof = gaussian(1.0)
    u = sample(prof, g)
    pts = g.points()
    gr = gradient(u)
    ex = prof.grad(pts)
    for a in range(2):
        np.testing.assert_allclose(gr[a].values, ex[..., a], atol=1e-12)
    H = hessian(u)
    exH = prof.hess(pts)
    assert H[0][1] is H[1][0]
    for i in range(2):
        for j in range(2):
            np.testing.assert_allclose(H[i][j].values, exH[..., i, j], atol=1e-11)


def test_bump_derivatives_finite_difference():
    prof = smooth_bump(1.0)
    x = np.array([[0.3, -0.2], [0.7, 0.1]])
    h = 1e-6
    for a in range(2):
        e = np.zeros(2)
        e[a] = h
        fd = (prof.value(x + e) - prof.value(x - e)) / (2 * h)
        np.testing.assert_allclose(prof.grad(x)[:, a], fd, rtol=1e-6, atol=1e-12)


def test_underresolved_bump_warns(bump1):
    with pytest.warns(ResolutionWarning):
        gradient(bump1)
    assert spectral_tail_ratio(bump1) > 1e-8


def test_spectral_decay_sampling():
    g = default_grid(1)
    u = sample(spectral_decay(3.0), g)
    np.testing.assert_allclose(to_spectrum(u).coeffs.real, (1 + g.xi_mag ** 2) ** -1.5, atol=1e-12)


def test_make_profile():
    assert make_profile("gaussian", sigma=2.0) == gaussian(2.0)
    with pytest.raises(ValueError):
        make_profile("nope")


def test_field_algebra(gauss1):
    z = gauss1 - gauss1
    assert np.all(z.values == 0)
    assert np.allclose((2.0 * gauss1).values, gauss1.values * 2)
    with pytest.raises(ValueError):
        Field(gauss1.grid, np.zeros(3))
    with pytest.raises(ValueError):
        gauss1.values[0] = 1.0


def test_csv_and_binary_io(tmp_path):
    g = GridSpec(2, 10.0, 16)
    u = sample(gaussian(1.0), g)
    write_csv(u, tmp_path / "u.csv")
    v = read_csv(tmp_path / "u.csv")
    assert v.grid == g
    np.testing.assert_array_equal(v.values, u.values)
    write_binary(u, tmp_path / "u.bin")
    w = read_binary(tmp_path / "u.bin")
    assert w.grid == g
    np.testing.assert_array_equal(w.values, u.values)


def test_box_size_stability():
    # doubling L at fixed dx leaves G_1(gaussian) unchanged to 1e-8
    a = dirichlet_energy(sample(gaussian(1.0), GridSpec(1, 40.0, 1024)))
    b = dirichlet_energy(sample(gaussian(1.0), GridSpec(1, 80.0, 2048)))
    assert abs(a - b) <= 1e-8 * abs(a)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=0.3, max_value=3.0), st.floats(min_value=-5, max_value=5))
def test_quadratic_scaling(sigma, c):
    u = sample(gaussian(sigma), default_grid(1))
    assert dirichlet_energy(c * u) == pytest.approx(c * c * dirichlet_energy(u), rel=1e-12, abs=1e-300)
    assert gagliardo_fourier(c * u, 0.7) == pytest.approx(c * c * gagliardo_fourier(u, 0.7), rel=1e-12, abs=1e-300)

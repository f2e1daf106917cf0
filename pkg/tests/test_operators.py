import math

import numpy as np
import pytest

from fracrate.energies import limit_functional, rate_functional
from fracrate.fields import Field, GridSpec, default_grid, gaussian, sample, smooth_bump
from fracrate.operators import (
    OperatorSpec,
    apply_L_realspace,
    apply_spectral,
    apply_symbol,
    first_variation_check,
    frac_laplacian,
    limit_operator,
    pairing,
    point_values,
    rate_operator,
)
from fracrate.quadrature import integrate_adaptive
from fracrate.symbols import PrecisionError, m_multiplier, tail_T, unit_ball_volume
from fracrate.energies import grid_symbol

SPECS = [frac_laplacian(0.4), frac_laplacian(1.0), rate_operator(0.7), rate_operator(0.95), limit_operator()]


def test_spec_validation():
    with pytest.raises(ValueError):
        OperatorSpec("NOPE", 0.5)
    with pytest.raises(ValueError):
        OperatorSpec("RATE_OPERATOR")
    with pytest.raises(ValueError):
        OperatorSpec("LIMIT_OPERATOR", 0.5)
    with pytest.raises(PrecisionError):
        apply_spectral(rate_operator(1 - 1e-8), sample(gaussian(1.0), default_grid(1)))


@pytest.mark.parametrize("spec", SPECS)
def test_zero_field(spec, grid1):
    z = Field(grid1, np.zeros(grid1.shape))
    assert np.all(apply_spectral(spec, z).values == 0.0)


def test_pure_mode_fractional_laplacian():
    g = GridSpec(1, 2 * math.pi * 4, 64)
    k = 3
    xi0 = g.dxi * k
    u = Field(g, np.cos(xi0 * g.axis))
    for s in (0.3, 0.8):
        out = apply_spectral(frac_laplacian(s), u)
        np.testing.assert_allclose(out.values, xi0 ** (2 * s) * u.values, atol=1e-13)


@pytest.mark.parametrize("spec", SPECS)
def test_self_adjoint(spec, gauss1, bump1):
    a = pairing(apply_spectral(spec, gauss1), bump1)
    b = pairing(gauss1, apply_spectral(spec, bump1))
    assert a == pytest.approx(b, rel=1e-10)


def test_quadratic_form_consistency(gauss1):
    for s in (0.6, 0.9, 0.99):
        assert pairing(apply_spectral(rate_operator(s), gauss1), gauss1) == pytest.approx(
            2 * rate_functional(gauss1, s), rel=1e-10)
    assert pairing(apply_spectral(limit_operator(), gauss1), gauss1) == pytest.approx(
        2 * limit_functional(gauss1), rel=1e-10)


def test_limit_operator_symbol_identity(gauss1, grid1):
    m = grid_symbol("m", grid1)
    t = grid_symbol("tail", grid1, 1.0)
    lhs = apply_spectral(limit_operator(), gauss1).values
    rhs = 2 * apply_symbol(m, gauss1).values - 2 * apply_symbol(t, gauss1).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10 * np.max(np.abs(lhs)))


def test_output_is_real_and_symmetric(gauss1):
    out = apply_spectral(limit_operator(), gauss1)
    np.testing.assert_allclose(out.values[1:], out.values[1:][::-1], atol=1e-12)


def test_point_values_interpolate(gauss1):
    x = np.array([0.0, 0.37, -2.2])
    np.testing.assert_allclose(point_values(gauss1, x), np.exp(-0.5 * x ** 2), atol=1e-13)


def test_realspace_far_point_only_outer_piece():
    prof = smooth_bump(1.0)
    x = 3.5
    got = apply_L_realspace(prof, x)
    outer = integrate_adaptive(lambda y: prof.value((y)[..., None]) / np.abs(x - y) ** 3, -1.0, 1.0).value
    assert got == pytest.approx(4.0 * outer, rel=1e-9)
    assert got > 0


def test_realspace_matches_spectral():
    g = GridSpec(1, 160.0, 4096)
    prof = gaussian(1.0)
    xs = np.array([0.0, 0.8, -1.9, 2.6, 4.1])
    spec = point_values(apply_spectral(limit_operator(), sample(prof, g)), xs)
    real = apply_L_realspace(prof, xs)
    np.testing.assert_allclose(real, spec, rtol=1e-4)


def test_realspace_linearity():
    xs = np.array([0.0, 1.1])
    a = apply_L_realspace(gaussian(1.0), xs)
    b = apply_L_realspace(gaussian(0.5), xs)
    g = GridSpec(1, 160.0, 4096)
    sp = point_values(apply_spectral(limit_operator(), 2.0 * sample(gaussian(1.0), g) - 3.0 * sample(gaussian(0.5), g)), xs)
    np.testing.assert_allclose(2 * a - 3 * b, sp, rtol=1e-4, atol=1e-4)


def test_realspace_rejects_sampled_fields(gauss1):
    with pytest.raises(TypeError):
        apply_L_realspace(gauss1, 0.0)


def test_first_variation_zero_and_quadratic(gauss1, grid1):
    z = Field(grid1, np.zeros(grid1.shape))
    r = first_variation_check(limit_operator(), z, gauss1)
    assert r["difference_quotient"] == 0.0 and r["pairing"] == 0.0 and r["pass"]
    r = first_variation_check(limit_operator(), gauss1, gauss1)
    assert r["relative_gap"] <= 1e-9


@pytest.mark.parametrize("spec", [rate_operator(0.9), rate_operator(0.6), limit_operator()])
def test_first_variation_mixed(spec, gauss1, grid1):
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        phi = sample(smooth_bump(0.5), grid1)
    for eps in (1e-6, 1e-4, 1e-2):
        assert first_variation_check(spec, gauss1, phi, eps)["relative_gap"] <= 1e-8


def test_first_variation_eps_range(gauss1):
    with pytest.raises(ValueError):
        first_variation_check(limit_operator(), gauss1, gauss1, eps=0.1)

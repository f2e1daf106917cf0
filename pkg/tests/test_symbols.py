import math

import mpmath as mp
import numpy as np
import pytest
from scipy.special import gamma, j0

from fracrate import symbols as sym
from fracrate.symbols import (
    LIMIT,
    Constants,
    PrecisionError,
    L_symbol,
    angular_average,
    build_table,
    check_m_bounds,
    cos_tail,
    defect_multiplier,
    frac_constant,
    limit_symbol,
    m_multiplier,
    phi_s,
    rate_symbol,
    rate_symbol_naive,
    sigma_factor,
    tail_T,
    unit_ball_volume,
)

DIMS = (1, 2, 3)


def test_unit_ball_volume():
    assert unit_ball_volume(1) == 2.0
    assert unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-15)
    assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0, abs=1e-15)
    with pytest.raises(ValueError):
        unit_ball_volume(4)


def test_constants_lambda_floor():
    c = Constants.for_dimension(2)
    assert c.lambda_default == pytest.approx(8 * 2 * math.pi)
    with pytest.raises(ValueError):
        Constants.for_dimension(2, lam=1.0)


@pytest.mark.parametrize("N", DIMS)
@pytest.mark.parametrize("s", [0.05, 0.3, 0.5, 0.75, 0.9, 0.999])
def test_frac_constant_gamma_formula(N, s):
    ref = s * 4 ** s * gamma(N / 2 + s) / (math.pi ** (N / 2) * gamma(1 - s))
    assert frac_constant(N, s) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("N", DIMS)
def test_normalization_limit(N):
    # C(N,s)/(1-s) -> 4/omega_N and sigma_{N,s} -> 1
    w = unit_ball_volume(N)
    dev = [abs(frac_constant(N, s) / (1 - s) * w / 4 - 1) for s in (0.9, 0.99, 0.999, 0.9999)]
    assert all(a > b for a, b in zip(dev, dev[1:]))
    assert sigma_factor(N, 0.9999) == pytest.approx(1.0, rel=1e-3)


def test_angular_average_2d_bessel():
    rho = np.linspace(0.0, 60.0, 301)
    got = angular_average(2, rho, "omc")
    np.testing.assert_allclose(got, 2 * math.pi * (2 - 2 * j0(rho)), atol=1e-11)
    got = angular_average(2, rho, "g")
    np.testing.assert_allclose(got, 2 * math.pi * (rho ** 2 / 2 - 2 + 2 * j0(rho)), atol=1e-10)


@pytest.mark.parametrize("kind", ["g", "omc", "cos"])
def test_angular_average_3d_closed_form_vs_quadrature(kind):
    rho = np.concatenate([np.linspace(1e-3, 0.6, 40), np.linspace(0.6, 50, 80)])
    a = angular_average(3, rho, kind)
    b = angular_average(3, rho, kind, method="quadrature")
    assert np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))) <= 1e-10


def _tail_oracle(N, s, xi):
    s = mp.mpf(s)
    with mp.workdps(25):
        if N == 1:
            osc = 2 * mp.quadosc(lambda r: mp.cos(xi * r) * r ** (-1 - 2 * s), [1, mp.inf], omega=xi)
            return float(2 * (2 / (2 * s)) - 2 * osc)
        osc = mp.quadosc(lambda r: mp.besselj(0, xi * r) * r ** (-1 - 2 * s), [1, mp.inf], period=2 * mp.pi / xi)
        return float(2 * mp.pi * (2 / (2 * s) - 2 * osc))


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("s", [0.3, 0.75, 1.0])
@pytest.mark.parametrize("xi", [0.4, 3.0])
def test_tail_vs_mpmath(N, s, xi):
    assert tail_T(N, s, xi) == pytest.approx(_tail_oracle(N, s, xi), rel=1e-11)


def test_m_small_xi_series():
    # m(xi) ~ xi^4 int_B |nu_1 h|^4/(12 |h|^(N+2)) for small xi; N = 1: xi^4 / 12
    xi = 1e-3
    assert m_multiplier(1, xi) == pytest.approx(xi ** 4 / 12, rel=1e-5)


@pytest.mark.parametrize("N", DIMS)
def test_m_nonnegative_and_radial(N):
    xi = np.logspace(-3, 2.5, 80)
    assert np.all(m_multiplier(N, xi) >= -1e-13)
    assert m_multiplier(N, 0.0) == 0.0


@pytest.mark.parametrize("N", DIMS)
def test_limit_scaling_law(N):
    # M_inf(c xi) = c^2 (M_inf(xi) + omega_N |xi|^2 log c)
    w = unit_ball_volume(N)
    xi = np.array([0.01, 0.3, 1.7, 9.0, 80.0])
    ref = xi ** 2 * (limit_symbol(N, 1.0) + w * np.log(xi))
    np.testing.assert_allclose(limit_symbol(N, xi), ref, rtol=1e-11, atol=1e-15)


@pytest.mark.parametrize("N", DIMS)
@pytest.mark.parametrize("c", [2.0, 10.0])
def test_phi_homogeneity(N, c):
    xi = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(phi_s(N, 0.7, c * xi), c ** 1.4 * phi_s(N, 0.7, xi), rtol=1e-12)


@pytest.mark.parametrize("N", DIMS)
@pytest.mark.parametrize("s", [0.6, 0.9, 0.99, 0.9999])
def test_rate_symbol_vs_extended_precision(N, s):
    for x in (0.05, 1.0, 7.0, 60.0):
        assert rate_symbol(N, s, x) == pytest.approx(rate_symbol_naive(N, s, x), rel=1e-9)


@pytest.mark.parametrize("N", DIMS)
@pytest.mark.parametrize("s", [0.6, 0.9, 0.99])
def test_rate_is_defect_minus_tail(N, s):
    xi = np.logspace(-2, 2, 25)
    np.testing.assert_allclose(defect_multiplier(N, s, xi) - tail_T(N, s, xi), rate_symbol(N, s, xi), rtol=1e-12)


@pytest.mark.parametrize("N", DIMS)
def test_rate_converges_to_limit(N):
    xi = np.array([0.2, 1.0, 5.0])
    gaps = [np.max(np.abs(rate_symbol(N, s, xi) - limit_symbol(N, xi))) for s in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_rate_precision_guard():
    with pytest.raises(PrecisionError):
        rate_symbol(1, 1 - 1e-7, 1.0)


@pytest.mark.parametrize("N", DIMS)
def test_L_symbol_identity(N):
    xi = np.logspace(-2, 2, 20)
    np.testing.assert_allclose(L_symbol(N, xi), 2 * (m_multiplier(N, xi) - tail_T(N, 1.0, xi)), rtol=1e-10)
    assert L_symbol(N, 0.0) == 0.0


def test_cos_tail_at_zero():
    assert cos_tail(3, 0.75, 0.0) == pytest.approx(3 * unit_ball_volume(3) / 1.5)


def test_table_columns_and_csv(tmp_path):
    tab = build_table(2, 0.8, [0.0, 0.5, 2.0])
    rows = tab.rows()
    assert rows[0][1:4] == (0.0, 0.0, 0.0)
    path = tmp_path / "t.csv"
    tab.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "xi,phi_s,m,tail_T,cos_tail,rate_M,limit_M,L_symbol"
    assert len(lines) == 4
    lim = build_table(2, LIMIT, [1.0])
    assert lim.rate_M[0] == lim.limit_M[0]
    with pytest.raises(ValueError):
        build_table(1, 0.5, [])


@pytest.mark.parametrize("N", DIMS)
def test_bounds_corrected_form_holds(N):
    rep = check_m_bounds(N, [0.1, 0.5, 1, 2, 3, 5, 10, 50, 100])
    for r in rep["rows"]:
        if r["inequality"] != "lower_log":
            assert r["pass"], r


def test_literal_quartic_log_bound_fails_at_large_xi():
    # m grows like |xi|^2 log|xi|; a |xi|^4 lower bound cannot hold
    rep = check_m_bounds(1, [100.0])
    row = next(r for r in rep["rows"] if r["inequality"] == "lower_log")
    assert not row["pass"]
    assert row["m"] < row["bound"]


def test_bounds_reject_bad_grid():
    with pytest.raises(ValueError):
        check_m_bounds(1, [])

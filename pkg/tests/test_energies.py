import logging
import math

import mpmath as mp
import numpy as np
import pytest

from fracrate import energies as en
from fracrate.energies import (
    DEFINITION,
    FOURIER,
    REALSPACE,
    decompose_rate,
    domain_membership,
    gagliardo_direct,
    gagliardo_fourier,
    limit_functional,
    log_weighted_partial,
    rate_functional,
)
from fracrate.fields import GridSpec, default_grid, gaussian, sample
from fracrate.symbols import PrecisionError

S_GRID = (0.6, 0.75, 0.9, 0.99)
WIDE = GridSpec(1, 160.0, 4096)


def G_exact(s):
    """G_s of exp(-x^2/2) on the line: 2 sqrt(pi) Gamma(2-s) 4^(-s) / s."""
    s = mp.mpf(s)
    return 2 * mp.sqrt(mp.pi) * mp.gamma(2 - s) * mp.mpf(4) ** (-s) / s


@pytest.fixture(scope="module")
def wide_gauss():
    return sample(gaussian(1.0), WIDE)


@pytest.mark.parametrize("s", [0.2, 0.5, 0.75, 0.9, 0.97])
def test_direct_against_closed_form(gauss1, s):
    assert gagliardo_direct(gauss1, s) == pytest.approx(float(G_exact(s)), rel=1e-5)


@pytest.mark.parametrize("s", [0.5, 0.75, 0.9])
def test_fourier_against_closed_form(wide_gauss, s):
    assert gagliardo_fourier(wide_gauss, s) == pytest.approx(float(G_exact(s)), rel=3e-4)


def test_rate_and_limit_against_closed_form(wide_gauss):
    for s in (0.75, 0.9, 0.99):
        exact = float((G_exact(1) - G_exact(s)) / (1 - s))
        assert rate_functional(wide_gauss, s) == pytest.approx(exact, rel=2e-4)
    lim = float(mp.diff(G_exact, 1))
    assert limit_functional(wide_gauss) == pytest.approx(lim, rel=2e-5)
    assert limit_functional(wide_gauss, method=REALSPACE) == pytest.approx(lim, rel=2e-5)


def test_definition_matches_symbol(gauss1):
    for s in S_GRID:
        a = rate_functional(gauss1, s, method=FOURIER)
        b = rate_functional(gauss1, s, method=DEFINITION)
        assert a == pytest.approx(b, rel=1e-9)


def test_rate_precision_guard(gauss1):
    with pytest.raises(PrecisionError):
        rate_functional(gauss1, 1 - 1e-7)


@pytest.mark.parametrize("N", [1, 2])
def test_decomposition_identity_fourier(N):
    u = sample(gaussian(1.0), default_grid(N))
    for s in S_GRID + (1.0,):
        br = decompose_rate(u, s)
        assert br.identity_residual() <= 1e-10
        assert br.a_term == pytest.approx(-(N * {1: 2.0, 2: math.pi}[N] / s) * math.pi ** (N / 2), rel=1e-10)


def test_j_positive_and_monotone(gauss1, bump1):
    for u in (gauss1, bump1):
        js = [decompose_rate(u, s).j_term for s in S_GRID + (1.0,)]
        assert min(js) >= 0.0
        assert all(a <= b for a, b in zip(js, js[1:]))


def test_realspace_terms_track_fourier(wide_gauss):
    for s in (0.6, 0.9):
        f = decompose_rate(wide_gauss, s)
        r = decompose_rate(wide_gauss, s, method=REALSPACE)
        assert r.a_term == pytest.approx(f.a_term, rel=1e-12)
        assert r.b_term == pytest.approx(f.b_term, rel=5e-4)
        assert r.j_term == pytest.approx(f.j_term, rel=3e-4)
        assert r.identity_residual() <= 1e-12


def test_realspace_j_second_order_in_dx():
    errs = []
    for M in (1024, 2048, 4096):
        u = sample(gaussian(1.0), GridSpec(1, 80.0, M))
        f = decompose_rate(u, 0.9)
        errs.append(abs(decompose_rate(u, 0.9, method=REALSPACE).j_term / f.j_term - 1))
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_realspace_needs_1d():
    u = sample(gaussian(1.0), default_grid(2))
    with pytest.raises(ValueError):
        gagliardo_direct(u, 0.5)


def test_clamp_logs(caplog):
    with caplog.at_level(logging.INFO, logger="fracrate.energies"):
        assert en._clamp_j(-1e-12, 0.9) == 0.0
    assert "clamped" in caplog.text
    assert en._clamp_j(-1e-6, 0.9) == -1e-6


@pytest.mark.parametrize("N", [1, 2])
def test_pointwise_convergence(N, bump1):
    fields = [sample(gaussian(1.0), default_grid(N))] + ([bump1] if N == 1 else [])
    for u in fields:
        lim = limit_functional(u)
        gaps = [abs(rate_functional(u, s) - lim) for s in (0.9, 0.99, 0.999)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] <= 0.05 * gaps[0]


def test_quadratic_scaling(gauss1):
    for c in (-3.0, 0.5, 7.0):
        assert rate_functional(c * gauss1, 0.9) == pytest.approx(c * c * rate_functional(gauss1, 0.9), rel=1e-13)
        assert limit_functional(c * gauss1) == pytest.approx(c * c * limit_functional(gauss1), rel=1e-13)


@pytest.mark.parametrize("beta, member", [(1.4, False), (1.5, False), (1.6, True), (3.0, True), (10.0, True)])
def test_domain_membership(beta, member):
    v = domain_membership(beta, 1)
    assert v.is_member is member
    assert math.isfinite(v.log_weighted_integral) is member


def test_domain_integral_value():
    # N = 1, beta = 3: 2 int_0^inf r^2 log(1+r^2)(1+r^2)^-3 dr
    with mp.workdps(20):
        ref = float(2 * mp.quad(lambda r: r ** 2 * mp.log(1 + r * r) * (1 + r * r) ** -3, [0, 1, mp.inf]))
    assert domain_membership(3.0, 1).log_weighted_integral == pytest.approx(ref, rel=1e-10)
    assert domain_membership(10.0, 1).log_weighted_integral < domain_membership(3.0, 1).log_weighted_integral


def test_boundary_case_diverges():
    vals = [log_weighted_partial(1.5, 1, R) for R in (1e1, 1e3, 1e5, 1e7)]
    steps = np.diff(vals)
    # grows like log(R)^2: increments keep increasing
    assert np.all(steps > 0) and np.all(np.diff(steps) > 0)

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fracrate.quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    g_cancel,
    integrate_adaptive,
    integrate_batch,
    integrate_oscillatory_tail,
)


def test_config_validation():
    with pytest.raises(ValueError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureConfig(series_switch_radius=1.5)
    with pytest.raises(ValueError):
        QuadratureConfig(tail_truncation_radius=0.5)
    with pytest.raises(ValueError):
        QuadratureConfig(max_subdivisions=0)


@pytest.mark.parametrize("f, a, b, exact", [
    (np.sin, 0.0, math.pi, 2.0),
    (lambda x: np.exp(-x * x), -6.0, 6.0, math.sqrt(math.pi) * math.erf(6.0)),
    (np.sqrt, 0.0, 1.0, 2.0 / 3.0),
    (lambda x: 1.0 / (1.0 + x * x), 0.0, 1000.0, math.atan(1000.0)),
])
def test_adaptive_known_integrals(f, a, b, exact):
    r = integrate_adaptive(f, a, b)
    assert r.converged
    assert abs(r.value - exact) <= 1e-12 * max(1.0, abs(exact))


def test_adaptive_budget_exhaustion_is_reported():
    cfg = QuadratureConfig(max_subdivisions=3)
    r = integrate_adaptive(lambda x: np.sin(1.0 / x), 1e-3, 1.0, cfg)
    assert not r.converged


def test_batch_groups_problems():
    a = np.array([0.0, 1.0, 0.0])
    b = np.array([1.0, 2.0, math.pi])
    pid = np.array([0, 0, 1])
    v, e, n, ok = integrate_batch(lambda x, p: np.where(p[:, None] == 0, x, np.sin(x)), a, b, pid, 2)
    assert ok.all()
    np.testing.assert_allclose(v, [2.0, 2.0], rtol=1e-13)


def test_oscillatory_tail_zero_frequency_closed_forms():
    assert integrate_oscillatory_tail(2.0, 0.0).value == pytest.approx(0.5, abs=1e-15)
    assert integrate_oscillatory_tail(1.5, 0.0).value == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert integrate_oscillatory_tail(1.0, 0.0, kind="sin").value == 0.0


def _mp_tail(p, w, R, kind):
    trig = mp.cos if kind == "cos" else mp.sin
    with mp.workdps(30):
        return float(mp.quadosc(lambda r: trig(w * r) * r ** (-1 - p), [R, mp.inf], omega=w))


@pytest.mark.parametrize("p", [0.5, 1.2, 2.0, 2.8])
@pytest.mark.parametrize("w", [0.01, 0.7, 5.0, 60.0])
@pytest.mark.parametrize("kind", ["cos", "sin"])
def test_oscillatory_tail_vs_mpmath(p, w, kind):
    r = integrate_oscillatory_tail(p, w, 1.0, kind=kind)
    assert r.converged
    assert abs(r.value - _mp_tail(p, w, 1.0, kind)) <= 1e-12


def test_oscillatory_tail_offset_start():
    r = integrate_oscillatory_tail(1.0, 3.0, R=2.5)
    assert abs(r.value - _mp_tail(1.0, 3.0, 2.5, "cos")) <= 1e-12


def test_oscillatory_tail_rejects_bad_input():
    with pytest.raises(ValueError):
        integrate_oscillatory_tail(0.0, 1.0)
    with pytest.raises(ValueError):
        integrate_oscillatory_tail(1.0, 1.0, R=0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=1e-6, max_value=20.0))
def test_g_cancel_matches_extended_precision(t):
    with mp.workdps(40):
        ref = float(mp.mpf(t) ** 2 - 2 + 2 * mp.cos(mp.mpf(t)))
    got = float(g_cancel(t))
    assert abs(got - ref) <= 1e-14 * max(abs(ref), 1e-300) + (0.0 if t < 0.5 else 1e-15 * t * t)


def test_g_cancel_nonnegative_and_even():
    t = np.linspace(-30, 30, 20001)
    g = g_cancel(t)
    assert np.all(g >= 0.0)
    np.testing.assert_array_equal(g, g_cancel(-t))

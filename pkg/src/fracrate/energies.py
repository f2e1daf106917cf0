"""Gagliardo energies, the rate functional, its decomposition and its limit.

FOURIER methods are quadratic forms ``sum_k M(|xi_k|) |u_hat_k|^2 dxi^N``
with the multipliers of :mod:`fracrate.symbols`.  REALSPACE methods (N = 1)
work from lag sums ``C(h) = sum_x u(x + h) u(x) dx`` over grid shifts, which
is the literal double sum of the definitions, and never touch the symbols.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from . import symbols as sym
from .fields import GridSpec, dirichlet_energy, gradient, l2_norm_sq, to_spectrum
from .quadrature import DEFAULT_CONFIG, integrate_adaptive

__all__ = [
    "FOURIER",
    "REALSPACE",
    "DEFINITION",
    "EnergyBreakdown",
    "DomainVerdict",
    "grid_symbol",
    "quadratic_form",
    "gagliardo_fourier",
    "gagliardo_direct",
    "rate_functional",
    "decompose_rate",
    "limit_functional",
    "domain_membership",
    "log_weighted_partial",
]

log = logging.getLogger(__name__)

FOURIER = "FOURIER"
REALSPACE = "REALSPACE"
DEFINITION = "DEFINITION"

MAX_DIRECT_M = 8192
NEG_ZERO_CLAMP = 1e-10


def _method(m):
    m = str(m).upper()
    if m not in (FOURIER, REALSPACE, DEFINITION):
        raise ValueError(f"unknown method {m!r}")
    return m


# ---------------------------------------------------------------------------
# multipliers on a grid

@lru_cache(maxsize=64)
def _grid_symbol_cached(kind, grid, s, cfg):
    xi = grid.xi_mag
    N = grid.N
    if kind == "phi":
        out = sym.phi_s(N, s, xi, cfg)
    elif kind == "rate":
        out = sym.rate_symbol(N, s, xi, cfg)
    elif kind == "limit":
        out = sym.limit_symbol(N, xi, cfg)
    elif kind == "L":
        out = sym.L_symbol(N, xi, cfg)
    elif kind == "defect":
        out = sym.defect_multiplier(N, s, xi, cfg)
    elif kind == "m":
        out = sym.m_multiplier(N, xi, cfg)
    elif kind == "tail":
        out = sym.tail_T(N, s, xi, cfg)
    elif kind == "cos_tail":
        out = sym.cos_tail(N, s, xi, cfg)
    elif kind == "dirichlet":
        out = 0.5 * sym.unit_ball_volume(N) * xi ** 2
    elif kind == "frac_laplacian":
        out = xi ** (2.0 * s)
    else:
        raise ValueError(f"unknown symbol kind {kind!r}")
    out = np.array(out, dtype=float)
    out.setflags(write=False)
    return out


def grid_symbol(kind, grid, s=None, cfg=DEFAULT_CONFIG):
    """Multiplier ``kind`` evaluated at every wavevector of ``grid`` (cached)."""
    return _grid_symbol_cached(kind, grid, None if s is None else float(s), cfg)


def quadratic_form(u, multiplier):
    """``sum_k multiplier_k |u_hat_k|^2 dxi^N``."""
    g = u.grid
    return float(np.sum(multiplier * to_spectrum(u).power()) * g.dxi ** g.N)


# ---------------------------------------------------------------------------
# Gagliardo seminorm

def gagliardo_fourier(u, s, cfg=DEFAULT_CONFIG):
    """``G_s(u) = (1-s) sum phi_s(|xi|) |u_hat|^2 dxi^N``."""
    sym._check_s(s)
    return (1.0 - s) * quadratic_form(u, grid_symbol("phi", u.grid, s, cfg))


class _LagData:
    """Lag sums of a 1-D field over shifts h_j = j dx, j = 0..M/2."""

    def __init__(self, u):
        g = u.grid
        if g.N != 1:
            raise ValueError("real-space oracles are one-dimensional")
        if g.M > MAX_DIRECT_M:
            raise ValueError(f"M = {g.M} exceeds the O(M^2) oracle guard ({MAX_DIRECT_M})")
        v = np.asarray(u.values)
        J = g.M // 2
        # literal double sum, one shift at a time
        corr = np.array([np.dot(v, np.roll(v, -j)) for j in range(J + 1)]) * g.dx
        du = gradient(u, check=False)[0].values
        self.dx = g.dx
        self.h = g.dx * np.arange(J + 1)
        self.H = self.h[-1]
        self.corr = corr
        self.norm_sq = corr[0]
        self.grad_sq = float(np.dot(du, du) * g.dx)
        # defect N(h) = h^2 |u'|^2 - int |u(x+h) - u(x)|^2  (>= 0)
        self.defect = self.h ** 2 * self.grad_sq - (2.0 * corr[0] - 2.0 * corr)
        self.defect[0] = 0.0
        if abs(corr[-1]) > 1e-12 * corr[0]:
            log.warning("field overlaps its periodic image at lag L/2 (C = %.3e)", corr[-1])
        self._defect_spline = CubicSpline(self.h, self.defect)
        self._corr_spline = CubicSpline(self.h, corr)

    def _gl_cells(self, spline, lo, hi, expo, nodes=10):
        """``int_lo^hi spline(h) h^expo dh`` with Gauss-Legendre on grid cells."""
        if hi <= lo:
            return 0.0
        edges = self.h[(self.h > lo) & (self.h < hi)]
        edges = np.concatenate([[lo], edges, [hi]])
        x, w = np.polynomial.legendre.leggauss(nodes)
        a, b = edges[:-1, None], edges[1:, None]
        pts = 0.5 * (a + b) + 0.5 * (b - a) * x
        vals = spline(pts) * pts ** expo
        return float(np.sum(0.5 * (b - a)[:, 0] * (vals @ w)))

    def defect_integral(self, hi, expo):
        """``int_0^hi N(h) h^expo dh``.

        The first cell uses the quartic small-lag model ``N(h) = N(dx)(h/dx)^4``
        with a 16-panel midpoint rule; later cells use the cubic spline.
        """
        dx = self.dx
        cut = min(hi, dx)
        mids = (np.arange(16) + 0.5) * cut / 16
        first = float(np.sum(self.defect[1] * (mids / dx) ** 4 * mids ** expo) * cut / 16)
        return first + self._gl_cells(self._defect_spline, dx, hi, expo)

    def corr_integral(self, lo, expo):
        """``int_lo^H C(h) h^expo dh``; C vanishes beyond L/2 by assumption."""
        return self._gl_cells(self._corr_spline, lo, self.H, expo)


def gagliardo_direct(u, s, cfg=DEFAULT_CONFIG):
    """Real-space ``G_s(u)`` for a 1-D field, O(M^2).

    ``int |u(x+h)-u(x)|^2 dx = h^2 |u'|^2 - N(h)``; the ``h^2`` part is
    integrated exactly, the defect ``N(h) = O(h^4)`` numerically, and lags
    beyond ``L/2`` contribute ``2 |u|^2`` each.
    """
    sym._check_s(s)
    lag = _LagData(u)
    H = lag.H
    near = lag.grad_sq * H ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s) - lag.defect_integral(H, -1.0 - 2.0 * s)
    far = lag.norm_sq * H ** (-2.0 * s) / s
    return (1.0 - s) * (2.0 * near + 2.0 * far)


# ---------------------------------------------------------------------------
# rate functional and decomposition

@dataclass(frozen=True)
class EnergyBreakdown:
    s: float
    a_term: float
    b_term: float
    j_term: float
    total: float
    method: str

    def identity_residual(self):
        return abs(self.total - (self.a_term + self.b_term + self.j_term)) / max(1.0, abs(self.total))


def _realspace_total(lag, s):
    """``(G_1 - G_s)/(1 - s)`` from lag sums, with the ``|u'|^2`` parts
    cancelled analytically: ``-|u'|^2 (H^(2-2s) - 1)/(1-s)``; ``s = 1`` gives
    the limit functional with ``-2 |u'|^2 log H``.
    """
    H, e = lag.H, 1.0 - s
    lnH = math.log(H)
    local = 2.0 * lnH if e == 0.0 else math.expm1(2.0 * e * lnH) / e
    return (-lag.grad_sq * local
            + 2.0 * lag.defect_integral(H, -1.0 - 2.0 * s)
            - 2.0 * lag.norm_sq * H ** (-2.0 * s) / s)


def rate_functional(u, s, cfg=DEFAULT_CONFIG, method=FOURIER):
    """``(G_1(u) - G_s(u)) / (1 - s)``.

    FOURIER sums the rate symbol; DEFINITION takes the quotient of the two
    seminorms literally; REALSPACE (N = 1) uses the lag-sum form of both
    seminorms.
    """
    method = _method(method)
    sym._check_rate_s(s)
    if method == FOURIER:
        return quadratic_form(u, grid_symbol("rate", u.grid, s, cfg))
    if method == DEFINITION:
        return (dirichlet_energy(u) - gagliardo_fourier(u, s, cfg)) / (1.0 - s)
    return _realspace_total(_LagData(u), s)


def _clamp_j(j, s):
    if -NEG_ZERO_CLAMP <= j < 0.0:
        log.info("clamped j_term %.3e to 0 at s = %g", j, s)
        return 0.0
    return j


def _realspace_breakdown(lag, s):
    w = sym.unit_ball_volume(1)
    expo = -1.0 - 2.0 * s
    a = -(w / s) * lag.norm_sq
    # both half-lines |h| > 1
    b = 2.0 * 2.0 * lag.corr_integral(1.0, expo)
    j = _clamp_j(2.0 * lag.defect_integral(1.0, expo), s)
    return EnergyBreakdown(s, a, b, j, _realspace_total(lag, s), REALSPACE)


def decompose_rate(u, s, cfg=DEFAULT_CONFIG, method=FOURIER):
    """Split the rate functional into ``a + b + j``.

    * ``a = -(N omega_N / s) |u|^2``
    * ``b = 2 int_{|h|>1} int u(x+h) u(x) / |h|^(N+2s)``
    * ``j = int_{|h|<1} int (|grad u . h|^2 - |u(x+h) - u(x)|^2) / |h|^(N+2s) >= 0``

    Each term is computed on its own (multipliers ``cos_tail`` and
    ``defect_multiplier`` in FOURIER, lag sums in REALSPACE) and ``total``
    comes from the functional itself, so ``identity_residual`` is a real
    check.  ``s = 1`` decomposes the limit functional.
    """
    method = _method(method)
    if s != 1.0:
        sym._check_rate_s(s)
    if method == REALSPACE:
        return _realspace_breakdown(_LagData(u), s)
    g = u.grid
    w = sym.unit_ball_volume(g.N)
    a = -(g.N * w / s) * l2_norm_sq(u)
    b = 2.0 * quadratic_form(u, grid_symbol("cos_tail", g, s, cfg))
    j = _clamp_j(quadratic_form(u, grid_symbol("defect", g, s, cfg)), s)
    if s == 1.0:
        total = limit_functional(u, cfg)
    else:
        total = rate_functional(u, s, cfg, method)
    return EnergyBreakdown(s, a, b, j, total, method)


def limit_functional(u, cfg=DEFAULT_CONFIG, method=FOURIER):
    """The s -> 1 limit of the rate functional.

    FOURIER sums ``m - tail_T(s=1)``; REALSPACE (N = 1) uses the lag-sum
    form at s = 1.
    """
    method = _method(method)
    if method == REALSPACE:
        return _realspace_total(_LagData(u), 1.0)
    if method == DEFINITION:
        raise ValueError("the limit functional has no difference-quotient form")
    return quadratic_form(u, grid_symbol("limit", u.grid, None, cfg))


# ---------------------------------------------------------------------------
# domain of the limit functional

@dataclass(frozen=True)
class DomainVerdict:
    is_member: bool
    log_weighted_integral: float
    h1_integral: float


def _radial_weight(N, beta):
    S = N * sym.unit_ball_volume(N)

    def f(r):
        r = np.asarray(r, dtype=float)
        return S * r ** (N + 1) * np.log1p(r * r) * (1.0 + r * r) ** (-beta)

    return f


def log_weighted_partial(beta, N, R, cfg=DEFAULT_CONFIG):
    """``int_{|xi| < R} |xi|^2 log(1+|xi|^2) (1+|xi|^2)^(-beta) d xi``."""
    f = _radial_weight(N, beta)
    nodes = [x for x in np.geomspace(1.0, R, max(2, int(math.log2(max(R, 2.0))) + 1)) if x < R]
    return integrate_adaptive(f, 0.0, R, cfg, breakpoints=nodes).value


def domain_membership(beta, N, cfg=DEFAULT_CONFIG):
    """Classify ``spectral_decay(beta)`` against the log-weighted H^1 condition.

    The radial integrand behaves like ``2 r^(N+1-2 beta) log r`` at infinity,
    so the integral is finite iff ``beta > (N+2)/2``; finite values are
    computed by quadrature on ``[0, 1]`` and, after ``r = 1/t``, on
    ``(0, 1]``.
    """
    S = N * sym.unit_ball_volume(N)
    decay = N + 1 - 2.0 * beta
    if decay >= -1.0:
        return DomainVerdict(False, math.inf, math.inf)
    f = _radial_weight(N, beta)
    head = integrate_adaptive(f, 0.0, 1.0, cfg).value
    tail = integrate_adaptive(lambda t: f(1.0 / t) / (t * t), 0.0, 1.0, cfg).value

    def h1(r):
        return S * r ** (N + 1) * (1.0 + r * r) ** (-beta)

    h1_val = (integrate_adaptive(h1, 0.0, 1.0, cfg).value
              + integrate_adaptive(lambda t: h1(1.0 / t) / (t * t), 0.0, 1.0, cfg).value)
    return DomainVerdict(True, head + tail, h1_val)

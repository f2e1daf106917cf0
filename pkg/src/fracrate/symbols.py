"""Fourier multipliers of the fractional energies and their limits.

Every symbol here is radial, so all ``N``-dimensional integrals reduce to a
radial integral of an angular average ``A(rho) = int_{S^{N-1}} f(rho nu_1)``:
exact for N = 1 (two-point sphere), closed form for N = 3, and a periodic
trapezoid rule in the polar angle for N = 2.

Conventions (unitary Fourier transform, ``u_hat(xi) = (2 pi)^(-N/2) int e^{-i x xi} u``):

* ``G_s(u)   = (1 - s) int phi_s(|xi|) |u_hat|^2``
* ``G_1(u)   = (omega_N / 2) int |xi|^2 |u_hat|^2``
* rate functional ``(G_1 - G_s)/(1 - s) = int M_s(|xi|) |u_hat|^2``
* limit functional ``int M_inf(|xi|) |u_hat|^2`` with ``M_inf = m - tail_T(s=1)``

The constant ``1/C(N,s) = int (1 - cos h_1)/|h|^(N+2s) dh`` is assembled
from a regular one-dimensional integral plus the explicit singular part
``1/(4(1-s))``, so that the difference ``omega_N/2 - 2(1-s)/C(N,s)`` used by
the rate symbol is available without cancellation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureError,
    g_cancel,
    integrate_adaptive,
    integrate_batch,
    integrate_oscillatory_tail,
)

__all__ = [
    "LIMIT",
    "PrecisionError",
    "Constants",
    "SymbolTable",
    "unit_ball_volume",
    "frac_constant",
    "sigma_factor",
    "phi_s",
    "m_multiplier",
    "defect_multiplier",
    "tail_T",
    "cos_tail",
    "rate_symbol",
    "rate_symbol_naive",
    "limit_symbol",
    "L_symbol",
    "build_table",
    "check_m_bounds",
    "DEFAULT_PROBES",
]

LIMIT = "LIMIT"
S_MAX = 1.0 - 1e-6

DEFAULT_PROBES = tuple(float(x) for x in np.logspace(-2, 2, 9))


class PrecisionError(ValueError):
    """s too close to 1 for the rate symbol to carry meaningful digits."""


def unit_ball_volume(N):
    if N == 1:
        return 2.0
    if N == 2:
        return math.pi
    if N == 3:
        return 4.0 * math.pi / 3.0
    raise ValueError(f"dimension must be 1, 2 or 3, got {N}")


@dataclass(frozen=True)
class Constants:
    N: int
    omega_N: float
    sphere_measure: float
    lambda_default: float

    @classmethod
    def for_dimension(cls, N, lam=None):
        w = unit_ball_volume(N)
        lam_min = 8.0 * N * w
        if lam is None:
            lam = lam_min
        if lam < lam_min:
            raise ValueError(f"lambda must be >= 8 N omega_N = {lam_min}")
        return cls(N=N, omega_N=w, sphere_measure=N * w, lambda_default=lam)


def _check_s(s, allow_one=False):
    hi_ok = s <= 1.0 if allow_one else s < 1.0
    if not (s > 0.0 and hi_ok):
        raise ValueError(f"s must lie in (0, 1{']' if allow_one else ')'}, got {s}")


def _check_rate_s(s):
    _check_s(s)
    if s >= S_MAX:
        raise PrecisionError(
            f"s = {s} is within 1e-6 of 1; the rate symbol is not evaluated there")


# ---------------------------------------------------------------------------
# angular averages

def _omc(t):
    # 2 - 2 cos t, cancellation free
    return 4.0 * np.sin(0.5 * t) ** 2


_KERNELS = {
    "g": lambda t, cfg: g_cancel(t, cfg),
    "omc": lambda t, cfg: _omc(t),
    "cos": lambda t, cfg: np.cos(t),
}


def _n_angles(rho_max):
    n = int(rho_max + 12.0 * rho_max ** (1.0 / 3.0) + 48)
    return n + (-n) % 4


def _angular_trapezoid_2d(f, rho, cfg, chunk=1 << 21):
    """``int_0^{2 pi} f(rho cos theta) d theta`` by the periodic trapezoid rule."""
    rho = np.asarray(rho, dtype=float)
    flat = rho.ravel()
    out = np.empty_like(flat)
    n = _n_angles(float(np.max(np.abs(flat), initial=0.0)))
    # f is even, so a quarter period with endpoint weights suffices
    theta = np.linspace(0.0, 0.5 * math.pi, n // 4 + 1)
    w = np.full(theta.size, 2.0 * math.pi / n)
    w[0] *= 0.5
    w[-1] *= 0.5
    w *= 4.0
    c = np.cos(theta)
    step = max(1, chunk // theta.size)
    for i in range(0, flat.size, step):
        blk = flat[i:i + step]
        out[i:i + step] = f(blk[:, None] * c[None, :], cfg) @ w
    return out.reshape(rho.shape)


def _angular_gauss_3d(f, rho, cfg):
    """``2 pi int_{-1}^{1} f(rho mu) d mu`` by Gauss-Legendre (oracle route)."""
    rho = np.asarray(rho, dtype=float)
    n = _n_angles(float(np.max(np.abs(rho), initial=0.0)))
    mu, w = np.polynomial.legendre.leggauss(n)
    return 2.0 * math.pi * (f(rho[..., None] * mu, cfg) @ w)


def _series(rho, coeff, k0, cfg):
    """sum_{k>=k0} coeff(k) rho^(2k), summed to machine precision (rho < 1)."""
    r2 = rho * rho
    total = np.zeros_like(rho)
    power = r2 ** k0
    lead = None
    for k in range(k0, k0 + 40):
        term = coeff(k) * power
        total = total + term
        if lead is None:
            lead = np.abs(term) + 1e-300
        elif np.all(np.abs(term) <= np.finfo(float).eps * lead):
            break
        power = power * r2
    return total


def angular_average(N, rho, kind, cfg=DEFAULT_CONFIG, method="auto"):
    """Average ``int_{S^{N-1}} f(rho nu_1) dH^{N-1}(nu)`` for the kernels

    * ``"g"``   -- ``t^2 - 2 + 2 cos t``
    * ``"omc"`` -- ``2 - 2 cos t``
    * ``"cos"`` -- ``cos t``

    ``method="quadrature"`` forces angle quadrature also for N = 3; it is
    used to cross-check the closed forms.
    """
    rho = np.asarray(rho, dtype=float)
    f = _KERNELS[kind]
    if N == 1:
        return 2.0 * f(rho, cfg)
    if N == 2:
        return _angular_trapezoid_2d(f, rho, cfg)
    if N != 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {N}")
    if method == "quadrature":
        return _angular_gauss_3d(f, rho, cfg)

    r = np.abs(rho)
    small = r < cfg.series_switch_radius
    safe = np.where(small, 1.0, r)
    sinc = np.sin(safe) / safe
    if kind == "cos":
        # no cancellation here; numpy's sinc is exact at 0
        return 4.0 * math.pi * np.sinc(r / math.pi)
    if kind == "g":
        out = 2.0 * math.pi * (2.0 * r * r / 3.0 - 4.0 + 4.0 * sinc)
        coeff = lambda k: (-1) ** k * 4.0 / (math.factorial(2 * k) * (2 * k + 1))
        k0 = 2
    else:
        out = 8.0 * math.pi * (1.0 - sinc)
        coeff = lambda k: (-1) ** (k + 1) * 4.0 / math.factorial(2 * k + 1)
        k0 = 1
    if np.any(small):
        out = np.where(small, 2.0 * math.pi * _series(np.where(small, r, 0.0), coeff, k0, cfg), out)
    return out


# ---------------------------------------------------------------------------
# radial integrals

def _raise_if_failed(ok, what):
    if not np.all(ok):
        raise QuadratureError(f"quadrature did not converge for {what}")


def _radial_pieces(N, lo, hi, power, kind, cfg):
    """``int_lo^hi rho^power A_kind(rho) d rho`` for arrays of intervals."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def f(x, _pid):
        return x ** power * angular_average(N, x, kind, cfg)

    v, _, _, ok = integrate_batch(f, lo, hi, cfg=cfg)
    _raise_if_failed(ok, f"radial {kind} integral")
    return v


def _cumulative(N, anchor, targets, power, kind, cfg):
    """``int_anchor^t rho^power A_kind(rho) d rho`` for every ``t`` in targets."""
    targets = np.asarray(targets, dtype=float)
    nodes = np.unique(np.concatenate([targets.ravel(), [anchor]]))
    pieces = _radial_pieces(N, nodes[:-1], nodes[1:], power, kind, cfg)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    cum -= cum[np.searchsorted(nodes, anchor)]
    return cum[np.searchsorted(nodes, targets)]


# ---------------------------------------------------------------------------
# scalar building blocks, cached per (N, s, cfg)

@lru_cache(maxsize=256)
def _sphere_power(N, p, cfg):
    """``S_N(p) = int_{S^{N-1}} |nu_1|^p``."""
    if N == 1:
        return 2.0
    if N == 3:
        return 4.0 * math.pi / (p + 1.0)
    r = integrate_adaptive(lambda t: np.cos(t) ** p, 0.0, 0.5 * math.pi, cfg)
    _raise_if_failed([r.converged], "sphere power")
    return 4.0 * r.value


def _expm1_ratio(x, eps):
    """``expm1(eps x) / eps`` with the eps -> 0 limit."""
    if eps == 0.0:
        return x
    return np.expm1(eps * x) / eps


@lru_cache(maxsize=256)
def _sphere_defect(N, s, cfg):
    """``(omega_N - S_N(2s)) / (1 - s)``; finite as s -> 1."""
    if N == 1:
        return 0.0
    if N == 3:
        return -8.0 * math.pi / (3.0 * (2.0 * s + 1.0))
    e = 1.0 - s

    def f(t):
        c = np.cos(t)
        logc = np.log(np.where(c > 0, c, 1.0))
        return np.where(c > 0, -c * c * _expm1_ratio(-2.0 * logc, e), 0.0)

    r = integrate_adaptive(f, 0.0, 0.5 * math.pi, cfg)
    _raise_if_failed([r.converged], "sphere defect")
    return 4.0 * r.value


@lru_cache(maxsize=256)
def _kappa_reg(s, cfg):
    """``int_0^inf (1 - cos t) t^(-1-2s) dt - 1/(4(1-s))``.

    Split as ``-1/2 int_0^1 g(t) t^(-1-2s) + 1/(2s) - int_1^inf cos t t^(-1-2s)``.
    """
    r = integrate_adaptive(lambda t: g_cancel(t, cfg) * t ** (-1.0 - 2.0 * s), 0.0, 1.0, cfg)
    tail = integrate_oscillatory_tail(2.0 * s, 1.0, 1.0, cfg)
    _raise_if_failed([r.converged, tail.converged], "kappa")
    return -0.5 * r.value + 1.0 / (2.0 * s) - tail.value


@lru_cache(maxsize=256)
def _inner_g(N, s, cfg):
    """``int_0^1 rho^(-1-2s) A_g(rho) d rho`` = ``int_B g(h_1)/|h|^(N+2s)``."""
    return float(_radial_pieces(N, [0.0], [1.0], -1.0 - 2.0 * s, "g", cfg)[0])


@lru_cache(maxsize=256)
def _tail_unit(N, s, cfg):
    """``tail_T`` at ``|xi| = 1``: ``int_{|h|>1} (2 - 2 cos h_1)/|h|^(N+2s)``."""
    return (-0.5 * _sphere_defect(N, s, cfg)
            + 2.0 * _sphere_power(N, 2.0 * s, cfg) * _kappa_reg(s, cfg)
            + _inner_g(N, s, cfg))


@lru_cache(maxsize=256)
def _rate_constant(N, s, cfg):
    """``(omega_N/2 - 2(1-s)/C(N,s)) / (1-s)``, i.e. ``M_s`` at ``|xi| = 1``."""
    return 0.5 * _sphere_defect(N, s, cfg) - 2.0 * _sphere_power(N, 2.0 * s, cfg) * _kappa_reg(s, cfg)


# ---------------------------------------------------------------------------
# public symbols

def frac_constant(N, s, cfg=DEFAULT_CONFIG):
    """Normalisation ``C(N, s) = (int (1 - cos h_1)/|h|^(N+2s) dh)^(-1)``."""
    _check_s(s)
    inv = _sphere_power(N, 2.0 * s, cfg) * (_kappa_reg(s, cfg) + 0.25 / (1.0 - s))
    return 1.0 / inv


def sigma_factor(N, s, cfg=DEFAULT_CONFIG):
    """``4(1-s) / (omega_N C(N,s))``; tends to 1 as s -> 1."""
    return 4.0 * (1.0 - s) / (unit_ball_volume(N) * frac_constant(N, s, cfg))


def phi_s(N, s, xi_mag, cfg=DEFAULT_CONFIG):
    """``int (2 - 2 cos(xi.h))/|h|^(N+2s) dh = 2 |xi|^(2s) / C(N,s)``."""
    xi = np.asarray(xi_mag, dtype=float)
    return 2.0 * np.abs(xi) ** (2.0 * s) / frac_constant(N, s, cfg)


def _positive_unique(xi):
    xi = np.abs(np.asarray(xi, dtype=float))
    flat = xi.ravel()
    pos = flat[flat > 0]
    return xi, flat, np.unique(pos)


def defect_multiplier(N, s, xi_mag, cfg=DEFAULT_CONFIG):
    """``int_{B(0,1)} (|xi.h|^2 - 2 + 2cos(xi.h)) / |h|^(N+2s) dh`` for s in (0, 1].

    Evaluated as ``|xi|^(2s) int_0^{|xi|} rho^(-1-2s) A_g(rho) d rho``; array
    input is handled with one cumulative pass over the sorted distinct radii.
    This is the multiplier of the nonnegative singular part of the rate
    functional; at s = 1 it is ``m``.
    """
    _check_s(s, allow_one=True)
    xi, flat, uniq = _positive_unique(xi_mag)
    out = np.zeros_like(flat)
    if uniq.size:
        vals = uniq ** (2.0 * s) * _cumulative(N, 0.0, uniq, -1.0 - 2.0 * s, "g", cfg)
        pos = flat > 0
        out[pos] = vals[np.searchsorted(uniq, flat[pos])]
    return out.reshape(xi.shape) if xi.ndim else float(out[0])


def m_multiplier(N, xi_mag, cfg=DEFAULT_CONFIG):
    """``m(xi) = int_{B(0,1)} (|xi.h|^2 - 2 + 2cos(xi.h)) / |h|^(N+2) dh``."""
    return defect_multiplier(N, 1.0, xi_mag, cfg)


def tail_T(N, s, xi_mag, cfg=DEFAULT_CONFIG):
    """``int_{|h|>1} (2 - 2cos(xi.h)) / |h|^(N+2s) dh`` for s in (0, 1].

    Scaling gives ``|xi|^(2s) [tail_T(1) + int_{|xi|}^1 rho^(-1-2s) A_omc]``.
    """
    _check_s(s, allow_one=True)
    xi, flat, uniq = _positive_unique(xi_mag)
    out = np.zeros_like(flat)
    if uniq.size:
        inner = -_cumulative(N, 1.0, uniq, -1.0 - 2.0 * s, "omc", cfg)
        vals = uniq ** (2.0 * s) * (_tail_unit(N, s, cfg) + inner)
        pos = flat > 0
        out[pos] = vals[np.searchsorted(uniq, flat[pos])]
    return out.reshape(xi.shape) if xi.ndim else float(out[0])


def cos_tail(N, s, xi_mag, cfg=DEFAULT_CONFIG):
    """``int_{|h|>1} cos(xi.h) / |h|^(N+2s) dh = N omega_N/(2s) - tail_T/2``."""
    sphere = N * unit_ball_volume(N)
    return sphere / (2.0 * s) - 0.5 * tail_T(N, s, xi_mag, cfg)


def rate_symbol(N, s, xi_mag, cfg=DEFAULT_CONFIG):
    """Multiplier ``M_s`` of the rate functional ``(G_1 - G_s)/(1 - s)``.

    Split form: ``(omega_N/2)(|xi|^2 - |xi|^2s)/(1-s) + E_s |xi|^2s`` with
    ``E_s = (omega_N/2 - 2(1-s)/C(N,s))/(1-s)`` computed without cancellation.
    """
    _check_rate_s(s)
    xi = np.abs(np.asarray(xi_mag, dtype=float))
    w = unit_ball_volume(N)
    e = 1.0 - s
    with np.errstate(divide="ignore"):
        logxi = np.log(np.where(xi > 0, xi, 1.0))
    x2s = np.where(xi > 0, xi ** (2.0 * s), 0.0)
    local = 0.5 * w * x2s * np.expm1(2.0 * e * logxi) / e
    out = local + _rate_constant(N, s, cfg) * x2s
    return out if out.ndim else float(out)


def rate_symbol_naive(N, s, xi_mag, cfg=DEFAULT_CONFIG, dps=50):
    """Rate symbol from its definition, in extended precision (mpmath).

    Uses ``C(N,s)`` from :func:`frac_constant`; only the final subtraction is
    carried out with ``dps`` digits.  Slow; meant for cross-checks.
    """
    import mpmath as mp

    _check_rate_s(s)
    with mp.workdps(dps):
        C = mp.mpf(frac_constant(N, s, cfg))
        w = mp.mpf(unit_ball_volume(N))
        xs = mp.mpf(float(xi_mag))
        ss = mp.mpf(s)
        val = (w / 2 * xs ** 2 - (1 - ss) * 2 * xs ** (2 * ss) / C) / (1 - ss)
        return float(val)


def limit_symbol(N, xi_mag, cfg=DEFAULT_CONFIG):
    """``M_inf(xi) = m(xi) - tail_T(N, 1, xi)``."""
    return m_multiplier(N, xi_mag, cfg) - tail_T(N, 1.0, xi_mag, cfg)


def L_symbol(N, xi_mag, cfg=DEFAULT_CONFIG):
    """Symbol of the limit operator: ``-2 N omega_N + 4 cos_tail(1, xi) + 2 m(xi)``."""
    sphere = N * unit_ball_volume(N)
    return -2.0 * sphere + 4.0 * cos_tail(N, 1.0, xi_mag, cfg) + 2.0 * m_multiplier(N, xi_mag, cfg)


# ---------------------------------------------------------------------------
# tables

_TABLE_COLUMNS = ("xi", "phi_s", "m", "tail_T", "cos_tail", "rate_M", "limit_M", "L_symbol")


@dataclass(frozen=True)
class SymbolTable:
    """Tabulated multipliers over a set of wavenumber magnitudes.

    For ``s == LIMIT`` the s-dependent columns hold their s -> 1 values:
    ``tail_T``/``cos_tail`` at s = 1, ``rate_M = limit_M`` and ``phi_s``
    holds ``lim (1-s) phi_s = omega_N |xi|^2 / 2``.
    """

    constants: Constants
    s: object
    xi: np.ndarray
    phi_s: np.ndarray
    m: np.ndarray
    tail_T: np.ndarray
    cos_tail: np.ndarray
    rate_M: np.ndarray
    limit_M: np.ndarray
    L_symbol: np.ndarray
    cfg: object = field(default=DEFAULT_CONFIG, repr=False)

    def rows(self):
        cols = [getattr(self, c) for c in _TABLE_COLUMNS]
        return [tuple(float(c[i]) for c in cols) for i in range(self.xi.size)]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(_TABLE_COLUMNS)
            for row in self.rows():
                w.writerow([f"{v:.12g}" for v in row])


def build_table(N, s, xi_grid=None, cfg=DEFAULT_CONFIG):
    """Tabulate every multiplier at the magnitudes ``xi_grid``."""
    consts = Constants.for_dimension(N)
    xi = np.asarray(DEFAULT_PROBES if xi_grid is None else xi_grid, dtype=float).ravel()
    if xi.size == 0:
        raise ValueError("xi grid is empty")
    if np.any(~np.isfinite(xi)) or np.any(xi < 0):
        raise ValueError("xi grid must be finite and non-negative")
    m = m_multiplier(N, xi, cfg)
    t1 = tail_T(N, 1.0, xi, cfg)
    limit_M = m - t1
    Lsym = L_symbol(N, xi, cfg)
    if s == LIMIT:
        ts, ct = t1, cos_tail(N, 1.0, xi, cfg)
        ph = 0.5 * consts.omega_N * xi ** 2
        rate = limit_M
    else:
        ts = tail_T(N, s, xi, cfg)
        ct = consts.sphere_measure / (2.0 * s) - 0.5 * ts
        ph = phi_s(N, s, xi, cfg)
        rate = rate_symbol(N, s, xi, cfg)
    return SymbolTable(consts, s, xi, ph, m, ts, ct, rate, limit_M, Lsym, cfg)


# ---------------------------------------------------------------------------
# explicit bounds on m

def _bounds_for(N, xi, mval):
    S = N * unit_ball_volume(N)
    out = []
    if xi <= 2:
        out.append(("upper_quartic", "<=", S / 24.0 * xi ** 4))
    else:
        out.append(("upper_log", "<=", S * xi ** 2 * (1.0 / 6.0 + math.log(xi))))
    if xi < 3:
        out.append(("lower_quartic", ">=", S / 768.0 * xi ** 4))
    else:
        out.append(("lower_log", ">=",
                    S / 768.0 * xi ** 4 + 5.0 / 36.0 * S * xi ** 2 * (math.log(xi) - math.log(3.0))))
        # the B(0,3) piece of the same argument only supplies 3^2 |xi|^2 / 768
        out.append(("lower_log_ball3", ">=",
                    S / 768.0 * 9.0 * xi ** 2 + 5.0 / 36.0 * S * xi ** 2 * (math.log(xi) - math.log(3.0))))
    return out


def check_m_bounds(N, xi_grid, cfg=DEFAULT_CONFIG, tol=1e-8):
    """Test the explicit upper/lower bounds on ``m`` at every ``xi``.

    Returns a dict with one row per (xi, inequality): the value of ``m``, the
    bound, the signed margin (positive = satisfied) and a pass flag.  The
    ``lower_log`` row is the bound exactly as written (with ``|xi|^4/768``);
    ``lower_log_ball3`` is the version the ball-of-radius-3 estimate yields.
    """
    xi = np.asarray(xi_grid, dtype=float).ravel()
    if xi.size == 0 or np.any(xi <= 0):
        raise ValueError("xi grid must be non-empty and positive")
    mvals = np.atleast_1d(m_multiplier(N, xi, cfg))
    rows = []
    for x, mv in zip(xi, mvals):
        for name, sense, bound in _bounds_for(N, float(x), float(mv)):
            margin = bound - mv if sense == "<=" else mv - bound
            rows.append({
                "N": N, "xi": float(x), "inequality": name, "sense": sense,
                "m": float(mv), "bound": float(bound), "margin": float(margin),
                "pass": bool(margin >= -tol * max(1.0, abs(bound))),
            })
    return {"N": N, "rows": rows, "all_pass": all(r["pass"] for r in rows)}

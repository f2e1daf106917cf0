"""Fractional Laplacian, rate operator and the limit operator.

Every operator here is a Fourier multiplier and is applied spectrally.  The
limit operator also has a real-space singular-integral form (N = 1), kept
as an independent oracle for the spectral path.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import symbols as sym
from .energies import grid_symbol, limit_functional, rate_functional
from .fields import Field, Profile, Spectrum, to_field, to_spectrum
from .quadrature import QuadratureConfig, QuadratureError, integrate_adaptive

__all__ = [
    "FRAC_LAPLACIAN",
    "RATE_OPERATOR",
    "LIMIT_OPERATOR",
    "OperatorSpec",
    "frac_laplacian",
    "rate_operator",
    "limit_operator",
    "operator_symbol",
    "apply_symbol",
    "apply_spectral",
    "pairing",
    "point_values",
    "apply_L_realspace",
    "first_variation_check",
]

FRAC_LAPLACIAN = "FRAC_LAPLACIAN"
RATE_OPERATOR = "RATE_OPERATOR"
LIMIT_OPERATOR = "LIMIT_OPERATOR"

# the real-space oracle only needs ~1e-4; the defaults would chase roundoff
ORACLE_CONFIG = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-10)
# below this lag the second difference is replaced by its linear model
INNER_CUTOFF = 1e-2


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    s: float | None = None
    constants: sym.Constants | None = None

    def __post_init__(self):
        if self.kind not in (FRAC_LAPLACIAN, RATE_OPERATOR, LIMIT_OPERATOR):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == LIMIT_OPERATOR:
            if self.s is not None:
                raise ValueError("the limit operator takes no s")
        elif self.s is None:
            raise ValueError(f"{self.kind} needs s")
        else:
            object.__setattr__(self, "s", float(self.s))
            sym._check_s(self.s, allow_one=self.kind == FRAC_LAPLACIAN)

    @property
    def label(self):
        return "limit" if self.kind == LIMIT_OPERATOR else f"{self.kind.lower()}(s={self.s:g})"


def frac_laplacian(s):
    return OperatorSpec(FRAC_LAPLACIAN, s)


def rate_operator(s):
    return OperatorSpec(RATE_OPERATOR, s)


def limit_operator():
    return OperatorSpec(LIMIT_OPERATOR)


def operator_symbol(spec, grid, cfg=sym.DEFAULT_CONFIG):
    """Multiplier of ``spec`` on the wavevectors of ``grid``."""
    if spec.kind == FRAC_LAPLACIAN:
        return grid_symbol("frac_laplacian", grid, spec.s, cfg)
    if spec.kind == RATE_OPERATOR:
        sym._check_rate_s(spec.s)
        return 2.0 * grid_symbol("rate", grid, spec.s, cfg)
    return grid_symbol("L", grid, None, cfg)


def apply_symbol(multiplier, u):
    """Multiply the coefficients of ``u`` by ``multiplier`` and transform back."""
    spec = to_spectrum(u)
    return to_field(Spectrum(u.grid, multiplier * spec.coeffs))


def apply_spectral(spec, u, cfg=sym.DEFAULT_CONFIG):
    return apply_symbol(operator_symbol(spec, u.grid, cfg), u)


def pairing(f, g):
    """Real-space ``<f, g> = sum f g dx^N``."""
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return float(np.sum(f.values * g.values) * f.grid.dx ** f.grid.N)


def point_values(u, x):
    """Trigonometric interpolant of ``u`` at arbitrary points.

    ``x`` has shape ``(..., N)`` (or ``(...)`` when N = 1).
    """
    g = u.grid
    c = to_spectrum(u).coeffs.ravel()
    pts = np.asarray(x, dtype=float)
    if g.N == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    flat = pts.reshape(-1, g.N)
    ks = np.stack([w.ravel() for w in g.wavevectors()], axis=-1)
    scale = (2.0 * math.pi) ** (g.N / 2.0) / g.L ** g.N
    vals = (np.exp(1j * flat @ ks.T) @ c).real * scale
    return vals.reshape(pts.shape[:-1])


# ---------------------------------------------------------------------------
# real-space limit operator

def _L_point_1d(phi, x, cfg):
    w = sym.unit_ball_volume(1)
    f0 = float(phi.value(np.array([x])))
    f2 = float(phi.hess(np.array([x]))[0, 0])

    def inner(h):
        h = np.asarray(h, dtype=float)
        xp = np.stack([x + h], axis=-1)
        xm = np.stack([x - h], axis=-1)
        return (2.0 * f0 - phi.value(xm) - phi.value(xp) + h * h * f2) / h ** 3

    # the integrand is odd-order small: f(h) = O(h); linear model below h_c
    hc = INNER_CUTOFF
    head = float(inner(np.array([hc]))[0]) * hc / 2.0
    res_in = integrate_adaptive(inner, hc, 1.0, cfg)

    R = phi.effective_radius() + abs(x)
    res_out = None
    outer_val = 0.0
    if R > 1.0:
        def outer(h):
            h = np.asarray(h, dtype=float)
            return (phi.value((x + h)[..., None]) + phi.value((x - h)[..., None])) / h ** 3

        r = phi.effective_radius()
        brk = [b for b in (abs(x), abs(x) - r, abs(x) + r) if 1.0 < b < R]
        res_out = integrate_adaptive(outer, 1.0, R, cfg, breakpoints=brk)
        outer_val = res_out.value
    for res in (res_in, res_out):
        if res is not None and not res.converged:
            raise QuadratureError("real-space limit operator did not converge", res)
    # -2 N w phi + 4 int_{|h|>1} phi(x+h)/|h|^3 - 2 int_{|h|<1} (...)/|h|^3, both sides of 0
    return -2.0 * w * f0 + 4.0 * outer_val - 4.0 * (head + res_in.value)


def apply_L_realspace(phi, x, cfg=ORACLE_CONFIG):
    """Limit operator applied to an analytic 1-D profile at point(s) ``x``.

    The inner ball uses the second difference corrected by the exact
    Hessian, which is ``O(h^4)`` and leaves an integrable ``O(h)`` kernel.
    The outer integral stops at the profile's effective radius plus ``|x|``.
    """
    if not isinstance(phi, Profile):
        raise TypeError("apply_L_realspace needs an analytic Profile")
    xs = np.asarray(x, dtype=float)
    if xs.ndim > 1 and xs.shape[-1] != 1:
        raise NotImplementedError("the real-space limit operator is one-dimensional")
    flat = xs.reshape(-1)
    out = np.array([_L_point_1d(phi, float(p), cfg) for p in flat])
    return out.reshape(xs.shape[:1] if xs.ndim > 1 else xs.shape) if xs.ndim else float(out[0])


# ---------------------------------------------------------------------------
# first variation

def _energy_of(spec, cfg):
    if spec.kind == RATE_OPERATOR:
        return lambda v: rate_functional(v, spec.s, cfg)
    if spec.kind == LIMIT_OPERATOR:
        return lambda v: limit_functional(v, cfg)
    raise ValueError("first variations are defined for the rate and limit energies")


def first_variation_check(spec, u, phi, eps=1e-3, cfg=sym.DEFAULT_CONFIG, tol=1e-8):
    """Central difference of the energy against ``<Op u, phi>``.

    The difference quotient sums energies on the Fourier side; the pairing
    applies the operator and integrates in real space.
    """
    if not 1e-6 <= eps <= 1e-2:
        raise ValueError("eps must lie in [1e-6, 1e-2]")
    E = _energy_of(spec, cfg)
    dq = (E(u + eps * phi) - E(u - eps * phi)) / (2.0 * eps)
    pair = pairing(apply_spectral(spec, u, cfg), phi)
    scale = max(abs(dq), abs(pair))
    gap = 0.0 if scale == 0.0 else abs(dq - pair) / scale
    return {
        "operator": spec.label,
        "eps": eps,
        "difference_quotient": dq,
        "pairing": pair,
        "relative_gap": gap,
        "tolerance": tol,
        "pass": bool(gap <= tol),
    }


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True,
                      default=lambda o: o.item() if isinstance(o, np.generic) else str(o))

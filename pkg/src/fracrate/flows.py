"""Exact spectral gradient flows of the rate and limit energies.

Both flows are linear and diagonal in Fourier space, so every mode evolves
as ``u_hat(t) = exp(-sigma t) u_hat(0)`` with ``sigma`` the operator symbol;
there is no time stepping anywhere.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import symbols as sym
from .fields import Field, Spectrum, to_field, to_spectrum, write_csv
from .operators import LIMIT_OPERATOR, RATE_OPERATOR, OperatorSpec, limit_operator, operator_symbol, rate_operator

__all__ = [
    "FlowOverflowError",
    "FlowSpec",
    "Trajectory",
    "evolve",
    "trajectory_distance",
    "dissipation_audit",
    "convergence_study",
    "ConvergenceTable",
]

EXP_LIMIT = 700.0


class FlowOverflowError(ArithmeticError):
    """A growing mode would overflow ``exp`` over the horizon."""


@dataclass(frozen=True)
class FlowSpec:
    operator: OperatorSpec
    T: float
    sample_times: tuple = (0.0,)

    def __post_init__(self):
        if self.operator.kind not in (RATE_OPERATOR, LIMIT_OPERATOR):
            raise ValueError("flows are defined for the rate and limit operators")
        if self.operator.kind == RATE_OPERATOR:
            s = self.operator.s
            if not 0.5 < s < sym.S_MAX:
                raise sym.PrecisionError(f"rate flows need s in (1/2, 1 - 1e-6), got {s}")
        if not self.T > 0:
            raise ValueError("horizon T must be positive")
        ts = tuple(float(t) for t in self.sample_times)
        if not ts or ts[0] != 0.0:
            raise ValueError("sample_times must start at 0")
        if any(b <= a for a, b in zip(ts, ts[1:])) or ts[-1] > self.T:
            raise ValueError("sample_times must be strictly ascending inside [0, T]")
        object.__setattr__(self, "sample_times", ts)
        object.__setattr__(self, "T", float(self.T))


@dataclass(frozen=True, eq=False)
class Trajectory:
    spec: FlowSpec
    initial: Field
    snapshots: tuple
    energies: tuple
    dissipation: tuple
    symbol: np.ndarray = field(repr=False)
    growth: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.initial.grid

    @property
    def times(self):
        return self.spec.sample_times

    def field_at(self, i):
        u0 = self.initial
        return to_field(self.snapshots[i], u0.support_radius, u0.support_tol)

    def time_derivative(self, i):
        """Exact ``u_t`` coefficients at sample ``i``: ``-sigma u_hat``."""
        return -self.symbol * self.snapshots[i].coeffs

    def l2_norms(self):
        w = self.grid.dxi ** self.grid.N
        return [math.sqrt(float(np.sum(sp.power()) * w)) for sp in self.snapshots]

    def boundary_leaks(self):
        """Largest ``|u(t)|`` outside the initial support ball, per sample."""
        return [self.field_at(i).boundary_max() for i in range(len(self.snapshots))]

    def energy_monotone(self, slack=1e-10):
        e = self.energies
        tol = slack * (1.0 + abs(e[0]))
        return all(b <= a + tol for a, b in zip(e, e[1:]))

    def summary_rows(self):
        leaks = self.boundary_leaks()
        norms = self.l2_norms()
        return [(t, e, d, n, b) for t, e, d, n, b in
                zip(self.times, self.energies, self.dissipation, norms, leaks)]

    def export(self, directory):
        """One field CSV per sample time plus ``summary.csv``."""
        os.makedirs(directory, exist_ok=True)
        for i in range(len(self.snapshots)):
            write_csv(self.field_at(i), os.path.join(directory, f"field_{i:03d}.csv"))
        path = os.path.join(directory, "summary.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "energy", "dissipation", "l2_norm", "boundary_leak"])
            for row in self.summary_rows():
                w.writerow([f"{v:.12g}" for v in row])
        return path


def _quadratic(symbol, power, dxi_n):
    return float(np.sum(symbol * power) * dxi_n)


def evolve(spec, u0, cfg=sym.DEFAULT_CONFIG):
    """Sample the exact flow ``u_t = -Op u`` at ``spec.sample_times``.

    Modes with a negative symbol grow; the largest growth factor per unit
    time is reported in ``growth`` together with the ``exp(4 N omega_N t)``
    reference rate.  Raises :class:`FlowOverflowError` when a growing mode
    would exceed ``exp(700)`` over the horizon.
    """
    g = u0.grid
    sigma = operator_symbol(spec.operator, g, cfg)
    worst = float(max(0.0, -np.min(sigma)))
    if spec.T * worst > EXP_LIMIT:
        raise FlowOverflowError(f"T * max(-sigma) = {spec.T * worst:.3g} exceeds {EXP_LIMIT}")
    c0 = to_spectrum(u0).coeffs
    dxi_n = g.dxi ** g.N
    snaps, energies, diss = [], [], []
    for t in spec.sample_times:
        c = np.exp(-sigma * t) * c0
        p = np.abs(c) ** 2
        snaps.append(Spectrum(g, c))
        energies.append(0.5 * _quadratic(sigma, p, dxi_n))
        diss.append(_quadratic(sigma * sigma, p, dxi_n))
    ref = 4.0 * g.N * sym.unit_ball_volume(g.N)
    growth = {
        "growing_modes": int(np.count_nonzero((sigma < 0) & (np.abs(c0) > 0))),
        "max_growth_rate": worst,
        "reference_rate": ref,
        "within_reference": bool(worst <= ref * (1.0 + 1e-12)),
    }
    return Trajectory(spec, u0, tuple(snaps), tuple(energies), tuple(diss), sigma, growth)


def _check_compatible(a, b):
    if a.grid != b.grid:
        raise ValueError("trajectories live on different grids")
    if a.times != b.times:
        raise ValueError("trajectories use different sample times")


def trajectory_distance(traj_a, traj_b):
    """Sup-in-time L2 distance and the trapezoid time integral of ``|u_t^a - u_t^b|^2``."""
    _check_compatible(traj_a, traj_b)
    g = traj_a.grid
    w = g.dxi ** g.N
    l2 = [math.sqrt(float(np.sum(np.abs(a.coeffs - b.coeffs) ** 2) * w))
          for a, b in zip(traj_a.snapshots, traj_b.snapshots)]
    dt2 = [float(np.sum(np.abs(traj_a.time_derivative(i) - traj_b.time_derivative(i)) ** 2) * w)
           for i in range(len(l2))]
    t = np.asarray(traj_a.times)
    h1 = float(np.trapezoid(dt2, t)) if t.size > 1 else 0.0
    return {"sup_l2": max(l2), "h1_seminorm_sq": h1, "l2": l2}


def dissipation_audit(traj):
    """Check ``E(t1) - E(t2) = int_{t1}^{t2} |u_t|^2`` on consecutive samples.

    The right side is summed in closed form per mode,
    ``sigma |u0_hat|^2 (exp(-2 sigma t1) - exp(-2 sigma t2)) / 2``.
    """
    g = traj.grid
    w = g.dxi ** g.N
    sigma = traj.symbol
    p0 = to_spectrum(traj.initial).power()
    rows = []
    ts = traj.times
    for i in range(len(ts) - 1):
        t1, t2 = ts[i], ts[i + 1]
        # e^{-2 s t1} - e^{-2 s t2} without cancellation
        diff = -np.exp(-2.0 * sigma * t1) * np.expm1(-2.0 * sigma * (t2 - t1))
        rhs = 0.5 * float(np.sum(sigma * p0 * diff) * w)
        lhs = traj.energies[i] - traj.energies[i + 1]
        scale = max(abs(lhs), abs(rhs))
        res = 0.0 if scale == 0.0 else abs(lhs - rhs) / scale
        rows.append({"t1": t1, "t2": t2, "energy_drop": lhs, "dissipated": rhs, "residual": res})
    return {"intervals": rows, "max_residual": max((r["residual"] for r in rows), default=0.0)}


@dataclass(frozen=True)
class ConvergenceTable:
    columns = ("s", "t", "energy_s", "energy_limit", "energy_gap", "l2_distance",
               "sup_l2", "h1_seminorm_sq")
    rows: tuple

    def per_s(self):
        """``{s: (sup_l2, h1_seminorm_sq, max energy gap)}``."""
        out = {}
        for r in self.rows:
            s = r[0]
            prev = out.get(s, (r[6], r[7], 0.0))
            out[s] = (r[6], r[7], max(prev[2], r[4]))
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([f"{v:.12g}" for v in row])
        return path


def convergence_study(u0, s_list, T, sample_times, cfg=sym.DEFAULT_CONFIG):
    """Rate flows for each ``s`` against the limit flow, from the same datum."""
    s_list = [float(s) for s in s_list]
    if any(b <= a for a, b in zip(s_list, s_list[1:])):
        raise ValueError("s_list must be ascending")
    ref = evolve(FlowSpec(limit_operator(), T, tuple(sample_times)), u0, cfg)
    rows = []
    for s in s_list:
        tr = evolve(FlowSpec(rate_operator(s), T, tuple(sample_times)), u0, cfg)
        d = trajectory_distance(tr, ref)
        for i, t in enumerate(tr.times):
            es, el = tr.energies[i], ref.energies[i]
            rows.append((s, t, es, el, abs(es - el), d["l2"][i], d["sup_l2"], d["h1_seminorm_sq"]))
    return ConvergenceTable(tuple(rows))

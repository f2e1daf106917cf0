"""Sampled functions on a large periodic box standing in for R^N.

The box is ``[-L/2, L/2)^N`` with ``M`` points per axis.  Spectra use the
unitary continuum convention

    u_hat(xi_k) ~ (2 pi)^(-N/2) dx^N sum_j u(x_j) exp(-i xi_k . x_j),

stored in numpy FFT order, so that sums ``sum_k f(xi_k) |u_hat_k|^2 dxi^N``
approximate ``int f |u_hat|^2 dxi`` directly.
"""
from __future__ import annotations

import csv
import math
import struct
import warnings
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .symbols import unit_ball_volume

__all__ = [
    "GridSpec",
    "Field",
    "Spectrum",
    "Profile",
    "ResolutionWarning",
    "gaussian",
    "smooth_bump",
    "spectral_decay",
    "sample",
    "to_spectrum",
    "to_field",
    "gradient",
    "hessian",
    "l2_norm_sq",
    "dirichlet_energy",
    "spectral_tail_ratio",
    "default_grid",
    "write_csv",
    "read_csv",
    "write_binary",
    "read_binary",
]


class ResolutionWarning(UserWarning):
    """The spectrum of a field is not decayed at the edge of the grid."""


DEFAULT_GRIDS = {1: (40.0, 1024), 2: (20.0, 128), 3: (10.0, 64)}


@dataclass(frozen=True)
class GridSpec:
    N: int
    L: float
    M: int

    def __post_init__(self):
        if self.N not in (1, 2, 3):
            raise ValueError("N must be 1, 2 or 3")
        if not self.L > 0:
            raise ValueError("box length must be positive")
        if self.M < 8 or self.M % 2:
            raise ValueError("points per axis must be even and >= 8")

    @property
    def dx(self):
        return self.L / self.M

    @property
    def dxi(self):
        return 2.0 * math.pi / self.L

    @property
    def shape(self):
        return (self.M,) * self.N

    @cached_property
    def axis(self):
        return -0.5 * self.L + self.dx * np.arange(self.M)

    @cached_property
    def k_axis(self):
        """Integer wavenumbers in FFT order."""
        return np.fft.fftfreq(self.M, 1.0 / self.M)

    @cached_property
    def xi_axis(self):
        return self.dxi * self.k_axis

    def coords(self):
        """Coordinate arrays, one per axis (``indexing='ij'``)."""
        return np.meshgrid(*([self.axis] * self.N), indexing="ij")

    def points(self):
        return np.stack(self.coords(), axis=-1)

    def wavevectors(self):
        return np.meshgrid(*([self.xi_axis] * self.N), indexing="ij")

    @cached_property
    def xi_mag(self):
        xs = self.wavevectors()
        return np.sqrt(sum(x * x for x in xs))

    @cached_property
    def _phase(self):
        # exp(i xi_k L/2) = (-1)^k, from the box offset x_0 = -L/2
        sign = np.where(self.k_axis % 2 == 0, 1.0, -1.0)
        out = sign
        for _ in range(self.N - 1):
            out = np.multiply.outer(out, sign)
        return out

    @property
    def nyquist(self):
        return math.pi * self.M / self.L


def default_grid(N):
    L, M = DEFAULT_GRIDS[N]
    return GridSpec(N, L, M)


@dataclass(frozen=True, eq=False)
class Field:
    grid: GridSpec
    values: np.ndarray
    support_radius: float = math.inf
    support_tol: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values have shape {vals.shape}, grid needs {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def _like(self, values):
        return Field(self.grid, values, self.support_radius,
                     self.support_tol * float(np.max(np.abs(values), initial=0.0) > 0))

    def __mul__(self, c):
        c = float(c)
        return Field(self.grid, c * self.values, self.support_radius, abs(c) * self.support_tol)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, Field) or other.grid != self.grid:
            return NotImplemented
        return Field(self.grid, self.values + other.values,
                     max(self.support_radius, other.support_radius),
                     self.support_tol + other.support_tol)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return (-1.0) * self

    def boundary_max(self):
        """Largest ``|u|`` outside the ball of radius ``support_radius``."""
        r = np.sqrt(sum(c * c for c in self.grid.coords()))
        outside = r >= self.support_radius
        return float(np.max(np.abs(self.values[outside]), initial=0.0))

    def support_ok(self):
        return self.boundary_max() <= self.support_tol


@dataclass(frozen=True, eq=False)
class Spectrum:
    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.grid.shape:
            raise ValueError("coefficient array does not match the grid")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def power(self):
        return np.abs(self.coeffs) ** 2

    def conjugate_symmetry_defect(self):
        c = self.coeffs
        flipped = c
        for ax in range(c.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        return float(np.max(np.abs(flipped - np.conj(c)), initial=0.0))


def to_spectrum(u):
    g = u.grid
    scale = g.dx ** g.N / (2.0 * math.pi) ** (g.N / 2.0)
    return Spectrum(g, scale * g._phase * np.fft.fftn(u.values))


def to_field(spec, support_radius=math.inf, support_tol=0.0):
    g = spec.grid
    scale = (2.0 * math.pi) ** (g.N / 2.0) / g.dx ** g.N
    vals = np.fft.ifftn(g._phase * spec.coeffs).real * scale
    return Field(g, vals, support_radius, support_tol)


# ---------------------------------------------------------------------------
# analytic profiles

@dataclass(frozen=True)
class Profile:
    """Analytic test function with exact gradient and Hessian.

    ``value``/``grad``/``hess`` take points of shape ``(..., N)``.  For
    ``spectral_decay`` only the Fourier transform ``fourier`` is available.
    """

    name: str
    params: dict = dc_field(default_factory=dict)

    def __hash__(self):
        return hash((self.name, tuple(sorted(self.params.items()))))

    # gaussian(sigma) and smooth_bump(r)
    def value(self, x):
        x = np.asarray(x, dtype=float)
        q = np.sum(x * x, axis=-1)
        if self.name == "gaussian":
            return np.exp(-0.5 * q / self.params["sigma"] ** 2)
        if self.name == "smooth_bump":
            t = q / self.params["r"] ** 2
            inside = t < 1
            return np.where(inside, np.exp(-1.0 / np.where(inside, 1.0 - t, 1.0)), 0.0)
        raise NotImplementedError(f"{self.name} has no real-space formula")

    def _radial_derivs(self, x):
        # u = F(q), q = |x|^2; returns F'(q), F''(q)
        q = np.sum(x * x, axis=-1)
        if self.name == "gaussian":
            a = 0.5 / self.params["sigma"] ** 2
            f = np.exp(-a * q)
            return -a * f, a * a * f
        if self.name == "smooth_bump":
            r2 = self.params["r"] ** 2
            t = q / r2
            inside = t < 1
            om = np.where(inside, 1.0 - t, 1.0)
            f = np.where(inside, np.exp(-1.0 / om), 0.0)
            d1 = -f / om ** 2 / r2
            d2 = f * (2.0 * t - 1.0) / om ** 4 / r2 ** 2
            return d1, d2
        raise NotImplementedError(f"{self.name} has no real-space formula")

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        d1, _ = self._radial_derivs(x)
        return 2.0 * d1[..., None] * x

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d1, d2 = self._radial_derivs(x)
        n = x.shape[-1]
        outer = x[..., :, None] * x[..., None, :]
        return 4.0 * d2[..., None, None] * outer + 2.0 * d1[..., None, None] * np.eye(n)

    def fourier(self, xi_mag, N):
        xi = np.asarray(xi_mag, dtype=float)
        if self.name == "gaussian":
            sig = self.params["sigma"]
            return sig ** N * np.exp(-0.5 * (sig * xi) ** 2)
        if self.name == "spectral_decay":
            return (1.0 + xi * xi) ** (-0.5 * self.params["beta"])
        raise NotImplementedError(f"no closed-form transform for {self.name}")

    def effective_radius(self):
        """Radius beyond which the profile is negligible (exactly 0 for bumps)."""
        if self.name == "gaussian":
            return self.params["sigma"] * math.sqrt(2.0 * math.log(1e17))
        if self.name == "smooth_bump":
            return self.params["r"]
        return math.inf


def gaussian(sigma=1.0):
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return Profile("gaussian", {"sigma": float(sigma)})


def smooth_bump(r=1.0):
    if not r > 0:
        raise ValueError("r must be positive")
    return Profile("smooth_bump", {"r": float(r)})


def spectral_decay(beta):
    return Profile("spectral_decay", {"beta": float(beta)})


_PROFILES = {"gaussian": gaussian, "smooth_bump": smooth_bump, "spectral_decay": spectral_decay}


def make_profile(name, **params):
    try:
        return _PROFILES[name](**params)
    except KeyError:
        raise ValueError(f"unknown profile {name!r}") from None


def sample(profile, grid):
    """Sample a profile on the grid, declaring its effective support.

    Raises ``ValueError`` when the profile does not fit inside the box.
    """
    half = 0.5 * grid.L
    if profile.name == "gaussian":
        sig = profile.params["sigma"]
        if 3.0 * sig >= half:
            raise ValueError(f"gaussian(sigma={sig}) does not fit in a box of length {grid.L}")
        vals = profile.value(grid.points())
        r = profile.effective_radius()
        if r < half:
            return Field(grid, vals, r, 1e-17)
        return Field(grid, vals, half, math.exp(-0.5 * (half / sig) ** 2))
    if profile.name == "smooth_bump":
        r = profile.params["r"]
        if r >= half:
            raise ValueError(f"smooth_bump(r={r}) does not fit in a box of length {grid.L}")
        return Field(grid, profile.value(grid.points()), r, 0.0)
    if profile.name == "spectral_decay":
        coeffs = profile.fourier(grid.xi_mag, grid.N)
        u = to_field(Spectrum(grid, coeffs))
        tmp = Field(grid, u.values, half, 0.0)
        return Field(grid, u.values, half, tmp.boundary_max())
    raise ValueError(f"unknown profile {profile.name!r}")


# ---------------------------------------------------------------------------
# spectral calculus

def spectral_tail_ratio(u):
    """``max |u_hat|`` over the outer quarter of wavenumbers / peak ``|u_hat|``."""
    g = u.grid
    c = np.abs(to_spectrum(u).coeffs)
    peak = float(c.max(initial=0.0))
    if peak == 0.0:
        return 0.0
    kmax = np.zeros(g.shape)
    for kk in np.meshgrid(*([np.abs(g.k_axis)] * g.N), indexing="ij"):
        kmax = np.maximum(kmax, kk)
    outer = kmax >= 3 * g.M // 8
    return float(c[outer].max(initial=0.0)) / peak


def _resolution_check(u, tol=1e-8):
    ratio = spectral_tail_ratio(u)
    if ratio > tol:
        warnings.warn(f"spectral tail ratio {ratio:.2e} exceeds {tol:.0e}; field is under-resolved",
                      ResolutionWarning, stacklevel=3)
    return ratio


def _odd_wavevector(grid, axis):
    xi = grid.xi_axis.copy()
    xi[grid.M // 2] = 0.0  # Nyquist mode has no odd derivative
    shape = [1] * grid.N
    shape[axis] = grid.M
    return xi.reshape(shape)


def gradient(u, check=True):
    if check:
        _resolution_check(u)
    spec = to_spectrum(u)
    return [to_field(Spectrum(u.grid, 1j * _odd_wavevector(u.grid, a) * spec.coeffs))
            for a in range(u.grid.N)]


def hessian(u, check=True):
    """Matrix (list of lists) of second derivatives; ``H[i][j] is H[j][i]``."""
    if check:
        _resolution_check(u)
    g = u.grid
    spec = to_spectrum(u)
    H = [[None] * g.N for _ in range(g.N)]
    for i in range(g.N):
        for j in range(i, g.N):
            if i == j:
                shape = [1] * g.N
                shape[i] = g.M
                mult = -(g.xi_axis ** 2).reshape(shape)
            else:
                mult = -_odd_wavevector(g, i) * _odd_wavevector(g, j)
            H[i][j] = H[j][i] = to_field(Spectrum(g, mult * spec.coeffs))
    return H


def l2_norm_sq(u):
    return float(np.sum(u.values ** 2) * u.grid.dx ** u.grid.N)


def dirichlet_energy(u):
    """``G_1(u) = (omega_N / 2) int |grad u|^2``, evaluated in Fourier space."""
    g = u.grid
    p = to_spectrum(u).power()
    return 0.5 * unit_ball_volume(g.N) * float(np.sum(g.xi_mag ** 2 * p)) * g.dxi ** g.N


# ---------------------------------------------------------------------------
# import / export

def write_csv(u, path):
    g = u.grid
    cols = [c.ravel() for c in g.coords()]
    header = [f"x{i + 1}" for i in range(g.N)] + ["value"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols, u.values.ravel()):
            w.writerow([repr(float(v)) for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    N = len(header) - 1
    if header != [f"x{i + 1}" for i in range(N)] + ["value"] or N not in (1, 2, 3):
        raise ValueError(f"unrecognised field CSV header {header}")
    M = round(body.shape[0] ** (1.0 / N))
    if M ** N != body.shape[0]:
        raise ValueError("row count is not a perfect power of the dimension")
    x1 = np.unique(body[:, 0])
    dx = x1[1] - x1[0]
    grid = GridSpec(N, float(dx * M), M)
    return Field(grid, body[:, -1].reshape(grid.shape))


_HEADER = struct.Struct("<qdq")


def write_binary(u, path):
    g = u.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.N, g.L, g.M))
        fh.write(np.ascontiguousarray(u.values, dtype="<f8").tobytes())


def read_binary(path):
    with open(path, "rb") as fh:
        N, L, M = _HEADER.unpack(fh.read(_HEADER.size))
        data = np.frombuffer(fh.read(), dtype="<f8")
    grid = GridSpec(int(N), float(L), int(M))
    return Field(grid, data.reshape(grid.shape))

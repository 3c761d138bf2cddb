"""Periodic position/momentum grids and 4-spinor lattice fields.

Coordinates run over [-L/2, L/2) so the origin is a grid point; momenta run
over [-N/2, N/2) * dp with dp = 2 pi hbar / L. The Fourier map is the
centred DFT scaled to approximate the continuous transform

    phi(p) = (2 pi hbar)^(-d/2) sum_x f(x) exp(-i p.x / hbar) dx^d,

which makes it unitary between the grid-weighted inner products of the two
representations.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidStateError, PreconditionError

__all__ = [
    "Grid", "LatticeField", "fourier", "to_position", "to_momentum",
    "apply_position", "apply_momentum", "expectation_position", "expectation_momentum",
    "boundary_amplitude", "check_localized", "commutator_ccr_residual",
    "gaussian_packet", "plane_wave", "delta_field", "write_csv",
]

Representation = Literal["position", "momentum"]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with ``n`` points per axis and box length ``length``."""

    n: int
    length: float
    dim: int = 1
    hbar: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 3):
            raise ValueError(f"dim must be 1 or 3, got {self.dim}")
        if self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 4, got {self.n}")
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"length must be finite and > 0, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dp(self) -> float:
        return 2.0 * math.pi * self.hbar / self.length

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        return self.dp * (np.arange(self.n) - self.n // 2)

    def positions(self):
        """Coordinate arrays, one per axis, broadcast to ``shape``."""
        return np.meshgrid(*([self.x] * self.dim), indexing="ij")

    def momenta(self):
        return np.meshgrid(*([self.p] * self.dim), indexing="ij")

    def weight(self, rep: Representation) -> float:
        return (self.dx if rep == "position" else self.dp) ** self.dim


@dataclass(frozen=True, eq=False)
class LatticeField:
    """A 4-spinor at every grid point; ``values`` has shape (4, *grid.shape)."""

    grid: Grid
    values: np.ndarray
    rep: Representation = "position"

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != (4,) + self.grid.shape:
            raise ValueError(f"values must have shape {(4,) + self.grid.shape}, got {vals.shape}")
        if self.rep not in ("position", "momentum"):
            raise ValueError(f"unknown representation {self.rep!r}")
        object.__setattr__(self, "values", vals)

    def replace(self, values, rep=None) -> "LatticeField":
        return LatticeField(self.grid, values, self.rep if rep is None else rep)

    def inner(self, other: "LatticeField") -> complex:
        """<self|other> with the grid weight of the shared representation."""
        if other.grid != self.grid:
            raise InvalidStateError("fields live on different grids")
        if other.rep != self.rep:
            other = fourier(other)
        return complex(np.vdot(self.values, other.values) * self.grid.weight(self.rep))

    def norm(self) -> float:
        return math.sqrt(self.inner(self).real)

    def normalize(self) -> "LatticeField":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero field")
        return self.replace(self.values / nrm)

    def __add__(self, other):
        if other.grid != self.grid:
            raise InvalidStateError("fields live on different grids")
        if other.rep != self.rep:
            other = fourier(other)
        return self.replace(self.values + other.values)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return self.replace(scalar * self.values)

    def in_rep(self, rep: Representation) -> "LatticeField":
        return self if self.rep == rep else fourier(self)


def _axes(grid):
    return tuple(range(1, grid.dim + 1))


def fourier(f: LatticeField) -> LatticeField:
    """Unitary map between the position and momentum representations.

    Applied to a position field it returns the momentum field and vice versa,
    so ``fourier(fourier(f))`` is the identity.
    """
    g, ax = f.grid, _axes(f.grid)
    if f.rep == "position":
        scale = (g.dx / math.sqrt(2.0 * math.pi * g.hbar)) ** g.dim
        out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values, axes=ax), axes=ax), axes=ax)
        return LatticeField(g, scale * out, "momentum")
    scale = (g.n * g.dp / math.sqrt(2.0 * math.pi * g.hbar)) ** g.dim
    out = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(f.values, axes=ax), axes=ax), axes=ax)
    return LatticeField(g, scale * out, "position")


def to_position(f: LatticeField) -> LatticeField:
    return f.in_rep("position")


def to_momentum(f: LatticeField) -> LatticeField:
    return f.in_rep("momentum")


def _check_axis(grid, axis):
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis must be in [0, {grid.dim}), got {axis}")


def apply_position(f: LatticeField, axis: int = 0) -> LatticeField:
    """x_axis f. Diagonal in position space; the result keeps f's representation."""
    _check_axis(f.grid, axis)
    g = to_position(f)
    out = g.replace(g.grid.positions()[axis][None] * g.values)
    return out.in_rep(f.rep)


def apply_momentum(f: LatticeField, axis: int = 0) -> LatticeField:
    """p_axis f. Diagonal in momentum space (spectral derivative)."""
    _check_axis(f.grid, axis)
    g = to_momentum(f)
    out = g.replace(g.grid.momenta()[axis][None] * g.values)
    return out.in_rep(f.rep)


def expectation_position(f: LatticeField, axis: int = 0) -> float:
    return (f.inner(apply_position(f, axis)) / f.inner(f)).real


def expectation_momentum(f: LatticeField, axis: int = 0) -> float:
    return (f.inner(apply_momentum(f, axis)) / f.inner(f)).real


def boundary_amplitude(f: LatticeField, margin: int | None = None) -> float:
    """Largest |amplitude| within ``margin`` points of any box face, in both
    representations, relative to the field's peak amplitude.

    ``margin`` defaults to min(8, n // 8).
    """
    g = f.grid
    if margin is None:
        margin = max(1, min(8, g.n // 8))
    worst = 0.0
    for rep in ("position", "momentum"):
        a = np.sqrt(np.sum(np.abs(f.in_rep(rep).values) ** 2, axis=0))
        peak = float(a.max())
        if peak == 0.0:
            raise ValueError("zero field")
        for axis in range(g.dim):
            edge = np.concatenate([np.take(a, range(margin), axis=axis).ravel(),
                                   np.take(a, range(g.n - margin, g.n), axis=axis).ravel()])
            worst = max(worst, float(edge.max()) / peak)
    return worst


def check_localized(f: LatticeField, tol: float = 1e-8, margin: int | None = None) -> float:
    """Raise PreconditionError unless ``f`` stays clear of the periodic wrap.

    The discrete canonical commutator only holds on states whose amplitude in
    both representations is negligible near the box edges. Returns the
    measured boundary amplitude when the check passes.
    """
    amp = boundary_amplitude(f, margin)
    if amp >= tol:
        raise PreconditionError(
            f"field touches the periodic boundary: relative amplitude {amp:.3e} >= {tol:.1e}",
            measured=amp,
        )
    return amp


def commutator_ccr_residual(f: LatticeField, tol: float = 1e-8, margin: int | None = None) -> np.ndarray:
    """<f|[x_i, p_i]|f> - i hbar for each axis i (complex array of length dim)."""
    check_localized(f, tol, margin)
    f = f.normalize()
    g = f.grid
    out = np.empty(g.dim, dtype=np.complex128)
    for i in range(g.dim):
        xp = f.inner(apply_position(apply_momentum(f, i), i))
        px = f.inner(apply_momentum(apply_position(f, i), i))
        out[i] = xp - px - 1j * g.hbar
    return out


def _normalized_spinor(s):
    s = np.asarray(s, dtype=np.complex128).reshape(4)
    nrm = np.linalg.norm(s)
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError("polarization spinor must be finite and nonzero")
    return s / nrm


def _as_dim_vector(v, dim, name):
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.size == 1 and dim > 1:
        v = np.pad(v, (0, dim - 1))
    if v.shape != (dim,):
        raise ValueError(f"{name} must have {dim} components")
    return v


def gaussian_packet(grid: Grid, center=0.0, momentum=0.0, sigma=1.0, spinor=(1, 0, 0, 0),
                    min_resolution: float = 2.0) -> LatticeField:
    """Normalised spinor Gaussian ~ exp(-(x-x0)^2 / 2 sigma^2 + i p0 x / hbar) s.

    ``sigma`` is the amplitude width, so the momentum profile has width
    hbar / sigma. Requires sigma > min_resolution * dx and the packet
    (4 sigma on each side in position, 4 hbar/sigma in momentum) inside the box.
    """
    x0 = _as_dim_vector(center, grid.dim, "center")
    p0 = _as_dim_vector(momentum, grid.dim, "momentum")
    if not sigma > min_resolution * grid.dx:
        raise ValueError(f"sigma={sigma} under-resolved: need sigma > {min_resolution} dx")
    half = 0.5 * grid.length
    if np.any(np.abs(x0) + 4.0 * sigma > half):
        raise ValueError("packet does not fit in the box")
    if np.any(np.abs(p0) + 4.0 * grid.hbar / sigma > grid.p[-1]):
        raise ValueError("packet momentum exceeds the grid's momentum range")
    s = _normalized_spinor(spinor)
    env = np.ones(grid.shape, dtype=np.complex128)
    for X, c, k in zip(grid.positions(), x0, p0):
        env = env * np.exp(-((X - c) ** 2) / (2.0 * sigma**2) + 1j * k * X / grid.hbar)
    f = LatticeField(grid, s.reshape((4,) + (1,) * grid.dim) * env[None])
    return f.normalize()


def plane_wave(grid: Grid, k_index, spinor=(1, 0, 0, 0)) -> LatticeField:
    """Normalised exp(i p.x / hbar) s with p = k_index * dp on the grid."""
    k = np.atleast_1d(np.asarray(k_index, dtype=int))
    if k.size == 1 and grid.dim > 1:
        k = np.pad(k, (0, grid.dim - 1))
    s = _normalized_spinor(spinor)
    env = np.ones(grid.shape, dtype=np.complex128)
    for X, kk in zip(grid.positions(), k):
        env = env * np.exp(1j * kk * grid.dp * X / grid.hbar)
    return LatticeField(grid, s.reshape((4,) + (1,) * grid.dim) * env[None]).normalize()


def delta_field(grid: Grid, index, spinor=(1, 0, 0, 0), rep: Representation = "position") -> LatticeField:
    """Normalised field supported on one grid point (array index, not coordinate)."""
    idx = tuple(np.atleast_1d(index).astype(int))
    if len(idx) != grid.dim:
        raise ValueError(f"index must have {grid.dim} entries")
    vals = np.zeros((4,) + grid.shape, dtype=np.complex128)
    vals[(slice(None),) + idx] = _normalized_spinor(spinor)
    return LatticeField(grid, vals, rep).normalize()


def write_csv(f: LatticeField, fh) -> None:
    """Write a field snapshot: coordinates, then re/im of the 4 components.

    Values use 17 significant digits; the header names the coordinates and the
    unit convention (hbar = c = 1).
    """
    g = f.grid
    coords = g.positions() if f.rep == "position" else g.momenta()
    names = ("x", "y", "z")[: g.dim] if f.rep == "position" else ("px", "py", "pz")[: g.dim]
    header = [f"{n}[hbar=c=1]" for n in names]
    for k in range(4):
        header += [f"re_psi{k + 1}", f"im_psi{k + 1}"]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    flat = f.values.reshape(4, -1)
    cflat = [c.ravel() for c in coords]
    for j in range(flat.shape[1]):
        row = [format(float(c[j]), ".17g") for c in cflat]
        for k in range(4):
            row += [format(float(flat[k, j].real), ".17g"), format(float(flat[k, j].imag), ".17g")]
        w.writerow(row)

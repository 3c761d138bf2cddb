"""First-quantized dynamics on the lattice.

H_D = c alpha.p + beta m0 c^2 is block diagonal in momentum space and
T = alpha.r/c + beta tau0 is block diagonal in position space. Both square to
a scalar per block (e_p^2 and t_r^2), so their exponentials are applied
exactly through the spectral projectors (1 +- M / lambda) / 2; there is no
time stepping anywhere in this module.

In a 1D reduction only alpha^1 enters. The spin-orbit operator is taken in
its dimension-aware form K = beta (Sigma.l / hbar + (d - 1) / 2), which is
beta (2 s.l / hbar^2 + 1) in 3D and vanishes identically in 1D.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .algebra import ALPHA, BETA, DEFAULT_CONSTANTS, PAULI, SIGMA, PhysicalConstants
from .errors import InvalidStateError
from .lattice import (
    Grid, LatticeField, apply_momentum, apply_position, check_localized,
    expectation_momentum, expectation_position, to_momentum, to_position,
)

__all__ = [
    "apply_matrix", "apply_alpha", "apply_beta", "apply_H_D", "apply_T",
    "apply_orbital", "apply_K", "OperatorHandle", "dirac_hamiltonian", "time_operator",
    "k_operator", "expectation", "energy_projector", "project_energy",
    "evolve_time", "evolve_energy", "time_series", "commutator_TH_residual",
    "dTdt_rhs", "Trajectory", "heisenberg_T_trajectory", "detrend_linear",
    "dominant_frequency", "bound_state_T_expectation", "upper_lower_cross_term",
    "PhaseCheck", "phase_consistency_check", "velocity_check", "momentum_rate_check",
]


def _check_units(f: LatticeField, const: PhysicalConstants):
    if not math.isclose(f.grid.hbar, const.hbar):
        raise InvalidStateError(f"grid hbar={f.grid.hbar} differs from constants hbar={const.hbar}")


def apply_matrix(a, f: LatticeField) -> LatticeField:
    """Apply a constant 4x4 matrix at every grid point."""
    return f.replace(np.tensordot(a, f.values, axes=(1, 0)))


def apply_alpha(f: LatticeField, axis: int = 0) -> LatticeField:
    return apply_matrix(ALPHA[axis], f)


def apply_beta(f: LatticeField) -> LatticeField:
    return apply_matrix(BETA, f)


def _alpha_dot_field(coords, values, dim):
    out = np.zeros_like(values)
    for i in range(dim):
        out += coords[i][None] * np.tensordot(ALPHA[i], values, axes=(1, 0))
    return out


def apply_H_D(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """H_D f, evaluated mode by mode in momentum space; keeps f's representation."""
    _check_units(f, const)
    g = to_momentum(f)
    v = const.c * _alpha_dot_field(g.grid.momenta(), g.values, g.grid.dim)
    v += const.rest_energy * np.tensordot(BETA, g.values, axes=(1, 0))
    return g.replace(v).in_rep(f.rep)


def apply_T(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """T f, evaluated site by site in position space; keeps f's representation."""
    _check_units(f, const)
    g = to_position(f)
    v = _alpha_dot_field(g.grid.positions(), g.values, g.grid.dim) / const.c
    v += const.tau0 * np.tensordot(BETA, g.values, axes=(1, 0))
    return g.replace(v).in_rep(f.rep)


_CYCLIC = ((1, 2), (2, 0), (0, 1))


def apply_orbital(f: LatticeField, k: int) -> LatticeField:
    """l_k f with l = r x p (3D grids only)."""
    if f.grid.dim != 3:
        raise ValueError("orbital angular momentum needs a 3D grid")
    i, j = _CYCLIC[k]
    return apply_position(apply_momentum(f, j), i) - apply_position(apply_momentum(f, i), j)


def apply_K(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """K f = beta (Sigma.l / hbar + (d-1)/2) f."""
    d = f.grid.dim
    if d == 1:
        return f.replace(np.zeros_like(f.values))
    acc = 1.0 * f
    for k in range(3):
        acc = acc + (1.0 / const.hbar) * apply_matrix(SIGMA[k], apply_orbital(f, k))
    return apply_beta(acc)


@dataclass(frozen=True)
class OperatorHandle:
    """A lattice operator bound to one grid; applying it to a field from any
    other grid raises InvalidStateError."""

    kind: str
    grid: Grid
    apply: Callable[[LatticeField], LatticeField] = field(repr=False)

    def __call__(self, f: LatticeField) -> LatticeField:
        if f.grid != self.grid:
            raise InvalidStateError(f"{self.kind} is bound to {self.grid}, field lives on {f.grid}")
        return self.apply(f)


def dirac_hamiltonian(grid: Grid, const: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorHandle:
    return OperatorHandle("H_D", grid, lambda f: apply_H_D(f, const))


def time_operator(grid: Grid, const: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorHandle:
    return OperatorHandle("T", grid, lambda f: apply_T(f, const))


def k_operator(grid: Grid, const: PhysicalConstants = DEFAULT_CONSTANTS) -> OperatorHandle:
    return OperatorHandle("K", grid, lambda f: apply_K(f, const))


def expectation(f: LatticeField, op: Callable[[LatticeField], LatticeField]) -> complex:
    return f.inner(op(f)) / f.inner(f)


def _block_dot(values, coords, scale, gap, dim):
    """Return (M applied to values, lambda) for M = scale * alpha.coords + gap * beta."""
    mv = scale * _alpha_dot_field(coords, values, dim) + gap * np.tensordot(BETA, values, axes=(1, 0))
    r2 = sum(c**2 for c in coords)
    lam = np.sqrt((scale**2) * r2 + gap**2)
    return mv, lam


def energy_projector(f: LatticeField, sign: int, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """Project each momentum mode on the +e_p (sign=+1) or -e_p (sign=-1) eigenspace."""
    _check_units(f, const)
    g = to_momentum(f)
    hv, lam = _block_dot(g.values, g.grid.momenta(), const.c, const.rest_energy, g.grid.dim)
    out = 0.5 * (g.values + sign * hv / lam[None])
    return g.replace(out).in_rep(f.rep)


def project_energy(f: LatticeField, sign: int = +1, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """Normalised positive (or negative) energy part of ``f``."""
    return energy_projector(f, sign, const).normalize()


def evolve_time(f: LatticeField, t: float, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """Exact exp(-i H_D t / hbar) f for a position-representation field."""
    if f.rep != "position":
        raise InvalidStateError("evolve_time expects a position-representation field")
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t!r}")
    _check_units(f, const)
    g = to_momentum(f)
    hv, lam = _block_dot(g.values, g.grid.momenta(), const.c, const.rest_energy, g.grid.dim)
    plus = 0.5 * (g.values + hv / lam[None])
    minus = g.values - plus
    ph = np.exp(-1j * lam * t / const.hbar)[None]
    return to_position(g.replace(ph * plus + ph.conj() * minus))


def evolve_energy(f: LatticeField, de: float, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """Exact energy-parameter flow exp(+i T de / hbar) f for a momentum field.

    The flow direction is fixed so that the momentum is displaced by
    +(de / c) alpha: d<p>/de = <alpha>/c. A positive-time eigenfield of T at a
    site picks up the phase exp(+i t_r de / hbar).
    """
    if f.rep != "momentum":
        raise InvalidStateError("evolve_energy expects a momentum-representation field")
    if not math.isfinite(de):
        raise ValueError(f"de must be finite, got {de!r}")
    _check_units(f, const)
    g = to_position(f)
    tv, lam = _block_dot(g.values, g.grid.positions(), 1.0 / const.c, const.tau0, g.grid.dim)
    plus = 0.5 * (g.values + tv / lam[None])
    minus = g.values - plus
    ph = np.exp(1j * lam * de / const.hbar)[None]
    return to_momentum(g.replace(ph * plus + ph.conj() * minus))


def time_series(f: LatticeField, t: float, steps: int, const: PhysicalConstants = DEFAULT_CONSTANTS):
    """Fields at ``steps + 1`` uniform times in [0, t]; each is propagated
    exactly from ``f``, so ``steps`` sets the sampling, not the accuracy."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    times = np.linspace(0.0, t, steps + 1)
    return times, [evolve_time(f, float(s), const) for s in times]


def dTdt_rhs(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> LatticeField:
    """(1 / i hbar) [T, H_D] f written through its closed form:
    {I + 2 beta K} f + (2 / i hbar) beta {tau0 H_D - m0 c^2 T} f."""
    hf, tf = apply_H_D(f, const), apply_T(f, const)
    out = f + 2.0 * apply_beta(apply_K(f, const))
    return out + (2.0 / (1j * const.hbar)) * apply_beta(const.tau0 * hf - const.rest_energy * tf)


def commutator_TH_residual(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS,
                            tol: float = 1e-8, margin: int | None = None) -> float:
    """||([T, H_D] - i hbar {I + 2 beta K} - 2 beta {tau0 H_D - m0 c^2 T}) f|| / ||f||.

    Exact in the continuum; on the lattice it measures the failure of the
    discrete canonical commutator, hence the localisation precondition.
    """
    check_localized(f, tol, margin)
    lhs = apply_T(apply_H_D(f, const), const) - apply_H_D(apply_T(f, const), const)
    rhs = (1j * const.hbar) * dTdt_rhs(f, const)
    return (lhs - rhs).norm() / f.norm()


@dataclass
class Trajectory:
    """Uniformly sampled expectation values; every series has len(times) entries."""

    times: np.ndarray
    series: dict

    def __post_init__(self):
        n = len(self.times)
        if any(len(v) != n for v in self.series.values()):
            raise ValueError("series lengths differ from the time axis")
        if n > 2 and not np.allclose(np.diff(self.times), self.times[1] - self.times[0]):
            raise ValueError("time step is not uniform")

    def __getitem__(self, name):
        return self.series[name]

    def columns(self):
        return ["t", *self.series]

    def rows(self):
        cols = [self.times, *self.series.values()]
        return [tuple(float(c[i]) for c in cols) for i in range(len(self.times))]


def detrend_linear(times, values):
    """Return (residual, slope, intercept) of a least-squares line fit."""
    slope, intercept = np.polyfit(times, values, 1)
    return values - (slope * times + intercept), slope, intercept


def dominant_frequency(times, values, pad: int = 16) -> float:
    """Angular frequency of the strongest spectral peak after linear detrending.

    The detrended signal is Hann-windowed and zero padded by ``pad``; the peak
    bin is refined by a parabola through the log magnitudes of its neighbours.
    Among several peaks the largest amplitude wins.
    """
    times = np.asarray(times, dtype=float)
    resid, _, _ = detrend_linear(times, np.asarray(values, dtype=float))
    dt = times[1] - times[0]
    n = len(times)
    spec = np.abs(np.fft.rfft(resid * np.hanning(n), n=pad * n))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    if 0 < k < len(spec) - 1 and spec[k - 1] > 0 and spec[k + 1] > 0:
        a, b, c = np.log(spec[k - 1 : k + 2])
        denom = a - 2 * b + c
        k = k + (0.5 * (a - c) / denom if denom != 0 else 0.0)
    return 2.0 * math.pi * k / (pad * n * dt)


def _fd_derivative(fun, h):
    # five-point central stencil
    return (fun(-2 * h) - 8 * fun(-h) + 8 * fun(h) - fun(2 * h)) / (12 * h)


def heisenberg_T_trajectory(f0: LatticeField, t_max: float, samples: int,
                            const: PhysicalConstants = DEFAULT_CONSTANTS, *,
                            localized_tol: float | None = 1e-8, fd_step: float = 1e-3) -> Trajectory:
    """Sample <T(t)> and companions on ``samples`` uniform times in [0, t_max].

    Series: T (Re <T>), T_detrended, x, p (axis 0), H, K, norm, plus the
    finite-difference d<T>/dt (``dTdt_fd``) and the closed-form
    expectation (``dTdt_rhs``) at each sample. Pass ``localized_tol=None`` to
    skip the boundary precondition (e.g. single plane-wave modes).
    """
    if localized_tol is not None:
        check_localized(f0, localized_tol)
    f0 = to_position(f0).normalize()
    times = np.linspace(0.0, t_max, samples)
    keys = ("T", "x", "p", "H", "K", "norm", "dTdt_fd", "dTdt_rhs")
    out = {k: np.empty(samples) for k in keys}
    for n, t in enumerate(times):
        f = evolve_time(f0, float(t), const)
        out["T"][n] = expectation(f, lambda g: apply_T(g, const)).real
        out["x"][n] = expectation_position(f, 0)
        out["p"][n] = expectation_momentum(f, 0)
        out["H"][n] = expectation(f, lambda g: apply_H_D(g, const)).real
        out["K"][n] = expectation(f, lambda g: apply_K(g, const)).real
        out["norm"][n] = f.norm()
        out["dTdt_rhs"][n] = expectation(f, lambda g: dTdt_rhs(g, const)).real

        def t_at(dt, f=f):
            return expectation(evolve_time(f, dt, const), lambda g: apply_T(g, const)).real

        out["dTdt_fd"][n] = _fd_derivative(t_at, fd_step)
    detr, _, _ = detrend_linear(times, out["T"]) if samples > 1 else (out["T"] * 0, 0, 0)
    series = {"T": out["T"], "T_detrended": detr}
    series.update({k: out[k] for k in keys[1:]})
    return Trajectory(times, series)


def bound_state_T_expectation(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> complex:
    """<f|T|f> / <f|f>, reported as computed (no forcing to +-tau0).

    It equals +tau0 (-tau0) when only the upper (lower) spinor block is
    populated, because alpha.r couples the two blocks.
    """
    return expectation(f, lambda g: apply_T(g, const))


def upper_lower_cross_term(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """The alpha.r/c contribution to <T>: 2 Re <upper| sigma.r/c |lower> / <f|f>."""
    g = to_position(f)
    pos = g.grid.positions()
    up, lo = g.values[:2], g.values[2:]
    acc = 0.0 + 0.0j
    for i in range(g.grid.dim):
        acc += np.vdot(up, pos[i][None] * np.tensordot(PAULI[i], lo, axes=(1, 0)))
    acc *= g.grid.weight("position") / const.c
    return float(2.0 * acc.real / g.inner(g).real)


class PhaseCheck(NamedTuple):
    dphi: float
    dchi: float
    equal: bool


def phase_consistency_check(de: float, dt: float, const: PhysicalConstants = DEFAULT_CONSTANTS,
                            beta_sign: int = +1) -> PhaseCheck:
    """Phases generated on a beta eigenstate: dphi = beta de tau0 / hbar by T,
    dchi = beta dt m0 c^2 / hbar by H_D. Equal (both 2 pi) at de = m0c^2,
    dt = tau0."""
    if beta_sign not in (1, -1):
        raise ValueError("beta_sign must be +1 or -1")
    dphi = beta_sign * de * const.tau0 / const.hbar
    dchi = beta_sign * dt * const.rest_energy / const.hbar
    equal = math.isclose(dphi, dchi, rel_tol=1e-12, abs_tol=1e-12)
    return PhaseCheck(dphi, dchi, equal)


def velocity_check(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS,
                   axis: int = 0, h: float = 1e-3) -> tuple:
    """(d<x>/dt by finite differences along evolve_time, <c alpha>) at t = 0."""
    f = to_position(f).normalize()

    def x_at(t):
        return expectation_position(evolve_time(f, t, const), axis)

    rate = _fd_derivative(x_at, h)
    vel = const.c * expectation(f, lambda g: apply_alpha(g, axis)).real
    return rate, vel


def momentum_rate_check(f: LatticeField, const: PhysicalConstants = DEFAULT_CONSTANTS,
                        axis: int = 0, h: float = 1e-3) -> tuple:
    """(d<p>/de by finite differences along evolve_energy, <alpha>/c) at e = 0."""
    f = to_momentum(f).normalize()

    def p_at(e):
        return expectation_momentum(evolve_energy(f, e, const), axis)

    rate = _fd_derivative(p_at, h)
    target = expectation(f, lambda g: apply_alpha(g, axis)).real / const.c
    return rate, target

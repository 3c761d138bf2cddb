"""Dirac-representation gamma matrices, constants and charge conjugation.

All matrices are 4x4 ``complex128`` numpy arrays. Module-level constants are
read-only; the accessor functions return fresh copies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PAULI", "METRIC", "IDENTITY4", "BETA", "ALPHA", "SIGMA", "CHARGE_CONJUGATION",
    "PhysicalConstants", "DEFAULT_CONSTANTS",
    "gamma", "alpha", "spin_matrix", "anticommutator", "commutator",
    "clifford_residual", "alpha_beta_residual", "charge_conjugate",
    "dirac_adjoint", "phase_aligned_distance",
]


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


_S1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_S2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_S3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
_I2 = np.eye(2, dtype=np.complex128)
_Z2 = np.zeros((2, 2), dtype=np.complex128)

PAULI = tuple(_frozen(s) for s in (_S1, _S2, _S3))
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])
METRIC.setflags(write=False)
IDENTITY4 = _frozen(np.eye(4))

_GAMMA = (
    _frozen(np.block([[_I2, _Z2], [_Z2, -_I2]])),
    *(_frozen(np.block([[_Z2, s], [-s, _Z2]])) for s in PAULI),
)

BETA = _GAMMA[0]
ALPHA = tuple(_frozen(_GAMMA[0] @ g) for g in _GAMMA[1:])
SIGMA = tuple(_frozen(np.block([[s, _Z2], [_Z2, s]])) for s in PAULI)

# C = i gamma^2; real in this representation and an involution (C C* = I).
CHARGE_CONJUGATION = _frozen(1j * _GAMMA[2])


@dataclass(frozen=True)
class PhysicalConstants:
    """Unit conventions. ``hbar`` and ``c`` default to 1 (natural units).

    ``tau0`` is fixed by the phase-closure condition tau0 * m0 c^2 = h.
    """

    m0: float = 1.0
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("m0", "hbar", "c"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def rest_energy(self) -> float:
        return self.m0 * self.c**2

    @property
    def tau0(self) -> float:
        return self.h / self.rest_energy


DEFAULT_CONSTANTS = PhysicalConstants()


def gamma(mu: int) -> np.ndarray:
    """Return gamma^mu (mu = 0..3) in the Dirac representation."""
    if not isinstance(mu, (int, np.integer)) or not 0 <= mu <= 3:
        raise ValueError(f"gamma index must be 0..3, got {mu!r}")
    return _GAMMA[mu].copy()


def alpha(i: int) -> np.ndarray:
    """Return alpha^i = gamma^0 gamma^i for i = 1..3."""
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= 3:
        raise ValueError(f"alpha index must be 1..3, got {i!r}")
    return ALPHA[i - 1].copy()


def spin_matrix(i: int) -> np.ndarray:
    """Block-diagonal Sigma^i = diag(sigma^i, sigma^i); the spin is (hbar/2) Sigma."""
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= 3:
        raise ValueError(f"spin index must be 1..3, got {i!r}")
    return SIGMA[i - 1].copy()


def anticommutator(a, b):
    return a @ b + b @ a


def commutator(a, b):
    return a @ b - b @ a


def clifford_residual(gammas=None, metric=None) -> float:
    """max_{mu,nu} || {g^mu, g^nu} - 2 eta^{mu nu} I ||_max.

    ``gammas`` and ``metric`` default to the library's own; passing other values
    lets tests check that corrupted matrices or a wrong metric are detected.
    """
    gs = _GAMMA if gammas is None else [np.asarray(g) for g in gammas]
    eta = METRIC if metric is None else np.asarray(metric)
    worst = 0.0
    for mu in range(4):
        for nu in range(4):
            d = anticommutator(gs[mu], gs[nu]) - 2.0 * eta[mu, nu] * IDENTITY4
            worst = max(worst, float(np.max(np.abs(d))))
    return worst


def alpha_beta_residual() -> float:
    """Deviation from {a^i,a^j} = 2 delta^ij, {a^i, b} = 0, b^2 = I."""
    worst = float(np.max(np.abs(BETA @ BETA - IDENTITY4)))
    for i in range(3):
        worst = max(worst, float(np.max(np.abs(anticommutator(ALPHA[i], BETA)))))
        for j in range(3):
            d = anticommutator(ALPHA[i], ALPHA[j]) - 2.0 * (i == j) * IDENTITY4
            worst = max(worst, float(np.max(np.abs(d))))
    return worst


def charge_conjugate(s) -> np.ndarray:
    """Apply s -> C s*. Maps u_1 -> -w_2 and u_2 -> w_1 at any momentum."""
    s = np.asarray(s, dtype=np.complex128)
    if s.shape[0] != 4 or not np.all(np.isfinite(s)):
        raise ValueError("charge_conjugate expects a finite 4-spinor")
    return np.tensordot(CHARGE_CONJUGATION, s.conj(), axes=(1, 0))


def dirac_adjoint(s) -> np.ndarray:
    """Row spinor s-bar = s^dagger gamma^0."""
    s = np.asarray(s, dtype=np.complex128)
    return s.conj() @ BETA


def phase_aligned_distance(a, b) -> float:
    """min over theta of ||a - e^{i theta} b||, b rotated to maximise |<b, a>|."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(a - phase * b))

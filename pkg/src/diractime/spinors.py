"""Energy and time spinor families.

Energy spinors are the eigenvectors of H_D(p) = c alpha.p + beta m0 c^2 at a
fixed momentum, time spinors those of T(r) = alpha.r/c + beta tau0 at a fixed
position. Both families use the chi-basis construction (q = 1, 2) and the
(e_p + m0c^2)/2m0c^2 normalisation, so that the Dirac-adjoint Gram matrix is
diag(1, 1, -1, -1).

The negative branch spinor ``w_q(p)`` is the coefficient of the
antiparticle plane wave, which carries spatial momentum ``-p``. It is
therefore an eigenvector of ``H_D(-p)`` with eigenvalue ``-e_p``;
likewise ``w_q(r)`` is an eigenvector of ``T(-r)`` with eigenvalue ``-t_r``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .algebra import (
    ALPHA, BETA, CHARGE_CONJUGATION, DEFAULT_CONSTANTS, IDENTITY4, PAULI, PhysicalConstants,
    charge_conjugate, dirac_adjoint, phase_aligned_distance,
)

__all__ = [
    "as_vector", "energy_eigenvalue", "time_eigenvalue",
    "dirac_matrix", "time_matrix", "energy_spinor", "time_spinor",
    "spinor_family", "orthogonality_table", "completeness_residual",
    "eigen_residual", "conjugation_residual", "GapReport", "gap_report",
    "sample_family",
]

_CHI = (np.array([1.0, 0.0], dtype=np.complex128), np.array([0.0, 1.0], dtype=np.complex128))


def as_vector(v) -> np.ndarray:
    """Coerce a scalar or 1..3 component sequence into a real 3-vector."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1 or v.size > 3:
        raise ValueError(f"expected at most 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return np.pad(v, (0, 3 - v.size))


def _sigma_dot(v):
    return v[0] * PAULI[0] + v[1] * PAULI[1] + v[2] * PAULI[2]


def _alpha_dot(v):
    return v[0] * ALPHA[0] + v[1] * ALPHA[1] + v[2] * ALPHA[2]


def _check_labels(q, branch):
    if q not in (1, 2):
        raise ValueError(f"spin label q must be 1 or 2, got {q!r}")
    if branch in ("+", 1, +1):
        return +1
    if branch in ("-", -1):
        return -1
    raise ValueError(f"branch must be '+' or '-', got {branch!r}")


def energy_eigenvalue(p, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Positive branch e_p = sqrt((c|p|)^2 + (m0 c^2)^2)."""
    p = as_vector(p)
    return math.hypot(const.c * float(np.linalg.norm(p)), const.rest_energy)


def time_eigenvalue(r, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Positive branch t_r = sqrt((|r|/c)^2 + tau0^2)."""
    r = as_vector(r)
    return math.hypot(float(np.linalg.norm(r)) / const.c, const.tau0)


def dirac_matrix(p, const: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """H_D at fixed momentum p (4x4)."""
    return const.c * _alpha_dot(as_vector(p)) + const.rest_energy * BETA


def time_matrix(r, const: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """T at fixed position r (4x4)."""
    return _alpha_dot(as_vector(r)) / const.c + const.tau0 * BETA


def _chi_spinor(vec_sigma, gap, eig, q, sign):
    # shared construction for both families: vec_sigma = c sigma.p or sigma.r/c
    chi = _CHI[q - 1]
    norm = math.sqrt((eig + gap) / (2.0 * gap))
    small = (vec_sigma @ chi) / (eig + gap)
    if sign > 0:
        return norm * np.concatenate([chi, small])
    return -norm * np.concatenate([small, chi])


def energy_spinor(p, q: int, branch="+", const: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """u_q(p) for branch '+', w_q(p) (with its leading minus sign) for '-'."""
    sign = _check_labels(q, branch)
    p = as_vector(p)
    e = energy_eigenvalue(p, const)
    return _chi_spinor(const.c * _sigma_dot(p), const.rest_energy, e, q, sign)


def time_spinor(r, q: int, branch="+", const: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """u_q(r) for branch '+', w_q(r) for '-' (minus-sign convention on w)."""
    sign = _check_labels(q, branch)
    r = as_vector(r)
    t = time_eigenvalue(r, const)
    return _chi_spinor(_sigma_dot(r) / const.c, const.tau0, t, q, sign)


def spinor_family(arg, family: str, const: PhysicalConstants = DEFAULT_CONSTANTS):
    """Return [u1, u2, w1, w2] for ``family`` in {'energy', 'time'}."""
    make = _family_builder(family)
    return [make(arg, q, b, const) for b in "+-" for q in (1, 2)]


def _family_builder(family):
    if family == "energy":
        return energy_spinor
    if family == "time":
        return time_spinor
    raise ValueError(f"family must be 'energy' or 'time', got {family!r}")


def _gram(fam):
    return np.array([[dirac_adjoint(a) @ b for b in fam] for a in fam])


def _completeness(fam):
    u1, u2, w1, w2 = fam
    acc = np.outer(u1, dirac_adjoint(u1)) + np.outer(u2, dirac_adjoint(u2))
    acc -= np.outer(w1, dirac_adjoint(w1)) + np.outer(w2, dirac_adjoint(w2))
    return float(np.max(np.abs(acc - IDENTITY4)))


def _eigen(v, fam, family, const, normalize):
    if family == "energy":
        lam = energy_eigenvalue(v, const)
        mats = (dirac_matrix(v, const), dirac_matrix(-v, const))
    else:
        lam = time_eigenvalue(v, const)
        mats = (time_matrix(v, const), time_matrix(-v, const))
    worst = 0.0
    for k, s in enumerate(fam):
        sign = 1.0 if k < 2 else -1.0
        if normalize:
            s = s / np.linalg.norm(s)
        res = mats[0 if sign > 0 else 1] @ s - sign * lam * s
        worst = max(worst, float(np.linalg.norm(res)))
    return worst


def _conjugation(fam):
    u1, u2, w1, w2 = fam
    pairs = ((u1, w2), (u2, w1), (w2, u1), (w1, u2))
    return max(phase_aligned_distance(charge_conjugate(a), b) for a, b in pairs)


def orthogonality_table(arg, family: str, const: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Dirac-adjoint inner products a-bar b over {u1, u2, w1, w2}.

    The entries are real for both families; the array is returned as
    complex so that any stray imaginary part is visible to the caller.
    """
    return _gram(spinor_family(arg, family, const))


def completeness_residual(arg, family: str, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """max |sum_q (u_q u_q-bar - w_q w_q-bar) - I|."""
    return _completeness(spinor_family(arg, family, const))


def eigen_residual(arg, family: str, const: PhysicalConstants = DEFAULT_CONSTANTS, normalize=True) -> float:
    """Largest eigen-equation residual over the four spinors of a family.

    u satisfies M(arg) u = +lam u and w satisfies M(-arg) w = -lam w, where M
    is H_D or T. With ``normalize`` the spinors are scaled to unit norm first.
    """
    v = as_vector(arg)
    return _eigen(v, spinor_family(v, family, const), family, const, normalize)


def conjugation_residual(arg, family: str = "energy", const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Phase-aligned distance between C u_q* and w_{q'} (and back) at ``arg``.

    C exchanges the spin label, so u_1 pairs with w_2 and u_2 with w_1.
    """
    return _conjugation(spinor_family(arg, family, const))


class GapReport(NamedTuple):
    energy_gap: float
    time_gap: float
    product: float

    def product_over_h(self, const: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        return self.product / const.h


def gap_report(const: PhysicalConstants = DEFAULT_CONSTANTS) -> GapReport:
    """Spectral gaps 2 m0c^2 and 2 tau0 and their product (= 4h for any m0)."""
    eg = 2.0 * const.rest_energy
    tg = 2.0 * const.tau0
    return GapReport(eg, tg, eg * tg)


def _family_batch(vs, family, const):
    """Families at many arguments at once: shape (n, 4 spinors, 4 components), plus eigenvalues."""
    if family == "energy":
        gap, sig_scale = const.rest_energy, const.c
        lam = np.hypot(const.c * np.linalg.norm(vs, axis=1), gap)
    else:
        gap, sig_scale = const.tau0, 1.0 / const.c
        lam = np.hypot(np.linalg.norm(vs, axis=1) / const.c, gap)
    sig = np.einsum("ni,iab->nab", vs * sig_scale, np.asarray(PAULI))
    norm = np.sqrt((lam + gap) / (2.0 * gap))[:, None]
    out = np.empty((len(vs), 4, 4), dtype=np.complex128)
    for q in (1, 2):
        chi = np.broadcast_to(_CHI[q - 1], (len(vs), 2))
        small = (sig @ _CHI[q - 1]) / (lam + gap)[:, None]
        out[:, q - 1] = norm * np.concatenate([chi, small], axis=1)
        out[:, q + 1] = -norm * np.concatenate([small, chi], axis=1)
    return out, lam


def sample_family(n: int, seed: int, family: str, const: PhysicalConstants = DEFAULT_CONSTANTS,
                  scale: float = 5.0) -> dict:
    """Check a family at ``n`` random arguments drawn from N(0, scale^2).

    Momenta are in units of m0 c, positions in units of c tau0. Returns the
    worst eigen-residual, orthogonality deviation and completeness residual,
    plus the worst conjugation residual for the energy family. The sweep is
    batched; it agrees with the per-argument functions above.
    """
    _family_builder(family)
    rng = np.random.default_rng(seed)
    unit = const.m0 * const.c if family == "energy" else const.c * const.tau0
    vs = rng.normal(scale=scale, size=(n, 3)) * unit
    fam, lam = _family_batch(vs, family, const)

    alpha = np.asarray(ALPHA)
    a_dot = np.einsum("ni,iab->nab", vs, alpha)
    if family == "energy":
        m_plus = const.c * a_dot + const.rest_energy * BETA
        m_minus = -const.c * a_dot + const.rest_energy * BETA
    else:
        m_plus = a_dot / const.c + const.tau0 * BETA
        m_minus = -a_dot / const.c + const.tau0 * BETA
    unit_fam = fam / np.linalg.norm(fam, axis=2, keepdims=True)
    res_u = np.einsum("nab,nkb->nka", m_plus, unit_fam[:, :2]) - lam[:, None, None] * unit_fam[:, :2]
    res_w = np.einsum("nab,nkb->nka", m_minus, unit_fam[:, 2:]) + lam[:, None, None] * unit_fam[:, 2:]
    eigen = max(np.linalg.norm(res_u, axis=2).max(), np.linalg.norm(res_w, axis=2).max())

    bar = fam.conj() @ BETA
    gram = np.einsum("nka,nja->nkj", bar, fam)
    ortho = np.abs(gram - np.diag([1.0, 1.0, -1.0, -1.0])).max()
    signs = np.array([1.0, 1.0, -1.0, -1.0])
    comp = np.einsum("k,nka,nkb->nab", signs, fam, bar)
    completeness = np.abs(comp - IDENTITY4).max()
    out = {"eigen_residual": float(eigen), "orthogonality_deviation": float(ortho),
           "completeness_residual": float(completeness)}
    if family == "energy":
        conj = fam.conj() @ np.asarray(CHARGE_CONJUGATION).T  # C s* for every spinor
        worst = 0.0
        for src, dst in ((0, 3), (1, 2), (3, 0), (2, 1)):
            a, b = conj[:, src], fam[:, dst]
            ov = np.einsum("na,na->n", b.conj(), a)
            mag = np.abs(ov)
            phase = np.divide(ov, mag, out=np.ones_like(ov), where=mag > 0)
            worst = max(worst, float(np.linalg.norm(a - phase[:, None] * b, axis=1).max()))
        out["conjugation_residual"] = worst
    return out

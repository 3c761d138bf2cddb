"""Fermionic occupation-number space and second-quantized observables.

A ``ModeTable`` fixes an ordered list of modes (sector, label, spin). Basis
states are Python ints whose bit ``i`` is the occupation of mode ``i``; a
ladder operator on mode ``i`` picks up the sign (-1)^(number of occupied
modes with smaller index).

Energy tables hold momentum modes (particles b, antiparticles d, quanta e_p);
time tables hold position modes (particles a, antiparticles c, quanta t_r).
Labels are integer vectors; the physical vector is ``label * spacing`` and
the conjugate lattice has ``sites`` points per axis with spacing
2 pi hbar / (sites * spacing).
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .algebra import DEFAULT_CONSTANTS, PhysicalConstants
from .spinors import energy_eigenvalue, energy_spinor, time_eigenvalue, time_spinor

__all__ = [
    "Mode", "ModeTable", "FockState", "SparseFockOperator", "create", "annihilate",
    "jordan_wigner_annihilators", "AnticommutatorReport", "anticommutator_table",
    "build_hamiltonian", "build_total_momentum", "build_T0", "build_cT", "build_number",
    "spectrum", "occupied_sums", "field_prefactor", "field_operator",
    "displacement_identity_check", "spectrum_document", "MAX_MODES", "MAX_DENSE_MODES",
]

MAX_MODES = 20
MAX_DENSE_MODES = 10

_SECTORS = {"particle": 0, "antiparticle": 1, "b": 0, "d": 1, "a": 0, "c": 1, 0: 0, 1: 1}
_LETTERS = {"energy": ("b", "d"), "time": ("a", "c")}


@dataclass(frozen=True, order=True)
class Mode:
    sector: int
    label: tuple
    spin: int


@dataclass(frozen=True)
class ModeTable:
    kind: str
    modes: tuple
    spacing: float
    sites: int
    dim: int = 1
    const: PhysicalConstants = DEFAULT_CONSTANTS
    _index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in _LETTERS:
            raise ValueError(f"kind must be 'energy' or 'time', got {self.kind!r}")
        modes = tuple(sorted(self.modes))
        if len(set(modes)) != len(modes):
            raise ValueError("mode labels must be unique")
        if not 0 < len(modes) <= MAX_MODES:
            raise ValueError(f"need 1..{MAX_MODES} modes, got {len(modes)}")
        for m in modes:
            if len(m.label) != self.dim or m.spin not in (1, 2) or m.sector not in (0, 1):
                raise ValueError(f"malformed mode {m}")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise ValueError("spacing must be finite and > 0")
        if self.sites < 1:
            raise ValueError("sites must be >= 1")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(modes)})

    @classmethod
    def build(cls, kind, labels, spacing, sites, spins=(1, 2), sectors=("particle", "antiparticle"),
              const: PhysicalConstants = DEFAULT_CONSTANTS):
        labels = [tuple(int(v) for v in np.atleast_1d(lab)) for lab in labels]
        dim = len(labels[0]) if labels else 1
        modes = [Mode(_SECTORS[s], lab, q) for s in sectors for lab in labels for q in spins]
        return cls(kind, tuple(modes), float(spacing), int(sites), dim, const)

    @classmethod
    def energy(cls, labels, spacing, sites, **kw):
        return cls.build("energy", labels, spacing, sites, **kw)

    @classmethod
    def time(cls, labels, spacing, sites, **kw):
        return cls.build("time", labels, spacing, sites, **kw)

    @classmethod
    def default(cls, kind, n_modes, const: PhysicalConstants = DEFAULT_CONSTANTS, sites=4):
        """``n_modes`` modes of a 1D table, filled label by label (0, 1, -1, 2, ...),
        both sectors and spins. Label spacing is 0.5 m0c (energy) or 0.5 c tau0 (time)."""
        spacing = 0.5 * (const.m0 * const.c if kind == "energy" else const.c * const.tau0)
        seq = [0]
        for k in range(1, MAX_MODES):
            seq += [k, -k]
        picked = []
        for lab in seq:
            for sector in (0, 1):
                for spin in (1, 2):
                    picked.append(Mode(sector, (lab,), spin))
        return cls(kind, tuple(picked[:n_modes]), spacing, sites, 1, const)

    def __len__(self):
        return len(self.modes)

    def index(self, mode) -> int:
        if isinstance(mode, (int, np.integer)) and not isinstance(mode, bool):
            if 0 <= mode < len(self.modes):
                return int(mode)
            raise ValueError(f"mode index {mode} out of range")
        try:
            return self._index[mode]
        except (KeyError, TypeError):
            raise ValueError(f"unknown mode {mode!r}") from None

    def vector(self, mode) -> np.ndarray:
        """Physical momentum (energy table) or position (time table) of a mode, padded to 3D."""
        m = self.modes[self.index(mode)]
        return np.pad(np.asarray(m.label, dtype=float) * self.spacing, (0, 3 - self.dim))

    def quantum(self, mode) -> float:
        v = self.vector(mode)
        if self.kind == "energy":
            return energy_eigenvalue(v, self.const)
        return time_eigenvalue(v, self.const)

    @property
    def quanta(self) -> np.ndarray:
        return np.array([self.quantum(i) for i in range(len(self))])

    @property
    def volume(self) -> float:
        """Box volume: L^d for energy tables, the momentum cell (2 pi hbar / dr)^d for time tables."""
        return (2.0 * math.pi * self.const.hbar / self.spacing) ** self.dim

    @property
    def dual_spacing(self) -> float:
        return 2.0 * math.pi * self.const.hbar / (self.sites * self.spacing)

    def name(self, mode) -> str:
        m = self.modes[self.index(mode)]
        letter = _LETTERS[self.kind][m.sector]
        return f"{letter}[{','.join(map(str, m.label))};q={m.spin}]"

    def swap_sectors(self) -> "ModeTable":
        modes = tuple(Mode(1 - m.sector, m.label, m.spin) for m in self.modes)
        return ModeTable(self.kind, modes, self.spacing, self.sites, self.dim, self.const)

    def describe(self) -> list:
        return [{"name": self.name(i), "sector": _LETTERS[self.kind][m.sector],
                 "label": list(m.label), "spin": m.spin, "quantum": float(self.quantum(i))}
                for i, m in enumerate(self.modes)]


def _sign(bits: int, i: int) -> int:
    return -1 if bin(bits & ((1 << i) - 1)).count("1") & 1 else 1


class FockState:
    """Superposition of occupation-number basis states: {bits: amplitude}."""

    __slots__ = ("table", "amplitudes")

    def __init__(self, table: ModeTable, amplitudes=None):
        self.table = table
        self.amplitudes = {b: a for b, a in (amplitudes or {}).items() if a != 0}

    @classmethod
    def vacuum(cls, table):
        return cls(table, {0: 1})

    @classmethod
    def basis(cls, table, occupied: Iterable = ()):
        bits = 0
        for m in occupied:
            bits |= 1 << table.index(m)
        return cls(table, {bits: 1})

    @classmethod
    def from_vector(cls, table, vec):
        vec = np.asarray(vec)
        if vec.shape != (1 << len(table),):
            raise ValueError("vector length must be 2^M")
        return cls(table, {int(b): complex(a) for b, a in enumerate(vec) if a != 0})

    def to_vector(self) -> np.ndarray:
        v = np.zeros(1 << len(self.table), dtype=np.complex128)
        for b, a in self.amplitudes.items():
            v[b] = a
        return v

    def is_zero(self) -> bool:
        return not self.amplitudes

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return FockState(self.table, {b: a / n for b, a in self.amplitudes.items()})

    def __add__(self, other):
        acc = dict(self.amplitudes)
        for b, a in other.amplitudes.items():
            acc[b] = acc.get(b, 0) + a
        return FockState(self.table, acc)

    def __rmul__(self, c):
        return FockState(self.table, {b: c * a for b, a in self.amplitudes.items()})

    def __neg__(self):
        return (-1) * self

    def __sub__(self, other):
        return self + (-1) * other

    def __eq__(self, other):
        if not isinstance(other, FockState):
            return NotImplemented
        return self.table is other.table and (self - other).is_zero()

    def __repr__(self):
        return f"FockState({self.amplitudes})"


def _ladder(i: int, dagger: bool, state: FockState) -> FockState:
    out = {}
    bit = 1 << i
    for b, a in state.amplitudes.items():
        occupied = bool(b & bit)
        if occupied == dagger:
            continue
        nb = b ^ bit
        out[nb] = out.get(nb, 0) + _sign(b, i) * a
    return FockState(state.table, out)


def create(mode, state: FockState) -> FockState:
    """Creation operator on ``mode``; occupied modes give the zero state."""
    return _ladder(state.table.index(mode), True, state)


def annihilate(mode, state: FockState) -> FockState:
    """Annihilation operator on ``mode``; empty modes give the zero state."""
    return _ladder(state.table.index(mode), False, state)


class SparseFockOperator:
    """Sum of coefficient * ladder word terms.

    A word is a tuple of (mode index, dagger) pairs read as an operator
    product, so the rightmost entry acts first.
    """

    def __init__(self, table: ModeTable, terms: Iterable = ()):
        self.table = table
        self.terms = [(c, tuple(w)) for c, w in terms if c != 0]
        for _, w in self.terms:
            for i, _d in w:
                if not 0 <= i < len(table):
                    raise ValueError(f"mode index {i} not in table")

    @classmethod
    def ladder(cls, table, mode, dagger: bool):
        return cls(table, [(1.0, ((table.index(mode), bool(dagger)),))])

    @classmethod
    def identity(cls, table, coef=1.0):
        return cls(table, [(coef, ())])

    def apply(self, state: FockState) -> FockState:
        out = FockState(self.table)
        for c, word in self.terms:
            s = state
            for i, d in reversed(word):
                s = _ladder(i, d, s)
                if s.is_zero():
                    break
            out = out + c * s
        return out

    def __add__(self, other):
        return SparseFockOperator(self.table, self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, c):
        return SparseFockOperator(self.table, [(c * k, w) for k, w in self.terms])

    def __matmul__(self, other):
        return SparseFockOperator(self.table, [(a * b, wa + wb) for a, wa in self.terms
                                               for b, wb in other.terms])

    def adjoint(self):
        return SparseFockOperator(self.table, [(np.conj(c), tuple((i, not d) for i, d in reversed(w)))
                                               for c, w in self.terms])

    def to_dense(self) -> np.ndarray:
        """Dense 2^M matrix built by applying the operator to every basis state."""
        m = len(self.table)
        if m > MAX_DENSE_MODES:
            raise ValueError(f"dense form limited to M <= {MAX_DENSE_MODES}")
        dim = 1 << m
        mat = np.zeros((dim, dim), dtype=np.complex128)
        for col in range(dim):
            for row, a in self.apply(FockState(self.table, {col: 1})).amplitudes.items():
                mat[row, col] = a
        return mat

    def to_sparse(self) -> sparse.csr_matrix:
        """Same matrix as ``to_dense`` in CSR form (no mode-count cap beyond MAX_MODES)."""
        dim = 1 << len(self.table)
        rows, cols, vals = [], [], []
        for col in range(dim):
            for row, a in self.apply(FockState(self.table, {col: 1})).amplitudes.items():
                rows.append(row)
                cols.append(col)
                vals.append(a)
        return sparse.csr_matrix((np.array(vals, dtype=np.complex128), (rows, cols)), shape=(dim, dim))

    def normal_ordered(self) -> dict:
        """Canonical form {word: coefficient}: creators left in ascending index,
        annihilators right in descending index, all anticommutators resolved."""
        acc = defaultdict(complex)
        stack = [(complex(c), list(w)) for c, w in self.terms]
        while stack:
            c, w = stack.pop()
            for k in range(len(w) - 1):
                (i, di), (j, dj) = w[k], w[k + 1]
                if di == dj and i == j:
                    break  # squared ladder operator vanishes
                if di == dj:
                    swap = (i > j) if di else (i < j)
                elif dj and not di:
                    swap = True  # annihilator left of creator
                else:
                    swap = False
                if swap:
                    if i == j:
                        stack.append((c, w[:k] + w[k + 2 :]))
                    stack.append((-c, w[:k] + [w[k + 1], w[k]] + w[k + 2 :]))
                    break
            else:
                acc[tuple(w)] += c
                continue
        return {w: c for w, c in acc.items() if c != 0}

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        a, b = self.normal_ordered(), self.adjoint().normal_ordered()
        return all(abs(a.get(w, 0) - b.get(w, 0)) <= tol for w in set(a) | set(b))


def jordan_wigner_annihilators(m: int) -> list:
    """Dense annihilation matrices for ``m`` modes via Jordan-Wigner strings.

    Basis index = sum_k n_k 2^k, so mode k is the k-th least significant
    tensor factor and carries a parity string over modes 0..k-1.
    """
    if m > MAX_DENSE_MODES:
        raise ValueError(f"dense form limited to M <= {MAX_DENSE_MODES}")
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    z = np.diag([1.0, -1.0])
    eye = np.eye(2)
    ops = []
    for k in range(m):
        mat = np.eye(1)
        for j in reversed(range(m)):
            mat = np.kron(mat, lower if j == k else (z if j < k else eye))
        ops.append(mat.astype(np.complex128))
    return ops


def _sparse_max(a) -> float:
    a = a.tocsr()
    return float(np.abs(a.data).max()) if a.nnz else 0.0


class AnticommutatorReport(NamedTuple):
    mode_count: int
    method: str
    checks: int
    max_deviation: float


def anticommutator_table(table: ModeTable, seed: int = 0, samples: int = 200) -> AnticommutatorReport:
    """Verify {c_i, c_j^+} = delta_ij and {c_i, c_j} = 0 over all mode pairs.

    Dense 2^M matrices are used for M <= 10; larger tables fall back to
    ``samples`` random superpositions checked at state level.
    """
    m = len(table)
    if m <= MAX_DENSE_MODES:
        ann = [SparseFockOperator.ladder(table, i, False).to_sparse() for i in range(m)]
        eye = sparse.identity(1 << m, format="csr")
        worst, checks = 0.0, 0
        for i in range(m):
            for j in range(m):
                ad = ann[j].conj().T
                d1 = ann[i] @ ad + ad @ ann[i] - (i == j) * eye
                d2 = ann[i] @ ann[j] + ann[j] @ ann[i]
                worst = max(worst, _sparse_max(d1), _sparse_max(d2))
                checks += 2
        return AnticommutatorReport(m, "dense", checks, float(worst))
    rng = np.random.default_rng(seed)
    worst, checks = 0.0, 0
    for _ in range(samples):
        keys = rng.integers(0, 1 << m, size=4)
        state = FockState(table, {int(k): complex(*rng.normal(size=2)) for k in keys})
        i, j = (int(v) for v in rng.integers(0, m, size=2))
        for di, dj, expect in ((False, True, i == j), (False, False, False), (True, True, False)):
            lhs = _ladder(i, di, _ladder(j, dj, state)) + _ladder(j, dj, _ladder(i, di, state))
            diff = lhs - (state if expect else FockState(table))
            worst = max(worst, diff.norm())
            checks += 1
    return AnticommutatorReport(m, "randomized", checks, float(worst))


def _number_term(i):
    return ((i, True), (i, False))


def _observable(table, weights, normal_ordered):
    terms = []
    for i, (m, w) in enumerate(zip(table.modes, weights)):
        if m.sector == 0 or normal_ordered:
            terms.append((w, _number_term(i)))
        else:
            terms.append((-w, ((i, False), (i, True))))
    return SparseFockOperator(table, terms)


def _require(table, kind, what):
    if table.kind != kind:
        raise ValueError(f"{what} needs a {kind} table, got {table.kind}")


def build_hamiltonian(table: ModeTable, normal_ordered: bool = True) -> SparseFockOperator:
    """H = sum e_p (b^+ b + d^+ d); with normal_ordered=False the
    antiparticle term is -e_p d d^+ and the vacuum sits at -sum e_p."""
    _require(table, "energy", "build_hamiltonian")
    return _observable(table, table.quanta, normal_ordered)


def build_total_momentum(table: ModeTable, normal_ordered: bool = True) -> list:
    """One operator per axis: P_k = sum p_k (b^+ b + d^+ d)."""
    _require(table, "energy", "build_total_momentum")
    vecs = np.array([table.vector(i) for i in range(len(table))])
    return [_observable(table, vecs[:, k], normal_ordered) for k in range(table.dim)]


def build_T0(table: ModeTable, normal_ordered: bool = True) -> SparseFockOperator:
    """T0 = sum t_r (a^+ a + c^+ c); non-normal-ordered form uses -t_r c c^+."""
    _require(table, "time", "build_T0")
    return _observable(table, table.quanta, normal_ordered)


def build_cT(table: ModeTable, normal_ordered: bool = True) -> list:
    """One operator per axis: c T_k = sum r_k (a^+ a + c^+ c)."""
    _require(table, "time", "build_cT")
    vecs = np.array([table.vector(i) for i in range(len(table))])
    return [_observable(table, vecs[:, k], normal_ordered) for k in range(table.dim)]


def build_number(table: ModeTable) -> SparseFockOperator:
    return _observable(table, np.ones(len(table)), True)


def spectrum(op: SparseFockOperator) -> np.ndarray:
    """Sorted eigenvalues of a Hermitian operator from its dense matrix."""
    mat = op.to_dense()
    if not np.allclose(mat, mat.conj().T, atol=1e-12):
        raise ValueError("operator is not Hermitian")
    return np.linalg.eigvalsh(mat)


def occupied_sums(table: ModeTable) -> np.ndarray:
    """Sum of occupied-mode quanta for each basis state, indexed by bits."""
    q = table.quanta
    m = len(table)
    bits = np.arange(1 << m)
    occ = (bits[:, None] >> np.arange(m)[None, :]) & 1
    return occ @ q


def field_prefactor(table: ModeTable, mode) -> float:
    """(m0c^2 / V e_p)^(1/2) for energy tables, (tau0 / V t_r)^(1/2) for time tables."""
    gap = table.const.rest_energy if table.kind == "energy" else table.const.tau0
    return math.sqrt(gap / (table.volume * table.quantum(mode)))


def _on_lattice(vec, spacing, what):
    vec = np.atleast_1d(np.asarray(vec, dtype=float))
    k = vec / spacing
    if np.any(np.abs(k - np.round(k)) > 1e-9 * max(1.0, float(np.max(np.abs(k))))):
        raise ValueError(f"{what} {vec.tolist()} is not on the lattice with spacing {spacing}")
    return vec


def field_operator(point, table: ModeTable, time: float = 0.0) -> list:
    """The four spinor components of the field operator at a lattice point.

    Energy tables: Psi(r, t) = sum (m0c^2/V e_p)^(1/2) [b u_q(p) e^{i(p.r - e_p t)/hbar}
    + d^+ w_q(p) e^{-i(p.r - e_p t)/hbar}]. Time tables give the analogous
    Phi(p, e) with a, c, time spinors, t_r and the roles of r and p swapped;
    ``time`` is then the energy coordinate.
    """
    vec = _on_lattice(point, table.dual_spacing, "point")
    if vec.size != table.dim:
        raise ValueError(f"point must have {table.dim} components")
    hbar = table.const.hbar
    spinor = energy_spinor if table.kind == "energy" else time_spinor
    comps = [[] for _ in range(4)]
    for i, m in enumerate(table.modes):
        mv = table.vector(i)
        phase = np.exp(1j * (float(mv[: table.dim] @ vec) - table.quantum(i) * time) / hbar)
        pref = field_prefactor(table, i)
        if m.sector == 0:
            s, coef, word = spinor(mv, m.spin, "+", table.const), pref * phase, ((i, False),)
        else:
            s, coef, word = spinor(mv, m.spin, "-", table.const), pref * np.conj(phase), ((i, True),)
        for a in range(4):
            comps[a].append((coef * s[a], word))
    return [SparseFockOperator(table, c) for c in comps]


def displacement_identity_check(table: ModeTable, shift, shift0: float = 0.0, points=None) -> float:
    """max || U F(x) U^+ - F(x + a) || with U = exp(i (a0 G0 - a.G) / hbar).

    Energy tables use G0 = H, G = P and the field Psi(r, t); time tables use
    G0 = T0, G = T (= cT / c) and Phi(p, e). The spatial shift must be a
    lattice vector of the conjugate lattice; ``shift0`` is unrestricted.
    ``points`` defaults to every site of the conjugate lattice.
    """
    if len(table) > MAX_DENSE_MODES:
        raise ValueError(f"dense check limited to M <= {MAX_DENSE_MODES}")
    a = _on_lattice(shift, table.dual_spacing, "shift")
    if a.size != table.dim:
        raise ValueError(f"shift must have {table.dim} components")
    const = table.const
    if table.kind == "energy":
        g0, gv, scale = build_hamiltonian(table), build_total_momentum(table), 1.0
    else:
        g0, gv, scale = build_T0(table), build_cT(table), 1.0 / const.c
    gen = shift0 * g0.to_dense()
    for k in range(table.dim):
        gen = gen - a[k] * scale * gv[k].to_dense()
    u = expm(1j * gen / const.hbar)
    if points is None:
        points = [np.array(p, dtype=float) * table.dual_spacing
                  for p in itertools.product(range(table.sites), repeat=table.dim)]
    worst = 0.0
    for x in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lhs = field_operator(x, table)
        rhs = field_operator(x + a, table, time=shift0)
        for fl, fr in zip(lhs, rhs):
            d = u @ fl.to_dense() @ u.conj().T - fr.to_dense()
            worst = max(worst, float(np.abs(d).max()))
    return worst


def spectrum_document(table: ModeTable, observable: str) -> dict:
    """JSON-ready {modes, observable, eigenvalues} for 'H' or 'T0'."""
    op = build_hamiltonian(table) if observable == "H" else build_T0(table)
    return {"modes": table.describe(), "observable": observable,
            "eigenvalues": [float(v) for v in spectrum(op)]}

import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from diractime import fock as fk
from diractime.algebra import DEFAULT_CONSTANTS as C
from diractime.algebra import PhysicalConstants
from diractime.spinors import energy_eigenvalue, energy_spinor, time_eigenvalue, time_spinor

import oracles

TAU0 = C.tau0


def small_energy(labels=(0, 1), spacing=0.5, sites=2, **kw):
    return fk.ModeTable.energy(labels, spacing, sites, **kw)


def small_time(labels=(0, 1), spacing=0.5 * TAU0, sites=2, **kw):
    return fk.ModeTable.time(labels, spacing, sites, **kw)


class TestModeTable:
    def test_modes_are_sorted_and_indexed(self):
        t = small_energy()
        assert len(t) == 8
        assert t.modes == tuple(sorted(t.modes))
        for i, m in enumerate(t.modes):
            assert t.index(m) == i and t.index(i) == i

    def test_quanta_floors(self):
        assert np.all(small_energy(labels=(0, 1, -2)).quanta >= C.rest_energy)
        assert np.all(small_time(labels=(0, 3, -1)).quanta >= TAU0)
        assert small_time().quantum(fk.Mode(0, (0,), 1)) == TAU0

    @pytest.mark.parametrize("bad", [
        dict(kind="spin"), dict(spacing=0.0), dict(sites=0), dict(labels=list(range(6))),
    ])
    def test_validation(self, bad):
        args = dict(kind="energy", labels=(0, 1), spacing=0.5, sites=2)
        args.update(bad)
        with pytest.raises(ValueError):
            fk.ModeTable.build(args["kind"], args["labels"], args["spacing"], args["sites"])

    def test_duplicate_labels(self):
        with pytest.raises(ValueError):
            fk.ModeTable.energy([0, 0], 0.5, 2)

    def test_default_table(self):
        t = fk.ModeTable.default("energy", 6)
        assert len(t) == 6
        assert {m.label for m in t.modes} == {(0,), (1,)}
        assert t.name(0) == "b[0;q=1]"
        assert fk.ModeTable.default("time", 2).name(0) == "a[0;q=1]"

    def test_unknown_mode(self):
        t = small_energy()
        with pytest.raises(ValueError):
            t.index(fk.Mode(0, (7,), 1))
        with pytest.raises(ValueError):
            t.index(99)
        with pytest.raises(ValueError):
            fk.create(fk.Mode(1, (5,), 2), fk.FockState.vacuum(t))


class TestLadder:
    def test_create_on_vacuum(self):
        t = small_energy()
        s = fk.create(0, fk.FockState.vacuum(t))
        assert s.amplitudes == {1: 1}

    def test_pauli_exclusion(self):
        t = small_energy()
        vac = fk.FockState.vacuum(t)
        assert fk.create(0, fk.create(0, vac)).is_zero()
        assert fk.annihilate(3, vac).is_zero()

    def test_antisymmetry(self):
        t = small_energy()
        vac = fk.FockState.vacuum(t)
        assert fk.create(1, fk.create(0, vac)) == -fk.create(0, fk.create(1, vac))

    def test_sign_counts_lower_modes(self):
        t = small_energy()
        s = fk.FockState.basis(t, [0, 2, 5])
        assert fk.annihilate(5, s).amplitudes == {0b101: 1}
        assert fk.annihilate(2, s).amplitudes == {0b100001: -1}

    def test_state_algebra(self):
        t = small_energy()
        a = fk.FockState.basis(t, [1])
        b = fk.FockState.basis(t, [2])
        s = (a + 1j * b).normalized()
        assert abs(s.norm() - 1) < 1e-15
        assert fk.FockState.from_vector(t, s.to_vector()) == s
        with pytest.raises(ValueError):
            fk.FockState(t).normalized()
        with pytest.raises(ValueError):
            fk.FockState.from_vector(t, np.zeros(3))


class TestAnticommutators:
    def test_two_modes_exact(self):
        t = fk.ModeTable.energy([0], 0.5, 2, spins=(1,))
        rep = fk.anticommutator_table(t)
        assert rep.mode_count == 2 and rep.method == "dense" and rep.max_deviation == 0.0

    def test_mixed_sectors_dense(self):
        rep = fk.anticommutator_table(small_energy())
        assert rep.max_deviation == 0.0 and rep.checks == 2 * 8 * 8

    def test_six_modes_random_states_against_dense_oracle(self):
        t = fk.ModeTable.default("energy", 6)
        ops = oracles.jw_annihilators(6)
        rng = np.random.default_rng(5)
        for _ in range(50):
            vec = rng.normal(size=64) + 1j * rng.normal(size=64)
            state = fk.FockState.from_vector(t, vec)
            i, j = (int(v) for v in rng.integers(0, 6, size=2))
            got = fk.annihilate(i, fk.create(j, state)) + fk.create(j, fk.annihilate(i, state))
            ref = (ops[i] @ ops[j].T + ops[j].T @ ops[i]) @ vec
            assert np.abs(got.to_vector() - ref).max() < 1e-14
            assert np.abs(got.to_vector() - (i == j) * vec).max() < 1e-14
        assert fk.anticommutator_table(t).max_deviation == 0.0

    def test_large_table_uses_randomized_check(self):
        rep = fk.anticommutator_table(fk.ModeTable.default("energy", 12), seed=3, samples=100)
        assert rep.method == "randomized" and rep.checks == 300 and rep.max_deviation == 0.0

    def test_cross_sector_words_vanish(self):
        t = small_energy()
        b = fk.SparseFockOperator.ladder(t, fk.Mode(0, (1,), 2), False)
        d = fk.SparseFockOperator.ladder(t, fk.Mode(1, (0,), 1), False)
        anti = (b @ d + d @ b).to_dense()
        anti_dag = (b @ d.adjoint() + d.adjoint() @ b).to_dense()
        assert np.abs(anti).max() == 0 and np.abs(anti_dag).max() == 0

    def test_jw_construction_matches_oracle(self):
        for a, b in zip(fk.jordan_wigner_annihilators(5), oracles.jw_annihilators(5)):
            assert np.array_equal(a, b)

    def test_random_words_against_oracle(self):
        m = 8
        t = fk.ModeTable.default("energy", m)
        ann = oracles.jw_annihilators(m)
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(1000):
            word = tuple((int(rng.integers(m)), bool(rng.integers(2))) for _ in range(rng.integers(1, 6)))
            keys = rng.integers(0, 1 << m, size=3)
            state = fk.FockState(t, {int(k): complex(*rng.normal(size=2)) for k in keys})
            got = fk.SparseFockOperator(t, [(1.0, word)]).apply(state).to_vector()
            ref = state.to_vector()
            for i, d in reversed(word):
                ref = (ann[i].T if d else ann[i]) @ ref
            worst = max(worst, np.abs(got - ref).max())
        assert worst == 0.0


class TestOperatorAlgebra:
    def test_adjoint_and_hermiticity(self):
        t = small_energy()
        b0 = fk.SparseFockOperator.ladder(t, 0, False)
        assert not b0.is_hermitian()
        assert (b0 + b0.adjoint()).is_hermitian()
        assert fk.build_hamiltonian(t).is_hermitian()
        assert np.allclose(b0.adjoint().to_dense(), b0.to_dense().conj().T)

    def test_normal_ordering_resolves_anticommutator(self):
        t = small_energy()
        op = fk.SparseFockOperator(t, [(1.0, ((2, False), (2, True)))])
        assert op.normal_ordered() == {(): 1, ((2, True), (2, False)): -1}
        swap = fk.SparseFockOperator(t, [(1.0, ((1, True), (3, True)))])
        assert swap.normal_ordered() == {((1, True), (3, True)): 1}
        rev = fk.SparseFockOperator(t, [(1.0, ((3, True), (1, True)))])
        assert rev.normal_ordered() == {((1, True), (3, True)): -1}
        assert fk.SparseFockOperator(t, [(1.0, ((4, True), (4, True)))]).normal_ordered() == {}

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 5), st.booleans()), min_size=1, max_size=5))
    def test_normal_ordering_preserves_matrix(self, word):
        t = fk.ModeTable.default("energy", 6)
        op = fk.SparseFockOperator(t, [(0.7 - 0.2j, tuple(word))])
        ordered = fk.SparseFockOperator(t, [(c, w) for w, c in op.normal_ordered().items()])
        assert np.abs(op.to_dense() - ordered.to_dense()).max() < 1e-14

    def test_sparse_equals_dense(self):
        t = small_energy()
        h = fk.build_hamiltonian(t)
        assert np.array_equal(h.to_sparse().toarray(), h.to_dense())

    def test_dense_cap(self):
        t = fk.ModeTable.default("energy", 12)
        with pytest.raises(ValueError):
            fk.build_number(t).to_dense()


class TestObservables:
    def test_vacuum_energy_is_zero(self):
        t = small_energy()
        assert fk.build_hamiltonian(t).apply(fk.FockState.vacuum(t)).is_zero()

    def test_particle_antiparticle_pair_energy(self):
        t = small_energy()
        b = fk.Mode(0, (0,), 1)
        d = fk.Mode(1, (1,), 2)
        s = fk.create(b, fk.create(d, fk.FockState.vacuum(t)))
        hs = fk.build_hamiltonian(t).apply(s)
        e = energy_eigenvalue(0.0) + energy_eigenvalue(0.5)
        assert np.abs(hs.to_vector() - e * s.to_vector()).max() < 1e-14
        spec = fk.spectrum(fk.build_hamiltonian(t))
        assert np.any(np.abs(spec - e) < 1e-12)

    def test_non_normal_ordered_vacuum(self):
        t = small_energy()
        h = fk.build_hamiltonian(t, normal_ordered=False)
        vac = fk.FockState.vacuum(t)
        shift = -sum(t.quantum(i) for i, m in enumerate(t.modes) if m.sector == 1)
        assert np.abs(h.apply(vac).to_vector() - shift * vac.to_vector()).max() < 1e-14
        assert shift < 0

    def test_spectrum_is_sum_of_occupied_quanta(self):
        t = fk.ModeTable.default("energy", 10)
        spec = fk.spectrum(fk.build_hamiltonian(t))
        assert np.abs(spec - np.sort(fk.occupied_sums(t))).max() < 1e-12
        assert spec.min() == 0.0

    def test_single_time_mode(self):
        t = small_time()
        mode = fk.Mode(0, (1,), 2)
        s = fk.create(mode, fk.FockState.vacuum(t))
        tr = time_eigenvalue(0.5 * TAU0)
        assert abs(tr - math.hypot(0.5 * TAU0, TAU0)) < 1e-14
        out = fk.build_T0(t).apply(s)
        assert np.abs(out.to_vector() - tr * s.to_vector()).max() < 1e-14

    def test_time_pair_both_sectors_positive(self):
        t = small_time()
        s = fk.FockState.basis(t, [fk.Mode(0, (0,), 1), fk.Mode(1, (1,), 1)])
        out = fk.build_T0(t).apply(s)
        expect = TAU0 + time_eigenvalue(0.5 * TAU0)
        assert np.abs(out.to_vector() - expect * s.to_vector()).max() < 1e-13

    def test_T0_floor_by_particle_number(self):
        t = fk.ModeTable.default("time", 10)
        t0 = fk.occupied_sums(t)
        n = np.array([bin(b).count("1") for b in range(1 << 10)])
        assert np.all(t0 >= n * TAU0 - 1e-12)

    def test_cT_eigenvalues(self):
        t = small_time()
        s = fk.FockState.basis(t, [fk.Mode(0, (1,), 1), fk.Mode(1, (1,), 2)])
        (ct,) = fk.build_cT(t)
        out = ct.apply(s)
        assert np.abs(out.to_vector() - 2 * 0.5 * TAU0 * s.to_vector()).max() < 1e-13

    def test_observables_commute(self):
        t = small_energy()
        ops = [fk.build_hamiltonian(t).to_dense(), fk.build_total_momentum(t)[0].to_dense(),
               fk.build_number(t).to_dense()]
        for a, b in itertools.combinations(ops, 2):
            assert np.abs(a @ b - b @ a).max() == 0

    def test_sector_swap_leaves_spectrum(self):
        t = fk.ModeTable.default("energy", 8)
        a = fk.spectrum(fk.build_hamiltonian(t))
        b = fk.spectrum(fk.build_hamiltonian(t.swap_sectors()))
        assert np.abs(a - b).max() < 1e-12

    def test_sector_mismatch(self):
        with pytest.raises(ValueError):
            fk.build_hamiltonian(small_time())
        with pytest.raises(ValueError):
            fk.build_T0(small_energy())
        with pytest.raises(ValueError):
            fk.build_cT(small_energy())
        with pytest.raises(ValueError):
            fk.build_total_momentum(small_time())

    def test_spectrum_rejects_non_hermitian(self):
        t = small_energy()
        with pytest.raises(ValueError):
            fk.spectrum(fk.SparseFockOperator.ladder(t, 0, True))

    @pytest.mark.parametrize("m0", [0.5, 2.0])
    def test_mass_scaling(self, m0):
        c = PhysicalConstants(m0=m0)
        t = fk.ModeTable.default("energy", 4, const=c)
        assert fk.spectrum(fk.build_hamiltonian(t))[1] == pytest.approx(m0)


class TestFieldOperator:
    def test_vacuum_content_is_antiparticle_only(self):
        t = small_energy(labels=(0,), spins=(1,))
        vac = fk.FockState.vacuum(t)
        d_mode = t.index(fk.Mode(1, (0,), 1))
        for comp in fk.field_operator(0.0, t):
            out = comp.apply(vac)
            assert set(out.amplitudes) <= {1 << d_mode}
        w = energy_spinor(0.0, 1, "-")
        vals = [comp.apply(vac).amplitudes.get(1 << d_mode, 0) for comp in fk.field_operator(0.0, t)]
        assert np.allclose(vals, fk.field_prefactor(t, d_mode) * w)

    def test_rest_prefactor(self):
        t = small_energy()
        assert math.isclose(fk.field_prefactor(t, 0), t.volume ** -0.5, rel_tol=1e-15)
        tt = small_time()
        assert math.isclose(fk.field_prefactor(tt, 0), tt.volume ** -0.5, rel_tol=1e-15)

    def test_two_site_propagator_matches_hand_sum(self):
        t = small_energy(labels=(0, 1), spins=(1,), sectors=("particle",))
        L = t.dual_spacing
        r, rp = 0.0, L
        psi, psi_p = fk.field_operator(r, t), fk.field_operator(rp, t)
        vac = fk.FockState.vacuum(t)
        for a, b in itertools.product(range(4), repeat=2):
            got = psi[a].apply(psi_p[b].adjoint().apply(vac)).amplitudes.get(0, 0)
            hand = 0.0
            for i in range(2):
                for j in range(2):
                    if i != j:
                        continue  # <0| b_i b_j^+ |0> = delta_ij
                    p_i, p_j = 0.5 * i, 0.5 * j
                    u_i, u_j = energy_spinor(p_i, 1, "+"), energy_spinor(p_j, 1, "+")
                    n_i = math.sqrt(1.0 / (t.volume * energy_eigenvalue(p_i)))
                    n_j = math.sqrt(1.0 / (t.volume * energy_eigenvalue(p_j)))
                    hand += n_i * n_j * u_i[a] * np.conj(u_j[b]) * np.exp(1j * (p_i * r - p_j * rp))
            assert abs(got - hand) < 1e-14

    @pytest.mark.parametrize("factory", [small_energy, small_time])
    def test_equal_point_anticommutator(self, factory):
        t = factory(spins=(1, 2))
        x = t.dual_spacing
        comps = fk.field_operator(x, t)
        dense = [c.to_dense() for c in comps]
        expect = np.zeros((4, 4), complex)
        spinor = energy_spinor if t.kind == "energy" else time_spinor
        for i, m in enumerate(t.modes):
            s = spinor(t.vector(i), m.spin, "+" if m.sector == 0 else "-")
            expect += fk.field_prefactor(t, i) ** 2 * np.outer(s, s.conj())
        eye = np.eye(1 << len(t))
        for a, b in itertools.product(range(4), repeat=2):
            anti = dense[a] @ dense[b].conj().T + dense[b].conj().T @ dense[a]
            assert np.abs(anti - expect[a, b] * eye).max() < 1e-14

    def test_off_lattice_point(self):
        t = small_energy()
        with pytest.raises(ValueError):
            fk.field_operator(0.3 * t.dual_spacing, t)
        with pytest.raises(ValueError):
            fk.field_operator((0.0, 0.0), t)


class TestDisplacement:
    def test_zero_shift(self):
        assert fk.displacement_identity_check(small_energy(), 0.0) == 0.0

    def test_two_site_particle_shift(self):
        t = small_energy(spins=(1,), sectors=("particle",))
        assert fk.displacement_identity_check(t, t.dual_spacing) < 1e-10

    def test_full_energy_table_with_time_shift(self):
        t = fk.ModeTable.default("energy", 8)
        assert fk.displacement_identity_check(t, t.dual_spacing, shift0=0.37) < 1e-10

    def test_time_table_shift(self):
        t = small_time(spins=(1,))
        assert fk.displacement_identity_check(t, t.dual_spacing) < 1e-10
        assert fk.displacement_identity_check(t, -t.dual_spacing, shift0=1.3) < 1e-10

    def test_3d_table(self):
        t = fk.ModeTable.energy([(0, 0, 0), (1, 0, 0)], 0.5, 2, spins=(1,))
        assert fk.displacement_identity_check(t, (t.dual_spacing, 0.0, 0.0)) < 1e-10

    def test_opposite_generator_sign_fails(self):
        t = small_energy(spins=(1,), sectors=("particle",), sites=4)
        x = t.dual_spacing
        g = fk.build_total_momentum(t)[0].to_dense()
        u = expm(1j * x * g)  # e^{+i a P}: wrong sign for a forward shift
        lhs = u @ fk.field_operator(0.0, t)[0].to_dense() @ u.conj().T
        rhs = fk.field_operator(x, t)[0].to_dense()
        assert np.abs(lhs - rhs).max() > 1e-3
        assert fk.displacement_identity_check(t, x, points=[0.0]) < 1e-10

    def test_non_commensurate_shift(self):
        t = small_energy()
        with pytest.raises(ValueError):
            fk.displacement_identity_check(t, 0.5 * t.dual_spacing)


def test_spectrum_document_is_json():
    t = fk.ModeTable.default("time", 4)
    doc = fk.spectrum_document(t, "T0")
    again = json.loads(json.dumps(doc))
    assert again["observable"] == "T0"
    assert len(again["eigenvalues"]) == 16
    assert again["eigenvalues"][0] == 0.0
    assert again["modes"][0]["sector"] == "a"

import math

import numpy as np
import pytest

from qed2x import ecm, greens, hierarchy, model, oracle

LAM = 2 * math.pi / 10.0


def make_coupling(q=3, rule="gauss-legendre", d_eff=0.224):
    emitters = [model.EmitterSpec(position=0.74, omega=10.0, d_eff=d_eff),
                model.EmitterSpec(position=0.76, omega=10.0, d_eff=d_eff)]
    grid = model.build_grid(5.0, 15.0, q, rule)
    env = greens.EnvironmentSpec(kind="mirrored-waveguide", lambda_a=LAM)
    table = greens.im_greens_matrix(env, np.array([0.74 * LAM, 0.76 * LAM]), grid)
    overlap = ecm.build_overlap(table, emitters, LAM)
    basis = ecm.diagonalize_overlap(overlap, grid.nodes)
    return ecm.couplings(basis, emitters, grid)


class TestBasis:
    def test_dimension_counting(self):
        b = oracle.TwoExcitationBasis(n=2, m=6)
        # N(N-1)/2 + N*NQ + NQ(NQ+1)/2 with NQ = 6
        assert b.dim == 1 + 12 + 21

    def test_state_vector_round_trip(self):
        rng = np.random.default_rng(1)
        n, m = 2, 6
        st = hierarchy.empty_state(n, m)
        c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        st.c = c + c.T
        np.fill_diagonal(st.c, 0.0)
        st.b = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
        d = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        st.d = d + d.T
        basis = oracle.TwoExcitationBasis(n=n, m=m)
        v = oracle.state_to_vector(st, basis)
        back = oracle.vector_to_state(v, basis)
        assert np.abs(back.c - st.c).max() < 1e-14
        assert np.abs(back.b - st.b).max() < 1e-14
        assert np.abs(back.d - st.d).max() < 1e-14

    def test_norm_equivalence(self):
        # unit hierarchy norm maps to a unit basis vector
        rng = np.random.default_rng(2)
        n, m = 2, 4
        st = hierarchy.empty_state(n, m)
        st.c[0, 1] = st.c[1, 0] = 0.5
        st.b = 0.1 * (rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m)))
        d = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        st.d = 0.2 * (d + d.T)
        basis = oracle.TwoExcitationBasis(n=n, m=m)
        v = oracle.state_to_vector(st, basis)
        assert np.sum(np.abs(v) ** 2) == pytest.approx(st.total_norm(), rel=1e-12)


class TestHamiltonian:
    def test_hermitian(self):
        h, _ = oracle.assemble_hamiltonian(make_coupling())
        assert np.abs(h - h.conj().T).max() == 0.0

    def test_diagonal_when_uncoupled(self):
        coup = make_coupling()
        coup.g_weighted[:] = 0.0
        h, _ = oracle.assemble_hamiltonian(coup)
        assert np.abs(h - np.diag(np.diag(h))).max() == 0.0

    def test_diagonal_energies(self):
        coup = make_coupling()
        h, basis = oracle.assemble_hamiltonian(coup)
        wal = hierarchy.mode_frequencies(coup)
        i = basis.idx_ee[(0, 1)]
        assert h[i, i] == pytest.approx(20.0)
        j = basis.idx_dbl[3]
        assert h[j, j] == pytest.approx(2 * wal[3])

    def test_guard(self):
        coup = make_coupling(q=40)   # 2 * 40 = 80 modes > 64
        with pytest.raises(ValueError, match="limited"):
            oracle.assemble_hamiltonian(coup)


class TestEvolution:
    def test_time_zero_identity(self):
        coup = make_coupling()
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 6)
        out = oracle.exact_evolve(coup, st, [0.0])[0]
        assert np.abs(out.c - st.c).max() < 1e-12

    def test_unitarity(self):
        coup = make_coupling()
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 6)
        for out in oracle.exact_evolve(coup, st, [1.0, 5.0, 20.0]):
            assert out.total_norm() == pytest.approx(1.0, abs=1e-12)

    def test_energy_conservation(self):
        coup = make_coupling()
        h, basis = oracle.assemble_hamiltonian(coup)
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 6)
        vals = []
        for out in oracle.exact_evolve(coup, st, [0.0, 3.0, 11.0]):
            v = oracle.state_to_vector(out, basis)
            vals.append((v.conj() @ h @ v).real)
        assert np.abs(np.diff(vals)).max() < 1e-10 * abs(vals[0])

    def test_matches_hierarchy(self):
        coup = make_coupling(q=8, rule="trapezoid")
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 16)
        t_end = 5.0
        fin, rec = hierarchy.evolve(coup, st, t_end, 0.002, n_samples=5)
        ex = oracle.exact_evolve(coup, st, [t_end])[0]
        phase = np.exp(-2j * rec["omega_ref"] * t_end)
        assert np.abs(fin.c * phase - ex.c).max() < 1e-6
        assert np.abs(fin.b * phase - ex.b).max() < 1e-6
        assert np.abs(fin.d * phase - ex.d).max() < 1e-6

    def test_sector_probabilities_match(self):
        coup = make_coupling(q=8, rule="trapezoid")
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 16)
        fin, _ = hierarchy.evolve(coup, st, 4.0, 0.002)
        ex = oracle.exact_evolve(coup, st, [4.0])[0]
        for a, b in zip(fin.sector_norms(), ex.sector_norms()):
            assert a == pytest.approx(b, abs=1e-8)

    def test_broken_double_occupancy_mapping_is_detected(self):
        # dropping the sqrt(2) bosonic factor must break the equivalence:
        # guards against silently inconsistent amplitude conventions
        coup = make_coupling(q=8, rule="trapezoid")
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 16)
        t_end = 5.0
        fin, rec = hierarchy.evolve(coup, st, t_end, 0.002)
        h, basis = oracle.assemble_hamiltonian(coup)
        gt = coup.flat_weighted()
        for (a, al), i in basis.idx_eb.items():      # undo the sqrt(2)
            j = basis.idx_dbl[al]
            h[i, j] = gt[a, al]
            h[j, i] = np.conj(gt[a, al])
        vals, vecs = np.linalg.eigh(h)
        v0 = vecs.conj().T @ oracle.state_to_vector(st, basis)
        v = vecs @ (np.exp(-1j * vals * t_end) * v0)
        broken = oracle.vector_to_state(v, basis)
        phase = np.exp(-2j * rec["omega_ref"] * t_end)
        err = np.abs(fin.d * phase - broken.d).max()
        assert err > 1e-6

import math

import numpy as np
import pytest

from qed2x import ecm, greens, hierarchy, model

LAM = 2 * math.pi / 10.0


@pytest.fixture(scope="module")
def small_coupling():
    emitters = [model.EmitterSpec(position=0.74, omega=10.0, d_eff=0.224),
                model.EmitterSpec(position=0.76, omega=10.0, d_eff=0.224)]
    grid = model.build_grid(5.0, 15.0, 6)
    env = greens.EnvironmentSpec(kind="mirrored-waveguide", lambda_a=LAM)
    table = greens.im_greens_matrix(env, np.array([0.74 * LAM, 0.76 * LAM]), grid)
    overlap = ecm.build_overlap(table, emitters, LAM)
    basis = ecm.diagonalize_overlap(overlap, grid.nodes)
    return ecm.couplings(basis, emitters, grid)


def random_state(n, m, seed=0, symmetric_d=True):
    rng = np.random.default_rng(seed)
    c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    c = c + c.T
    np.fill_diagonal(c, 0.0)
    b = rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))
    d = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    if symmetric_d:
        d = d + d.T
    return hierarchy.HierarchyState(c, b, d, 0.0)


class TestInitState:
    def test_pair_excited(self):
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 3]}, 3, 6)
        assert st.c[0, 2] == 1.0 and st.c[2, 0] == 1.0
        assert st.total_norm() == pytest.approx(1.0)

    def test_named_product(self):
        st = hierarchy.init_state({"kind": "named-product", "pattern": "gee"}, 3, 6)
        assert st.c[1, 2] == 1.0

    def test_dicke_wbar(self):
        st = hierarchy.init_state({"kind": "dicke-wbar"}, 3, 6)
        assert st.c[0, 1] == pytest.approx(1 / math.sqrt(3))
        assert st.total_norm() == pytest.approx(1.0)

    def test_custom_c(self):
        v = 1 / math.sqrt(2)
        st = hierarchy.init_state(
            {"kind": "custom-c", "amplitudes": [[1, 2, v, 0.0], [1, 3, 0.0, v]]},
            3, 6)
        assert st.c[0, 2] == pytest.approx(1j * v)
        assert st.total_norm() == pytest.approx(1.0)

    @pytest.mark.parametrize("spec,match", [
        ({"kind": "pair-excited", "pair": [1, 1]}, "distinct"),
        ({"kind": "pair-excited", "pair": [1, 9]}, "out of range"),
        ({"kind": "named-product", "pattern": "geg"}, "exactly two"),
        ({"kind": "named-product", "pattern": "xx"}, "does not match"),
        ({"kind": "dicke-wbar"}, "three emitters"),
        ({"kind": "custom-c", "amplitudes": [[1, 2, 0.1, 0.0]]}, "norm"),
        ({"kind": "bogus"}, "unknown"),
    ])
    def test_invalid_kind(self, spec, match):
        n = 2 if spec.get("kind") != "named-product" or spec.get("pattern") == "xx" else 3
        n = 3 if spec.get("kind") == "named-product" and spec.get("pattern") == "geg" else n
        with pytest.raises(hierarchy.StateError, match=match):
            hierarchy.init_state(spec, n, 4)


class TestRhs:
    def test_norm_conservation_is_structural(self, small_coupling):
        # Re<state, d(state)/dt> = 0 for any state: the flow is norm-preserving
        st = random_state(2, 12, seed=3)
        k = hierarchy.rhs(st, small_coupling, omega_ref=10.0)
        inner = (0.5 * np.sum(np.conj(st.c) * k.c)
                 + np.sum(np.conj(st.b) * k.b)
                 + 0.5 * np.sum(np.conj(st.d) * k.d))
        assert abs(inner.real) < 1e-12 * st.total_norm()

    def test_fast_path_matches_reference(self, small_coupling):
        st = random_state(2, 12, seed=4)
        ref = hierarchy.rhs(st, small_coupling, omega_ref=10.0)
        f = hierarchy._FastRhs(small_coupling, 10.0)
        out = np.empty(f.size, dtype=complex)
        f(hierarchy.pack(st), out)
        fast = hierarchy.unpack(out, 2, 12, 0.0)
        assert np.abs(fast.c - ref.c).max() < 1e-12
        assert np.abs(fast.b - ref.b).max() < 1e-12
        assert np.abs(fast.d - ref.d).max() < 1e-12

    def test_symmetries_preserved_by_rhs(self, small_coupling):
        st = random_state(2, 12, seed=5)
        k = hierarchy.rhs(st, small_coupling)
        np.testing.assert_allclose(k.c, k.c.T, atol=1e-14)
        np.testing.assert_allclose(k.d, k.d.T, atol=1e-14)
        assert np.all(np.diag(k.c) == 0)


class TestStepping:
    def test_step_guard(self, small_coupling):
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 12)
        with pytest.raises(hierarchy.StepSizeError, match="step-too-large"):
            hierarchy.rk4_step(st, small_coupling, 1.0)
        # explicit override is allowed
        hierarchy.rk4_step(st, small_coupling, 1.0, omega_ref=10.0,
                           allow_large_step=True)

    def test_evolve_conserves_norm(self, small_coupling):
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 12)
        fin, rec = hierarchy.evolve(small_coupling, st, 5.0, 0.005, n_samples=50)
        assert np.abs(rec["p_tot"] - 1.0).max() < 1e-9
        assert rec["d_asymmetry"].max() < 1e-13
        assert fin.t == pytest.approx(5.0)

    def test_fourth_order_convergence(self, small_coupling):
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 12)
        fins = []
        for dt in (0.02, 0.01):
            fin, _ = hierarchy.evolve(small_coupling, st, 2.0, dt, omega_ref=10.0)
            fins.append(fin)
        ref = hierarchy.evolve(small_coupling, st, 2.0, 0.0005, omega_ref=10.0)[0]
        e_coarse = np.abs(fins[0].c - ref.c).max()
        e_fine = np.abs(fins[1].c - ref.c).max()
        assert e_coarse / e_fine > 10.0   # ~16x for a 4th-order method

    def test_antisymmetric_seed_modulus_constant(self, small_coupling):
        # an antisymmetric two-photon component is dynamically decoupled:
        # each element only rotates in phase (reference right-hand side)
        m = 12
        rng = np.random.default_rng(7)
        a = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
        seed = 0.1 * (a - a.T)
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, m)
        st.d += seed
        norm0 = np.linalg.norm(seed)
        for _ in range(300):
            st = hierarchy.rk4_step(st, small_coupling, 0.001, omega_ref=10.0)
        asym = 0.5 * (st.d - st.d.T)
        assert abs(np.linalg.norm(asym) - norm0) / norm0 < 1e-10

    def test_rejects_mismatched_state(self, small_coupling):
        st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 10)
        with pytest.raises(hierarchy.StateError, match="dimensions"):
            hierarchy.evolve(small_coupling, st, 1.0, 0.01)


class TestSingleExcitation:
    def test_norm_conserved(self, small_coupling):
        res = hierarchy.single_excitation_evolve(
            small_coupling, np.array([1.0, 0.0]) + 0j, 5.0, 0.005)
        assert np.abs(res["norm"] - 1.0).max() < 1e-10

    def test_shape_check(self, small_coupling):
        with pytest.raises(hierarchy.StateError):
            hierarchy.single_excitation_evolve(
                small_coupling, np.ones(3) + 0j, 1.0, 0.01)


def test_consistency_report_fields(small_coupling):
    st = hierarchy.init_state({"kind": "pair-excited", "pair": [1, 2]}, 2, 12)
    _, rec = hierarchy.evolve(small_coupling, st, 1.0, 0.01)
    rep = hierarchy.consistency_report(rec)
    assert set(rep) == {"max_norm_drift", "final_norm_drift", "max_d_asymmetry",
                        "n_samples", "dt"}
    assert rep["max_norm_drift"] < 1e-9

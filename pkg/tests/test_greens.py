import math

import numpy as np
import pytest

from qed2x import greens, model

LAM = 2 * math.pi / 10.0


def mirror_env(*slabs):
    return greens.EnvironmentSpec(kind="mirrored-waveguide",
                                  slabs=tuple(slabs), lambda_a=LAM)


SLAB = greens.SlabSpec(1.5, 2.5, 12 + 0.05j)


class TestSpecs:
    def test_slab_ordering_validation(self):
        with pytest.raises(greens.GreensError, match="x1 < x2"):
            greens.SlabSpec(2.5, 1.5, 12.0)
        with pytest.raises(greens.GreensError, match="passive"):
            greens.SlabSpec(1.0, 2.0, 12 - 0.1j)

    def test_overlapping_slabs_rejected(self):
        with pytest.raises(greens.GreensError, match="disjoint"):
            mirror_env(greens.SlabSpec(1.0, 2.0, 12.0),
                       greens.SlabSpec(1.5, 2.5, 12.0))

    def test_environment_from_dict(self):
        env = greens.environment_from_dict(
            {"kind": "mirrored-waveguide",
             "slabs": [{"x1": 1.5, "x2": 2.5, "eps_real": 12.0, "eps_imag": 0.05}]},
            LAM)
        assert env.slabs[0].eps == 12 + 0.05j
        assert env.interfaces() == pytest.approx([1.5 * LAM, 2.5 * LAM])

    def test_wavenumber_inside_slab(self):
        env = mirror_env(SLAB)
        k = env.wavenumber(10.0, 2.0 * LAM)
        assert k == pytest.approx(10.0 * np.sqrt(12 + 0.05j))
        assert env.wavenumber(10.0, 0.5 * LAM) == 10.0


class TestTransferMatrix:
    def test_zero_distance_is_identity(self):
        np.testing.assert_allclose(greens.transfer_matrix(3.0, 0.0), np.eye(2))

    def test_inverse(self):
        t = greens.transfer_matrix(2.0 + 0.3j, 0.7)
        tinv = greens.transfer_matrix(2.0 + 0.3j, -0.7)
        np.testing.assert_allclose(t @ tinv, np.eye(2), atol=1e-14)

    def test_determinant_one(self):
        t = greens.transfer_matrix(5.0 + 1.0j, 1.3)
        assert np.linalg.det(t) == pytest.approx(1.0, abs=1e-12)

    def test_k_zero_limit(self):
        np.testing.assert_allclose(greens.transfer_matrix(0.0, 0.4),
                                   [[1.0, 0.4], [0.0, 1.0]])


class TestFreeSpace:
    def test_closed_form(self):
        env = greens.EnvironmentSpec(kind="free-space-1d")
        g = greens.greens_1d(env, 10.0, 1.2, 0.5)
        ref = 1j * np.exp(1j * 10.0 * 0.7) / 20.0
        assert g == pytest.approx(ref)

    def test_diagonal_imaginary_part(self):
        # Im G(x, x) = 1/(2 omega): the free-space local density of states
        env = greens.EnvironmentSpec(kind="free-space-1d")
        assert greens.greens_1d(env, 8.0, 0.3, 0.3).imag == pytest.approx(1 / 16.0)


class TestMirror:
    def test_closed_form_im_g(self):
        # mirror only: Im G = sin(k x_<) sin(k x_>) / k
        env = mirror_env()
        for omega in (6.0, 10.0, 14.0):
            for x, xp in ((0.3, 0.9), (1.4, 0.2), (0.6, 0.6)):
                got = greens.greens_1d(env, omega, x, xp).imag
                ref = (math.sin(omega * min(x, xp))
                       * math.sin(omega * max(x, xp)) / omega)
                assert got == pytest.approx(ref, abs=1e-10)

    def test_dirichlet_zero_at_mirror(self):
        env = mirror_env(SLAB)
        assert abs(greens.greens_1d(env, 9.3, 0.0, 1.1)) < 1e-12

    def test_symmetry_in_arguments(self):
        env = mirror_env(SLAB)
        a = greens.greens_1d(env, 9.3, 0.8 * LAM, 2.9 * LAM)
        b = greens.greens_1d(env, 9.3, 2.9 * LAM, 0.8 * LAM)
        assert a == pytest.approx(b)

    def test_wronskian_constancy(self):
        env = mirror_env(SLAB)
        ws = []
        for x in (0.0, 0.7, 1.8, 2.2, 3.5):
            pl, dpl, pr, dpr = greens.homogeneous_solutions(env, 9.3, x * LAM)
            ws.append(pl * dpr - dpl * pr)
        ref = ws[0]
        assert max(abs(w - ref) for w in ws) < 1e-10 * abs(ref)

    def test_continuity_across_interface(self):
        env = mirror_env(SLAB)
        x_if = 1.5 * LAM
        eps = 1e-9
        gl = greens.greens_1d(env, 9.7, x_if - eps, 0.4 * LAM)
        gr = greens.greens_1d(env, 9.7, x_if + eps, 0.4 * LAM)
        assert abs(gl - gr) < 1e-6 * abs(gl)

    def test_helmholtz_residual_fourth_order(self):
        from qed2x.cli import helmholtz_residual
        env = mirror_env(SLAB)
        xp = 0.8 * LAM
        for x in (0.3, 1.2, 2.0, 3.1):
            assert helmholtz_residual(env, 9.7, x * LAM, xp) < 1e-6

    def test_invalid_frequency(self):
        with pytest.raises(greens.GreensError, match="invalid-frequency"):
            greens.greens_1d(mirror_env(), 0.0, 0.5, 1.0)


class TestGrids:
    def test_im_greens_grid_matches_pointwise(self):
        env = mirror_env(SLAB)
        grid = model.build_grid(5.0, 15.0, 7)
        pos = np.array([0.9 * LAM, 0.2 * LAM, 3.1 * LAM])  # unsorted on purpose
        mats = greens.im_greens_grid(env, pos, grid)
        for qi, omega in enumerate(grid.nodes):
            for i in range(3):
                for j in range(3):
                    ref = greens.greens_1d(env, float(omega), pos[i], pos[j]).imag
                    assert mats[qi, i, j] == pytest.approx(ref, abs=1e-12)

    def test_table_is_symmetric_psd(self):
        env = mirror_env(SLAB)
        grid = model.build_grid(5.0, 15.0, 32)
        pos = np.array([0.5 * LAM, 1.0 * LAM])
        table = greens.im_greens_matrix(env, pos, grid)
        for m in table.im_g:
            np.testing.assert_allclose(m, m.T, atol=1e-14)
            assert np.linalg.eigvalsh(m)[0] >= -1e-12
        assert table.index_of(1.0 * LAM) == 1
        with pytest.raises(greens.GreensError, match="missing-position"):
            table.index_of(9.0)

    def test_duplicate_positions_rejected(self):
        env = mirror_env()
        grid = model.build_grid(5.0, 15.0, 4)
        with pytest.raises(greens.GreensError, match="distinct"):
            greens.im_greens_matrix(env, [0.5, 0.5], grid)


class TestTabulated:
    def _table(self, slabs=(), q=4000):
        # dense uniform source grid so cubic resampling stays accurate
        env = mirror_env(*slabs)
        grid = model.build_grid(4.0, 16.0, q, rule="trapezoid")
        pos = np.array([0.5 * LAM, 1.0 * LAM])
        return greens.im_greens_matrix(env, pos, grid), grid

    def test_round_trip(self, tmp_path):
        table, _ = self._table()
        path = tmp_path / "g.csv"
        greens.save_tabulated(table, path)
        inner = model.build_grid(5.0, 15.0, 24)
        loaded = greens.load_tabulated(path, inner, positions=table.positions)
        env = mirror_env()
        direct = greens.im_greens_matrix(env, table.positions, inner)
        assert np.max(np.abs(loaded.im_g - direct.im_g)) < 1e-8

    def test_round_trip_slab(self, tmp_path):
        # narrow slab resonances limit the cubic resampling accuracy
        table, _ = self._table(slabs=(SLAB,), q=4000)
        path = tmp_path / "g.csv"
        greens.save_tabulated(table, path)
        inner = model.build_grid(5.0, 15.0, 24)
        loaded = greens.load_tabulated(path, inner, positions=table.positions)
        env = mirror_env(SLAB)
        direct = greens.im_greens_matrix(env, table.positions, inner)
        assert np.max(np.abs(loaded.im_g - direct.im_g)) < 1e-6

    def test_reexport_idempotent(self, tmp_path):
        table, grid = self._table(q=400)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        greens.save_tabulated(table, p1)
        loaded = greens.load_tabulated(p1, grid, positions=table.positions)
        greens.save_tabulated(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("a,b,c,d\n1,0,0,0.1\n")
        with pytest.raises(greens.GreensError, match="parse-error at line 1"):
            greens.load_tabulated(p, model.build_grid(5.0, 15.0, 4))

    def test_bad_row_reports_line(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("omega,i,j,im_g\n5.0,0,0,0.1\nnope,0,0,0.1\n")
        with pytest.raises(greens.GreensError, match="line 3"):
            greens.load_tabulated(p, model.build_grid(5.0, 15.0, 4))

    def test_coverage_error(self, tmp_path):
        table, _ = self._table(q=400)
        p = tmp_path / "g.csv"
        greens.save_tabulated(table, p)
        wide = model.build_grid(1.0, 30.0, 16)
        with pytest.raises(greens.GreensError, match="coverage-error"):
            greens.load_tabulated(p, wide)

import itertools

import numpy as np
import pytest

from conftest import random_interior
from polyurn import dynamics, equilibria, exactlin
from polyurn import hypergraph as hg
from polyurn.errors import BoundaryOnly, EdgeMissesSupport, NoConvergence


class TestFindEquilibrium:
    def test_tetrahedron(self, tetrahedron):
        rec = equilibria.find_equilibrium(tetrahedron)
        assert np.allclose(rec.point, 0.25, atol=1e-12)
        assert rec.classification == equilibria.NON_UNSTABLE
        assert rec.is_interior

    def test_triangle(self, triangle):
        rec = equilibria.find_equilibrium(triangle, start=[0.6, 0.3, 0.1])
        assert np.allclose(rec.point, 1 / 3, atol=1e-10)

    def test_path_face(self, path3):
        rec = equilibria.find_equilibrium(path3, S=[0, 2])
        assert np.allclose(rec.point, [0.5, 0, 0.5], atol=1e-12)
        assert rec.support == (0, 2)
        assert rec.classification == equilibria.UNSTABLE
        assert rec.witness == 1

    def test_path_full_support_drains(self, path3):
        rec = equilibria.find_equilibrium(path3)
        assert np.allclose(rec.point, [0, 1, 0], atol=1e-9)
        assert rec.support == (1,)
        assert rec.classification == equilibria.NON_UNSTABLE

    def test_lyapunov_trace_nondecreasing(self, cube, rng):
        rec = equilibria.find_equilibrium(cube, start=random_interior(rng, 8))
        assert np.all(np.diff(rec.trace) >= -1e-12)
        assert np.allclose(dynamics.edge_sums(cube, rec.point), 0.5, atol=1e-10)

    @pytest.mark.parametrize("name", ["octahedron", "icosahedron", "dodecahedron"])
    def test_platonic_is_stationary(self, name, rng):
        H = hg.builtin(name)
        rec = equilibria.find_equilibrium(H, start=random_interior(rng, H.m))
        assert rec.residual < 1e-12
        assert np.max(np.abs(dynamics.field_F(H, rec.point))) < 1e-11

    def test_support_must_meet_every_edge(self, path3):
        with pytest.raises(EdgeMissesSupport):
            equilibria.find_equilibrium(path3, S=[0])

    def test_bad_start(self, tetrahedron):
        with pytest.raises(ValueError):
            equilibria.find_equilibrium(tetrahedron, S=[0, 1, 2], start=[0.25] * 4)

    def test_no_convergence(self, cube, rng):
        with pytest.raises(NoConvergence) as exc:
            equilibria.find_equilibrium(cube, start=random_interior(rng, 8), max_iter=1)
        assert exc.value.record.iterations == 1


class TestClassify:
    def test_examples(self, path3, tetrahedron, cube):
        assert equilibria.record_at(path3, [0.5, 0, 0.5]).classification == equilibria.UNSTABLE
        assert equilibria.record_at(tetrahedron, [0.25] * 4).classification == equilibria.NON_UNSTABLE
        rec = equilibria.record_at(cube, [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0])
        assert rec.classification == equilibria.NON_UNSTABLE
        assert rec.support == (0, 3, 5, 6)

    def test_classify_recomputes_gradient(self, path3):
        rec = equilibria.find_equilibrium(path3, S=[0, 2])
        assert equilibria.classify(path3, rec) == equilibria.UNSTABLE


class TestCosets:
    def test_cube_random_starts(self, cube, rng):
        K = exactlin.kernel_gamma(cube)
        recs = [equilibria.find_equilibrium(cube, start=random_interior(rng, 8)) for _ in range(5)]
        for a, b in itertools.combinations(recs, 2):
            assert equilibria.coset_check(cube, a, b, K)

    def test_shift_by_kernel_vector(self, cube):
        K = exactlin.kernel_gamma(cube)
        w = np.full(8, 1 / 8)
        kappa = K.as_array()[0]
        shifted = w + 0.5 * kappa / np.max(np.abs(kappa)) / 8
        a, b = equilibria.record_at(cube, w), equilibria.record_at(cube, shifted)
        assert equilibria.coset_check(cube, a, b, K)

    def test_off_coset(self, cube):
        K = exactlin.kernel_gamma(cube)
        a = equilibria.record_at(cube, np.full(8, 1 / 8))
        b = equilibria.record_at(cube, [0.2, 0.05] + [0.75 / 6] * 6)
        assert not equilibria.coset_check(cube, a, b, K)


class TestLimitCandidates:
    def test_cube(self, cube):
        cand = equilibria.limit_candidates(cube)
        assert cand.k == 4
        assert np.allclose(cand.base.point, 1 / 8, atol=1e-12)
        assert cand.distance([0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0]) < 1e-12
        assert "dim K = 4" in cand.describe()

    def test_tetrahedron(self, tetrahedron):
        cand = equilibria.limit_candidates(tetrahedron)
        assert cand.k == 0
        assert cand.describe().startswith("single point")
        assert cand.to_json()["kernel"]["dim"] == 0

    def test_path_boundary_only(self, path3):
        with pytest.raises(BoundaryOnly) as exc:
            equilibria.limit_candidates(path3)
        assert exc.value.record.support == (1,)


class TestPendant:
    def test_examples(self, path3, cube):
        assert equilibria.detect_pendant(path3) == [((0, 1), 0, 1), ((1, 2), 2, 1)]
        assert equilibria.detect_pendant(cube) == []
        assert equilibria.detect_pendant(hg.single_edge(3)) == []

    def test_pendant_face_is_unstable(self, path3):
        # the equilibrium on the face missing the shared vertex has positive gradient there
        rec = equilibria.find_equilibrium(path3, S=[0, 2])
        assert rec.gradient[1] > 0


class TestRadial:
    def test_cube(self, cube):
        w = equilibria.find_equilibrium(cube)
        rep = equilibria.radial_minimum_check(cube, w, samples=100, rng=np.random.default_rng(1))
        assert rep.ok
        assert rep.min_f_random > 0

    def test_radial_values(self, cube):
        w = np.full(8, 1 / 8)
        kappa = exactlin.kernel_gamma(cube).as_array()[1]
        assert abs(equilibria.radial_function(cube, w, w + 0.05 * kappa / np.max(np.abs(kappa)) / 8)) <= 1e-10
        assert equilibria.radial_function(cube, w, [0.3] + [0.1] * 7) > 0

    def test_rejects_unstable(self, path3):
        rec = equilibria.find_equilibrium(path3, S=[0, 2])
        with pytest.raises(ValueError):
            equilibria.radial_minimum_check(path3, rec)

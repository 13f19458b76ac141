import io
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_interior
from polyurn import dynamics
from polyurn import hypergraph as hg
from polyurn.errors import DegenerateEdgeSum, DomainExit, StepTooLarge

CUBE_ON_COSET = np.array([0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0])


class TestSimplexPoint:
    def test_accepts(self):
        assert np.allclose(dynamics.simplex_point([0.5, 0.5]), [0.5, 0.5])

    @pytest.mark.parametrize("v", [[0.5, 0.6], [-0.1, 1.1], [np.nan, 1.0]])
    def test_rejects(self, v):
        with pytest.raises(ValueError):
            dynamics.simplex_point(v)


class TestEdgeSums:
    def test_examples(self, tetrahedron, cube, path3):
        assert np.allclose(dynamics.edge_sums(tetrahedron, np.full(4, 0.25)), 0.75)
        assert np.allclose(dynamics.edge_sums(cube, np.full(8, 1 / 8)), 0.5)
        assert dynamics.edge_sum([0.5, 0, 0.5], (0, 1)) == 0.5

    def test_cube_coset_point(self, cube):
        assert np.allclose(dynamics.edge_sums(cube, CUBE_ON_COSET), 0.5)

    def test_degenerate(self, path3):
        with pytest.raises(DegenerateEdgeSum):
            dynamics.grad_L(path3, [0, 0, 1.0])


class TestLyapunov:
    def test_single_edge(self):
        assert dynamics.lyapunov_L(hg.single_edge(3), [1 / 3] * 3) == pytest.approx(-1)

    def test_tetrahedron(self, tetrahedron):
        assert dynamics.lyapunov_L(tetrahedron, [0.25] * 4) == pytest.approx(-1 + math.log(0.75))

    def test_cube_constant_on_coset(self, cube):
        for v in (np.full(8, 1 / 8), CUBE_ON_COSET):
            assert dynamics.lyapunov_L(cube, v) == pytest.approx(-1 + math.log(0.5))


class TestGradient:
    def test_tetrahedron_uniform(self, tetrahedron):
        assert np.allclose(dynamics.grad_L(tetrahedron, [0.25] * 4), 0, atol=1e-15)

    def test_path_unstable_coordinate(self, path3):
        g = dynamics.grad_L(path3, [0.5, 0, 0.5])
        assert g[1] == pytest.approx(1.0)

    def test_single_edge(self, rng):
        H = hg.single_edge(4)
        v = random_interior(rng, 4)
        assert np.allclose(dynamics.grad_L(H, v), 0, atol=1e-14)

    def test_exact_matches_float(self, cube):
        w = [Fraction(1, 4), 0, 0, Fraction(1, 4), 0, Fraction(1, 4), Fraction(1, 4), 0]
        assert dynamics.grad_L_exact(cube, w) == [0] * 8


class TestField:
    def test_single_edge_zero(self, rng):
        H = hg.single_edge(3)
        assert np.allclose(dynamics.field_F(H, random_interior(rng, 3)), 0, atol=1e-15)

    def test_equilibria(self, tetrahedron, cube):
        assert np.allclose(dynamics.field_F(tetrahedron, [0.25] * 4), 0, atol=1e-15)
        assert np.allclose(dynamics.field_F(cube, CUBE_ON_COSET), 0, atol=1e-15)

    def test_tangent(self, rng):
        for _ in range(20):
            H = hg.random_hypergraph(rng, 6, 7)
            assert abs(dynamics.field_F(H, random_interior(rng, 6)).sum()) < 1e-14

    def test_inward_pointing(self, rng):
        H = hg.cycle(5)
        c = 1 / (2 * H.N)
        v = np.array([c / 2, c / 2, 0.3, 0.3, 0.4 - c])
        I = [0, 1]
        assert dynamics.field_F(H, v)[I].sum() >= 1 / H.N - c - 1e-12


class TestHessianAndJacobian:
    def test_cube_hessian_on_coset(self, cube):
        inc = cube.incidence()
        shared = inc.T @ inc
        for v in (np.full(8, 1 / 8), CUBE_ON_COSET):
            assert np.allclose(dynamics.hessian_L(cube, v), -2 / 3 * shared)

    def test_symmetric(self, rng):
        H = hg.random_hypergraph(rng, 7, 9)
        Hs = dynamics.hessian_L(H, random_interior(rng, 7))
        assert np.array_equal(Hs, Hs.T)

    def test_jacobian_columns_sum_to_minus_one(self, rng):
        H = hg.random_hypergraph(rng, 7, 9)
        J = dynamics.jacobian_F(H, random_interior(rng, 7))
        assert np.allclose(J.sum(axis=0), -1)

    def test_exact_matches_float(self, cube, rng):
        v = random_interior(rng, 8)
        exact = dynamics.jacobian_F_exact(cube, [Fraction(x) for x in v])
        assert np.allclose(np.array(exact, dtype=float), dynamics.jacobian_F(cube, v), atol=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        H = hg.random_hypergraph(rng, int(rng.integers(2, 7)), int(rng.integers(1, 8)))
        v = random_interior(rng, H.m, floor=0.05)
        h = 1e-6
        E = np.eye(H.m) * h
        fd_g = np.array([(dynamics.lyapunov_L(H, v + e) - dynamics.lyapunov_L(H, v - e)) / (2 * h) for e in E])
        fd_j = np.array([(dynamics.field_F(H, v + e) - dynamics.field_F(H, v - e)) / (2 * h) for e in E]).T
        assert np.max(np.abs(fd_g - dynamics.grad_L(H, v))) < 1e-5
        assert np.max(np.abs(fd_j - dynamics.jacobian_F(H, v))) < 1e-5


class TestFlowDomain:
    def test_default(self, cube):
        assert dynamics.FlowDomain.default(cube).c == pytest.approx(1 / 12)

    @pytest.mark.parametrize("c", [0, -0.1, 0.5])
    def test_invalid(self, c):
        with pytest.raises(ValueError):
            dynamics.FlowDomain(c, 2)


class TestFlow:
    def test_single_edge_constant(self):
        H = hg.single_edge(3)
        traj = dynamics.flow_integrate(H, [0.5, 0.3, 0.2], T=10)
        assert np.allclose(traj.points, [0.5, 0.3, 0.2], atol=1e-15)

    def test_tetrahedron_converges(self, tetrahedron):
        traj = dynamics.flow_integrate(tetrahedron, [0.7, 0.1, 0.1, 0.1], T=200, dt=0.05)
        assert np.max(np.abs(traj.terminal - 0.25)) < 1e-6

    def test_cube_equilibrium_is_fixed(self, cube):
        traj = dynamics.flow_integrate(cube, np.full(8, 1 / 8), T=5)
        assert np.allclose(traj.points, 1 / 8, atol=1e-15)

    def test_lyapunov_monotone(self, triangle, rng):
        traj = dynamics.flow_integrate(triangle, random_interior(rng, 3), T=20)
        assert np.all(np.diff(traj.lyapunov) >= -1e-12)
        assert len(traj) == 2001

    def test_cube_face_sums_settle(self, cube, rng):
        v0 = random_interior(rng, 8, floor=0.05)
        traj = dynamics.flow_integrate(cube, v0, T=60)
        assert np.allclose(dynamics.edge_sums(cube, traj.terminal), 0.5, atol=1e-6)

    @pytest.mark.parametrize("dt", [3.0, 10.0])
    def test_step_too_large(self, cube, dt):
        v0 = np.full(8, 0.1 / 7)
        v0[0] = 0.9
        with pytest.raises(StepTooLarge):
            dynamics.flow_integrate(cube, v0, domain=dynamics.FlowDomain(1e-6, 6), T=100, dt=dt)

    def test_domain_exit_at_start(self, path3):
        with pytest.raises(DomainExit):
            dynamics.flow_integrate(path3, [0.9, 0.05, 0.05], domain=dynamics.FlowDomain(0.2, 2))

    def test_csv(self, triangle):
        traj = dynamics.flow_integrate(triangle, [0.5, 0.3, 0.2], T=0.05)
        buf = io.StringIO()
        traj.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,v0,v1,v2,L"
        assert len(lines) == 1 + len(traj)
        assert float(lines[1].split(",")[1]) == 0.5

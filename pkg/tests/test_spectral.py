from fractions import Fraction

import numpy as np
import pytest

from conftest import random_interior
from polyurn import dynamics, equilibria, spectral
from polyurn import hypergraph as hg
from polyurn.errors import NotAnEquilibrium, NotInterior

F = Fraction


def test_tangent_basis_is_orthonormal():
    Q = spectral.tangent_basis(6)
    assert np.allclose(Q @ Q.T, np.eye(5))
    assert np.allclose(Q.sum(axis=1), 0)


class TestRestrictedSpectrum:
    @pytest.mark.parametrize("name, neg, zero", [("tetrahedron", 3, 0), ("cube", 3, 4), ("octahedron", 3, 2)])
    def test_counts_at_uniform(self, name, neg, zero):
        H = hg.builtin(name)
        rep = spectral.restricted_spectrum(H, np.full(H.m, 1 / H.m))
        assert (rep.n_negative, rep.n_zero, rep.n_positive) == (neg, zero, 0)
        assert rep.matches_kernel
        assert rep.method == "symmetric"

    def test_tetrahedron_eigenvalue(self, tetrahedron):
        # I^t I = I + 2 * ones, which is the identity on the zero-sum plane, so JF = -(1/4)(1/4)(4/3)^2
        rep = spectral.restricted_spectrum(tetrahedron, [0.25] * 4)
        assert np.allclose(rep.eigenvalues, -1 / 9)

    def test_paths_agree(self, cube, rng):
        rec = equilibria.find_equilibrium(cube, start=random_interior(rng, 8))
        a = spectral.restricted_spectrum(cube, rec.point, interior=True)
        b = spectral.restricted_spectrum(cube, rec.point, interior=False)
        assert np.allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
        assert b.max_imag < 1e-10

    def test_against_dense_eigensolver(self, rng):
        H = hg.builtin("icosahedron")
        rec = equilibria.find_equilibrium(H, start=random_interior(rng, H.m))
        rep = spectral.restricted_spectrum(H, rec.point)
        J = dynamics.jacobian_F(H, rec.point)
        full = np.sort(np.linalg.eigvals(J).real)
        # the full spectrum is the restricted one plus -1 from the normal direction
        i = int(np.argmin(np.abs(full + 1)))
        assert np.allclose(np.delete(full, i), rep.eigenvalues, atol=1e-9)

    def test_boundary_cube_point(self, cube):
        w = [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0]
        rep = spectral.restricted_spectrum(cube, w)
        assert rep.method == "general"
        assert rep.n_zero == 5

    def test_not_equilibrium(self, cube):
        with pytest.raises(NotAnEquilibrium):
            spectral.restricted_spectrum(cube, [0.3] + [0.1] * 7)

    def test_symmetric_path_needs_interior(self, cube):
        with pytest.raises(NotInterior):
            spectral.restricted_spectrum(cube, [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0], interior=True)

    def test_json(self, tetrahedron):
        data = spectral.restricted_spectrum(tetrahedron, [0.25] * 4).to_json()
        assert data["n_negative"] == 3 and len(data["eigenvalues"]) == 3


class TestRanks:
    @pytest.mark.parametrize("name, r", [("tetrahedron", 4), ("cube", 4), ("octahedron", 4), ("icosahedron", 12)])
    def test_rank_identities(self, name, r):
        H = hg.builtin(name)
        rep = spectral.rank_identities(H, np.full(H.m, 1 / H.m))
        assert rep.ok
        assert rep.rank_JF == rep.rank_IH == r

    def test_icosahedron_gamma_rank(self):
        # on the zero-sum plane the rank drops by one: m - 1 - k = 11
        H = hg.builtin("icosahedron")
        assert spectral.rank_identities(H, np.full(12, 1 / 12)).rank_JF_gamma == 11

    def test_cube_hessian_entries(self, cube):
        inc = cube.incidence()
        assert np.allclose(dynamics.hessian_L(cube, np.full(8, 1 / 8)), -2 / 3 * (inc.T @ inc))

    def test_boundary_ranks(self, cube):
        a = [F(0), F(1, 4), F(0), F(1, 4), F(1, 8), F(1, 8), F(1, 8), F(1, 8)]
        b = [F(1, 4), F(0), F(0), F(1, 4), F(0), F(1, 4), F(1, 4), F(0)]
        assert spectral.boundary_rank(cube, a) == 4
        assert spectral.boundary_rank(cube, b) == 3
        assert spectral.boundary_rank(cube, [F(1, 8)] * 8) == 4
        assert spectral.boundary_rank(cube, [float(x) for x in b]) == 3

    def test_rank_identities_need_interior(self, cube):
        with pytest.raises(NotInterior):
            spectral.rank_identities(cube, [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0])

"""Spectrum of the linearized flow at equilibria, restricted to the tangent space.

The Jacobian maps the zero-sum hyperplane into itself (its column sums are
all -1), so it restricts to an (m-1)-dimensional operator there.  At an
interior equilibrium it factors as diag(w) @ Hess(L); the similar matrix
``D^1/2 Hess D^1/2`` is symmetric and has the same spectrum, which on all of
R^m is the restricted spectrum plus one extra eigenvalue -1 coming from the
normal direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dynamics, exactlin
from .errors import NotAnEquilibrium, NotInterior
from .hypergraph import Hypergraph

REL_ZERO = 1e-8


def zero_threshold(J: np.ndarray) -> float:
    return REL_ZERO * max(1.0, float(np.max(np.sum(np.abs(J), axis=1))))


def tangent_basis(m: int) -> np.ndarray:
    """(m-1) x m matrix Q with orthonormal rows spanning the zero-sum hyperplane."""
    # Helmert rows
    Q = np.zeros((m - 1, m))
    for r in range(1, m):
        Q[r - 1, :r] = 1.0
        Q[r - 1, r] = -float(r)
        Q[r - 1] /= np.sqrt(r * (r + 1))
    return Q


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple[float, ...]
    n_negative: int
    n_zero: int
    n_positive: int
    k_expected: int
    rank_JF: int
    rank_IH: int
    point: np.ndarray
    threshold: float
    max_imag: float
    method: str

    @property
    def matches_kernel(self) -> bool:
        return self.n_zero == self.k_expected and self.n_negative == len(self.point) - 1 - self.k_expected

    def to_json(self) -> dict:
        return {
            "eigenvalues": list(self.eigenvalues),
            "n_negative": self.n_negative,
            "n_zero": self.n_zero,
            "n_positive": self.n_positive,
            "k_expected": self.k_expected,
            "rank_JF": self.rank_JF,
            "rank_IH": self.rank_IH,
            "point": [float(x) for x in self.point],
            "threshold": self.threshold,
            "max_imag": self.max_imag,
            "method": self.method,
        }


def _counts(eigs, tau):
    return int(np.sum(eigs < -tau)), int(np.sum(np.abs(eigs) <= tau)), int(np.sum(eigs > tau))


def numerical_rank(J: np.ndarray, tau: float | None = None) -> int:
    tau = zero_threshold(J) if tau is None else tau
    s = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(s > tau))


def _require_equilibrium(H, w, tol):
    res = float(np.max(np.abs(dynamics.field_F(H, w))))
    if res > tol:
        raise NotAnEquilibrium(f"|F(w)| = {res:.3g} exceeds {tol:.3g}")


def gamma_restricted(J: np.ndarray) -> np.ndarray:
    Q = tangent_basis(J.shape[0])
    return Q @ J @ Q.T


def restricted_spectrum(
    H: Hypergraph,
    w,
    interior: bool | None = None,
    tol: float = 1e-9,
    K: exactlin.KernelBasis | None = None,
) -> SpectrumReport:
    """Eigenvalues of DF(w) on the zero-sum hyperplane, with sign counts.

    ``interior`` selects the symmetric path; by default it is used when every
    coordinate of w is positive.
    """
    w = np.asarray(w, dtype=float)
    _require_equilibrium(H, w, tol)
    if interior is None:
        interior = bool(np.all(w > 0))
    if interior and not np.all(w > 0):
        raise NotInterior("symmetric path needs every coordinate positive")
    K = exactlin.kernel_gamma(H) if K is None else K
    J = dynamics.jacobian_F(H, w)
    tau = zero_threshold(J)
    if interior:
        eigs, max_imag, method = _symmetric_path(H, w), 0.0, "symmetric"
    else:
        eigs, max_imag, method = _general_path(J), None, "general"
        max_imag = float(np.max(np.abs(eigs.imag))) if eigs.size else 0.0
        eigs = eigs.real
    eigs = np.sort(eigs)
    neg, zero, pos = _counts(eigs, tau)
    return SpectrumReport(
        tuple(float(x) for x in eigs),
        neg,
        zero,
        pos,
        K.dim,
        numerical_rank(J, tau),
        exactlin.incidence_rank(H),
        w,
        tau,
        max_imag,
        method,
    )


def _general_path(J):
    return np.linalg.eigvals(gamma_restricted(J))


def _symmetric_path(H, w):
    root = np.sqrt(w)
    M = root[:, None] * dynamics.hessian_L(H, w) * root[None, :]
    eigs = np.linalg.eigvalsh((M + M.T) / 2)
    # drop the normal-direction eigenvalue -1
    drop = int(np.argmin(np.abs(eigs + 1.0)))
    return np.delete(eigs, drop)


def spectrum_paths_agree(H: Hypergraph, w, tol: float = 1e-9) -> bool:
    a = restricted_spectrum(H, w, interior=True, tol=tol)
    b = restricted_spectrum(H, w, interior=False, tol=tol)
    return (a.n_negative, a.n_zero) == (b.n_negative, b.n_zero)


@dataclass(frozen=True)
class RankReport:
    hessian_error: float
    rank_JF: int
    rank_IH: int
    rank_JF_gamma: int

    @property
    def ok(self) -> bool:
        return self.hessian_error < 1e-10 and self.rank_JF == self.rank_IH


def rank_identities(H: Hypergraph, w, tol: float = 1e-9) -> RankReport:
    """Check Hess(L) = -(1/N) E^t E and rank JF = rank I(H) at an interior equilibrium."""
    w = np.asarray(w, dtype=float)
    if not np.all(w > 0):
        raise NotInterior("rank identities hold at interior equilibria")
    _require_equilibrium(H, w, tol)
    wI = dynamics.edge_sums(H, w)
    E = H.incidence() / wI[:, None]
    err = float(np.max(np.abs(dynamics.hessian_L(H, w) + E.T @ E / H.N)))
    J = dynamics.jacobian_F(H, w)
    tau = zero_threshold(J)
    Jg = gamma_restricted(J)
    return RankReport(err, numerical_rank(J, tau), exactlin.incidence_rank(H), numerical_rank(Jg, tau))


def boundary_rank(H: Hypergraph, w) -> int:
    """Rank of JF(w); exact when w is given as rationals (Fraction/int entries)."""
    if all(isinstance(x, (Fraction, int)) for x in w):
        return exactlin.rank(dynamics.jacobian_F_exact(H, w))
    return numerical_rank(dynamics.jacobian_F(H, np.asarray(w, dtype=float)))

"""Exact rational linear algebra for incidence matrices and their kernels.

Ranks and kernels are computed by Gauss-Jordan elimination over
:class:`fractions.Fraction`, so no threshold is involved.  Projections onto
affine sets ``w + span(K)`` are floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .hypergraph import Hypergraph

RationalMatrix = list[list[Fraction]]


def to_rational(M) -> RationalMatrix:
    """Copy an integer/rational 2-d array-like into a list of Fraction rows."""
    rows = np.asarray(M, dtype=object) if not isinstance(M, list) else M
    return [[Fraction(x) for x in row] for row in rows]


def rref(M) -> tuple[RationalMatrix, list[int]]:
    """Reduced row echelon form and pivot columns.  The input is not modified."""
    A = to_rational(M)
    n_rows = len(A)
    n_cols = len(A[0]) if n_rows else 0
    pivots = []
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        p = next((i for i in range(r, n_rows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(n_rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(M) -> int:
    return len(rref(M)[1]) if len(M) else 0


def nullspace(M, n_cols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right kernel, one vector per free column."""
    if len(M) == 0:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    R, pivots = rref(M)
    n = len(R[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, pc in enumerate(pivots):
            v[pc] = -R[row][f]
        basis.append(v)
    return basis


def matvec(M, v) -> list[Fraction]:
    return [sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0)) for row in M]


@dataclass(frozen=True)
class KernelBasis:
    dim: int
    basis: tuple[tuple[Fraction, ...], ...]
    ambient: int

    def as_array(self) -> np.ndarray:
        """Float copy with shape (dim, ambient)."""
        if not self.basis:
            return np.zeros((0, self.ambient))
        return np.array([[float(x) for x in v] for v in self.basis])

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "ambient": self.ambient,
            "basis": [[_frac_str(x) for x in v] for v in self.basis],
        }

    @classmethod
    def from_json(cls, data: dict) -> "KernelBasis":
        basis = tuple(tuple(Fraction(x) for x in v) for v in data["basis"])
        return cls(int(data["dim"]), basis, int(data["ambient"]))


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _kernel(M, m: int) -> KernelBasis:
    basis = nullspace(M, m)
    return KernelBasis(len(basis), tuple(tuple(v) for v in basis), m)


def gamma_stack(H: Hypergraph) -> RationalMatrix:
    """Incidence matrix with an all-ones row appended (the zero-sum constraint)."""
    rows = to_rational(H.incidence().tolist())
    rows.append([Fraction(1)] * H.m)
    return rows


def kernel_gamma(H: Hypergraph) -> KernelBasis:
    """Kernel of the incidence map restricted to the zero-sum hyperplane."""
    return _kernel(gamma_stack(H), H.m)


def kernel_full(H: Hypergraph) -> KernelBasis:
    return _kernel(to_rational(H.incidence().tolist()), H.m)


def incidence_rank(H: Hypergraph) -> int:
    return rank(H.incidence().tolist())


# --- floating point projections ----------------------------------------------


def orthonormal_basis(vectors: np.ndarray) -> np.ndarray:
    """Gram-Schmidt with one re-orthogonalization pass; rows in, rows out."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    out = []
    for v in vectors:
        u = v.copy()
        for _ in range(2):
            for q in out:
                u -= (q @ u) * q
        norm = np.linalg.norm(u)
        if norm > 1e-12 * max(1.0, np.linalg.norm(v)):
            out.append(u / norm)
    if not out:
        return np.zeros((0, vectors.shape[1]))
    return np.array(out)


def project_affine(x, w, K: KernelBasis | np.ndarray | Sequence) -> tuple[np.ndarray, float]:
    """Orthogonal projection of ``x`` onto ``w + span(K)`` and the distance to it."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    B = K.as_array() if isinstance(K, KernelBasis) else np.asarray(K, dtype=float)
    if B.size == 0:
        proj = w.copy()
    else:
        Q = orthonormal_basis(B)
        proj = w + Q.T @ (Q @ (x - w))
    return proj, float(np.linalg.norm(x - proj))

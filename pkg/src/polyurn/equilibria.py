"""Equilibria of the mean-field flow: face solves, classification, cosets.

Equilibria supported on a face S are the maximizers of the concave function
L restricted to that face.  They are found with the multiplicative map::

    v_i <- v_i * (1/N) * sum_{I containing i} 1 / v_I        (i in S)

which is ``v + F(v)``.  Its coordinates sum to one whenever every edge meets
S, its fixed points on the face are exactly the points where dL/dv_i = 0 for
i in S, and it does not decrease L.  Each iterate is nonetheless checked
against L; on a violation the solver takes a projected-gradient step
instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import dynamics
from .errors import BoundaryOnly, EdgeMissesSupport, NoConvergence
from .exactlin import KernelBasis, kernel_gamma, project_affine
from .hypergraph import Hypergraph

UNSTABLE = "unstable"
NON_UNSTABLE = "non_unstable"

EPS_ZERO = 1e-9
EPS_GRAD = 1e-7


@dataclass(frozen=True)
class EquilibriumRecord:
    point: np.ndarray
    support: tuple[int, ...]
    gradient: np.ndarray
    classification: str
    witness: int | None
    residual: float
    iterations: int = 0
    fallback_steps: int = 0
    trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def is_interior(self) -> bool:
        return len(self.support) == len(self.point)

    def to_json(self) -> dict:
        return {
            "point": [float(x) for x in self.point],
            "support": list(self.support),
            "gradient": [float(x) for x in self.gradient],
            "classification": self.classification,
            "witness": self.witness,
            "residual": float(self.residual),
            "iterations": self.iterations,
            "fallback_steps": self.fallback_steps,
        }


@dataclass(frozen=True)
class LimitCandidateSet:
    """The candidate limit set: the simplex intersected with ``base + span(kernel)``."""

    base: EquilibriumRecord
    kernel: KernelBasis

    @property
    def k(self) -> int:
        return self.kernel.dim

    def distance(self, x) -> float:
        return project_affine(x, self.base.point, self.kernel)[1]

    def describe(self) -> str:
        if self.k == 0:
            return "single point " + _vec_str(self.base.point)
        return f"simplex intersected with w + K, w = {_vec_str(self.base.point)}, dim K = {self.k}"

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "kernel": self.kernel.to_json(),
            "description": self.describe(),
        }


def _vec_str(v) -> str:
    return "(" + ", ".join(f"{x:.6g}" for x in v) + ")"


def _check_support(H: Hypergraph, S: Iterable[int]) -> tuple[int, ...]:
    S = tuple(sorted(set(int(i) for i in S)))
    if not S:
        raise ValueError("support must be nonempty")
    if S[0] < 0 or S[-1] >= H.m:
        raise ValueError(f"support {S} outside 0..{H.m - 1}")
    members = set(S)
    for edge in H.edges:
        if members.isdisjoint(edge):
            raise EdgeMissesSupport(edge)
    return S


def _project_to_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1
    idx = np.arange(1, len(y) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


def _face_residual(v, grad, mask) -> float:
    return float(np.max(np.abs(v[mask] * grad[mask]))) if mask.any() else 0.0


def _gradient_step(H, v, mask, L0):
    """Projected gradient ascent on the face with backtracking; None if no gain."""
    g = dynamics.grad_L(H, v)
    step = 1.0
    for _ in range(60):
        cand = np.zeros_like(v)
        cand[mask] = _project_to_simplex(v[mask] + step * g[mask])
        if np.all(dynamics.edge_sums(H, cand) > 0):
            L1 = dynamics.lyapunov_L(H, cand)
            if L1 >= L0:
                return cand, L1
        step /= 2
    return None


def find_equilibrium(
    H: Hypergraph,
    S: Iterable[int] | None = None,
    start=None,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
    eps_zero: float = EPS_ZERO,
    eps: float = EPS_GRAD,
    reduce_support: bool = True,
) -> EquilibriumRecord:
    """Maximize L on the face of S (default: full support) starting from ``start``.

    If the iterates drain some coordinates of S to zero, the maximizer lies on
    a smaller face; with ``reduce_support`` the solve is restarted there and
    the record carries the reduced support.
    """
    S = _check_support(H, range(H.m) if S is None else S)
    mask = np.zeros(H.m, dtype=bool)
    mask[list(S)] = True
    if start is None:
        v = mask / mask.sum()
    else:
        v = np.asarray(start, dtype=float).copy()
        if v.shape != (H.m,) or np.any(v < 0) or np.any(v[~mask] != 0) or np.any(v[mask] <= 0):
            raise ValueError("start must be a nonnegative vector positive exactly on S")
        v = v / v.sum()
    inc_T = H._incidence.T.astype(float)
    N = H.N
    L = dynamics.lyapunov_L(H, v)
    trace = [L]
    fallbacks = 0
    it = 0
    drop_tol = 1e-14
    while True:
        grad = dynamics.grad_L(H, v)
        residual = _face_residual(v, grad, mask)
        if residual < tol or it >= max_iter:
            break
        it += 1
        cand = v * (inc_T @ (1.0 / (H._incidence @ v))) / N
        cand /= cand.sum()
        L1 = dynamics.lyapunov_L(H, cand)
        if L1 < L - drop_tol * (1 + abs(L)):
            stepped = _gradient_step(H, v, mask, L)
            if stepped is None:
                break
            cand, L1 = stepped
            fallbacks += 1
        v, L = cand, L1
        trace.append(L)

    drained = [i for i in S if v[i] < eps_zero]
    if reduce_support and drained and len(drained) < len(S):
        S_small = [i for i in S if i not in drained]
        try:
            _check_support(H, S_small)
        except EdgeMissesSupport:
            pass
        else:
            w = np.where(np.isin(np.arange(H.m), S_small), v, 0.0)
            inner = find_equilibrium(
                H, S_small, w / w.sum(), tol, max(max_iter - it, 1), eps_zero, eps, reduce_support
            )
            return EquilibriumRecord(
                inner.point,
                inner.support,
                inner.gradient,
                inner.classification,
                inner.witness,
                inner.residual,
                it + inner.iterations,
                fallbacks + inner.fallback_steps,
                tuple(trace) + inner.trace,
            )

    grad = dynamics.grad_L(H, v)
    residual = float(np.max(np.abs(v * grad)))
    label, witness = _classify(v, grad, eps_zero, eps)
    rec = EquilibriumRecord(v, S, grad, label, witness, residual, it, fallbacks, tuple(trace))
    if residual >= tol:
        raise NoConvergence(f"residual {residual:.3g} after {it} iterations", rec)
    return rec


def _classify(point, gradient, eps_zero, eps):
    for i in range(len(point)):
        if point[i] < eps_zero and gradient[i] > eps:
            return UNSTABLE, i
    return NON_UNSTABLE, None


def classify(H: Hypergraph, rec: EquilibriumRecord, eps: float = EPS_GRAD, eps_zero: float = EPS_ZERO) -> str:
    """Unstable iff a vanishing coordinate has strictly positive dL/dv_i."""
    gradient = dynamics.grad_L(H, rec.point)
    return _classify(rec.point, gradient, eps_zero, eps)[0]


def record_at(H: Hypergraph, point, eps_zero: float = EPS_ZERO, eps: float = EPS_GRAD) -> EquilibriumRecord:
    """Wrap a known point (e.g. an exact equilibrium) as a record without solving."""
    point = dynamics.simplex_point(point)
    grad = dynamics.grad_L(H, point)
    support = tuple(int(i) for i in np.flatnonzero(point >= eps_zero))
    label, witness = _classify(point, grad, eps_zero, eps)
    return EquilibriumRecord(point, support, grad, label, witness, float(np.max(np.abs(point * grad))))


def coset_check(H: Hypergraph, a: EquilibriumRecord, b: EquilibriumRecord, K: KernelBasis, tol: float = 1e-8) -> bool:
    """True iff a.point - b.point lies within ``tol`` of span(K)."""
    diff = np.asarray(a.point) - np.asarray(b.point)
    return project_affine(diff, np.zeros(H.m), K)[1] < tol


def limit_candidates(H: Hypergraph, start=None, K: KernelBasis | None = None, **solver) -> LimitCandidateSet:
    K = kernel_gamma(H) if K is None else K
    rec = find_equilibrium(H, None, start, **solver)
    if not rec.is_interior:
        raise BoundaryOnly(f"no interior equilibrium; solver settled on support {rec.support}", rec)
    return LimitCandidateSet(rec, K)


def detect_pendant(H: Hypergraph) -> list[tuple[tuple[int, ...], int, int]]:
    """Triples (I, i, j) with vertex i only in edge I and j in I lying in other edges too."""
    stars = [H.star(i) for i in range(H.m)]
    out = []
    for i in range(H.m):
        if len(stars[i]) != 1:
            continue
        edge = H.edges[stars[i][0]]
        for j in edge:
            if j != i and len(stars[j]) > 1:
                out.append((edge, i, j))
    return out


@dataclass(frozen=True)
class RadialReport:
    samples: int
    chi: float
    f_at_base: float
    min_f_random: float
    max_f_coset: float
    nonnegative: bool
    coset_zero: bool
    zeros_in_coset: bool

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.coset_zero and self.zeros_in_coset and abs(self.f_at_base) < 1e-12


def radial_function(H: Hypergraph, w, v) -> float:
    """f(v) = -1 + (1/N) sum_I w_I / v_I."""
    wI = dynamics.edge_sums(H, w)
    vI = dynamics.edge_sums(H, v)
    return float(-1.0 + np.sum(wI / vI) / H.N)


def radial_minimum_check(
    H: Hypergraph,
    w: EquilibriumRecord,
    samples: int = 200,
    chi: float | None = None,
    K: KernelBasis | None = None,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
) -> RadialReport:
    """Sample f on {v in simplex : v_i >= chi on the support of w}.

    Checks that f >= 0 everywhere, that f vanishes on sampled points of the
    coset w + K, and that any random sample with f ~ 0 sits in that coset.
    """
    if w.classification != NON_UNSTABLE:
        raise ValueError("radial check needs a non-unstable equilibrium")
    rng = np.random.default_rng(0) if rng is None else rng
    K = kernel_gamma(H) if K is None else K
    S = list(w.support)
    base = np.asarray(w.point)
    chi = float(np.min(base[S])) / 2 if chi is None else chi
    if not 0 < chi <= np.min(base[S]) + 1e-15:
        raise ValueError("chi must lie in (0, min_S w_i]")
    free_mass = 1.0 - chi * len(S)

    f_base = radial_function(H, base, base)
    min_f = np.inf
    zeros_ok = True
    for _ in range(samples):
        v = rng.dirichlet(np.ones(H.m)) * free_mass
        v[S] += chi
        f = radial_function(H, base, v)
        min_f = min(min_f, f)
        if f < tol and project_affine(v, base, K)[1] > 1e-6:
            zeros_ok = False

    max_coset = 0.0
    B = K.as_array()
    for _ in range(samples if K.dim else 0):
        direction = rng.standard_normal(K.dim) @ B
        v = _clip_into(base, direction, S, chi)
        max_coset = max(max_coset, abs(radial_function(H, base, v)))

    return RadialReport(
        samples, chi, f_base, float(min_f), max_coset, bool(min_f >= -tol), max_coset < tol, zeros_ok
    )


def _clip_into(base, direction, S, chi, scale=0.05):
    """base + t * direction with t shrunk until v >= 0 and v_i >= chi on S."""
    direction = direction / max(np.max(np.abs(direction)), 1e-300)
    t = scale
    lower = np.zeros_like(base)
    lower[S] = chi
    for _ in range(200):
        v = base + t * direction
        if np.all(v >= lower - 1e-15):
            return v
        t /= 2
    return base.copy()

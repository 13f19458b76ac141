"""Mean-field vector field, Lyapunov function and its derivatives, and the flow.

For a hypergraph with N edges and a point v of the simplex, write
``v_I`` for the sum of v over edge I.  Then::

    L(v)       = -sum_i v_i + (1/N) sum_I log v_I
    dL/dv_i    = -1 + (1/N) sum_{I containing i} 1 / v_I
    F_i(v)     = v_i * dL/dv_i
    d2L/dvidvj = -(1/N) sum_{I containing i and j} 1 / v_I**2

All functions accept plain arrays; ``DegenerateEdgeSum`` is raised as soon as
some edge sum is not strictly positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DegenerateEdgeSum, DomainExit, StepTooLarge
from .hypergraph import Hypergraph


def simplex_point(v, tol: float = 1e-9) -> np.ndarray:
    """Validate a nonnegative vector and renormalize it onto the simplex."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a nonempty 1-d vector")
    if np.any(~np.isfinite(v)) or np.any(v < 0):
        raise ValueError(f"simplex point must be finite and nonnegative: {v}")
    s = v.sum()
    if s <= 0:
        raise ValueError("simplex point must have positive mass")
    if abs(s - 1.0) > tol:
        raise ValueError(f"coordinates sum to {s}, not 1")
    return v / s


@dataclass(frozen=True)
class FlowDomain:
    """The region {v in simplex : v_I >= c for every edge I}, with c < 1/N."""

    c: float
    N: int

    def __post_init__(self):
        if not 0 < self.c < 1 / self.N:
            raise ValueError(f"cutoff c={self.c} must lie in (0, 1/N) = (0, {1 / self.N})")

    @classmethod
    def default(cls, H: Hypergraph) -> "FlowDomain":
        return cls(1 / (2 * H.N), H.N)

    def contains(self, H: Hypergraph, v) -> bool:
        return bool(np.all(edge_sums(H, v) >= self.c))


def edge_sum(v, edge: Sequence[int]) -> float:
    return float(np.sum(np.asarray(v)[list(edge)]))


def edge_sums(H: Hypergraph, v) -> np.ndarray:
    return H._incidence @ np.asarray(v, dtype=float)


def _positive_edge_sums(H: Hypergraph, v) -> np.ndarray:
    vI = edge_sums(H, v)
    bad = np.flatnonzero(~(vI > 0))
    if bad.size:
        raise DegenerateEdgeSum(H.edges[bad[0]], float(vI[bad[0]]))
    return vI


def lyapunov_L(H: Hypergraph, v) -> float:
    v = np.asarray(v, dtype=float)
    vI = _positive_edge_sums(H, v)
    return float(-v.sum() + np.log(vI).sum() / H.N)


def grad_L(H: Hypergraph, v) -> np.ndarray:
    vI = _positive_edge_sums(H, v)
    return -1.0 + (H._incidence.T @ (1.0 / vI)) / H.N


def field_F(H: Hypergraph, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v * grad_L(H, v)


def hessian_L(H: Hypergraph, v) -> np.ndarray:
    vI = _positive_edge_sums(H, v)
    # scaled incidence: row I divided by v_I
    E = H._incidence / vI[:, None]
    hess = -(E.T @ E) / H.N
    return (hess + hess.T) / 2


def jacobian_F(H: Hypergraph, w) -> np.ndarray:
    """dF_i/dv_j = delta_ij dL/dv_i + w_i d2L/dv_i dv_j, valid on the boundary too."""
    w = np.asarray(w, dtype=float)
    return np.diag(grad_L(H, w)) + w[:, None] * hessian_L(H, w)


# --- exact evaluation at rational points --------------------------------------


def _exact_edge_sums(H: Hypergraph, w: Sequence[Fraction]) -> list[Fraction]:
    sums = [sum((w[i] for i in edge), Fraction(0)) for edge in H.edges]
    for edge, s in zip(H.edges, sums):
        if s <= 0:
            raise DegenerateEdgeSum(edge, s)
    return sums


def grad_L_exact(H: Hypergraph, w: Sequence) -> list[Fraction]:
    w = [Fraction(x) for x in w]
    sums = _exact_edge_sums(H, w)
    g = [Fraction(-1)] * H.m
    for edge, s in zip(H.edges, sums):
        for i in edge:
            g[i] += 1 / (H.N * s)
    return g


def jacobian_F_exact(H: Hypergraph, w: Sequence) -> list[list[Fraction]]:
    """The Jacobian of F in exact rational arithmetic (w given as rationals)."""
    w = [Fraction(x) for x in w]
    sums = _exact_edge_sums(H, w)
    hess = [[Fraction(0)] * H.m for _ in range(H.m)]
    for edge, s in zip(H.edges, sums):
        d = 1 / (H.N * s * s)
        for i in edge:
            for j in edge:
                hess[i][j] -= d
    grad = grad_L_exact(H, w)
    return [
        [(grad[i] if i == j else 0) + w[i] * hess[i][j] for j in range(H.m)]
        for i in range(H.m)
    ]


# --- flow ---------------------------------------------------------------------


@dataclass
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    lyapunov: np.ndarray

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(zip(self.times, self.points))

    @property
    def terminal(self) -> np.ndarray:
        return self.points[-1]

    def write_csv(self, path_or_file) -> None:
        m = self.points.shape[1]
        header = ["t", *(f"v{i}" for i in range(m)), "L"]

        def _write(fh):
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for t, v, L in zip(self.times, self.points, self.lyapunov):
                writer.writerow([_fmt(t), *(_fmt(x) for x in v), _fmt(L)])

        if hasattr(path_or_file, "write"):
            _write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write(fh)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def flow_integrate(
    H: Hypergraph,
    v0,
    domain: FlowDomain | None = None,
    T: float = 10.0,
    dt: float = 1e-2,
    max_drop: float = 1e-6,
) -> Trajectory:
    """Fixed-step RK4 for dv/dt = F(v), renormalized onto the simplex each step.

    Raises ``StepTooLarge`` when L drops by more than ``max_drop`` in one
    step or a coordinate turns negative, and ``DomainExit`` when an edge sum
    falls below the cutoff.  Smaller drops are left for the caller to judge
    from ``Trajectory.lyapunov``.
    """
    domain = FlowDomain.default(H) if domain is None else domain
    if T < 0 or dt <= 0:
        raise ValueError("need T >= 0 and dt > 0")
    v = simplex_point(v0)
    if not domain.contains(H, v):
        raise DomainExit(f"start point has an edge sum below c={domain.c}")
    n_steps = int(np.ceil(T / dt - 1e-9))
    times = np.empty(n_steps + 1)
    points = np.empty((n_steps + 1, H.m))
    lyap = np.empty(n_steps + 1)
    times[0], points[0], lyap[0] = 0.0, v, lyapunov_L(H, v)
    t = 0.0
    for k in range(1, n_steps + 1):
        h = min(dt, T - t)
        try:
            k1 = field_F(H, v)
            k2 = field_F(H, v + h / 2 * k1)
            k3 = field_F(H, v + h / 2 * k2)
            k4 = field_F(H, v + h * k3)
        except DegenerateEdgeSum as exc:
            raise StepTooLarge(f"an RK4 stage left the simplex at t={t + h}; reduce dt") from exc
        v = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t + h
        if np.any(v < 0):
            raise StepTooLarge(f"coordinate became negative at t={t}; reduce dt")
        v = v / v.sum()
        if np.any(edge_sums(H, v) < domain.c):
            raise DomainExit(f"edge sum fell below c={domain.c} at t={t}")
        L = lyapunov_L(H, v)
        if L < lyap[k - 1] - max_drop:
            raise StepTooLarge(f"L decreased by {lyap[k - 1] - L:.3g} at t={t}; reduce dt")
        times[k], points[k], lyap[k] = t, v, L
    return Trajectory(times, points, lyap)

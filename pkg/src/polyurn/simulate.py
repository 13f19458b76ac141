"""Exact simulation of the urn process on a hypergraph.

At every step each hyperedge I independently throws one ball, landing on
vertex i in I with probability B_i / B_I.  Ball counts are exact int64.

Random streams: replica ``r`` of a run with seed ``s`` uses
``numpy.random.Generator(PCG64(SeedSequence([s, r])))`` and consumes exactly
N uniforms per step, one per hyperedge in canonical edge order.  A uniform
``u`` selects the vertex whose cumulative ball count first exceeds
``floor(u * B_I)``.  Replicas are therefore reproducible independently of
how many run together, and :func:`step` driven by the same generator
reproduces :func:`run` draw for draw.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .equilibria import LimitCandidateSet
from .errors import SimulationOverflow
from .hypergraph import Hypergraph

# floor(u * B_I) is exact only while B_I fits in a double's mantissa
MAX_TOTAL = 2**53
CHUNK = 2048


def replica_generator(seed: int, replica: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, replica])))


@dataclass(frozen=True)
class UrnState:
    balls: np.ndarray
    n: int
    N0: int

    def __post_init__(self):
        balls = np.array(self.balls, dtype=np.int64)
        balls.flags.writeable = False
        object.__setattr__(self, "balls", balls)

    @classmethod
    def initial(cls, balls: Sequence[int]) -> "UrnState":
        balls = [int(b) for b in balls]
        if any(b < 1 for b in balls):
            raise ValueError("every bin needs at least one ball initially")
        return cls(np.array(balls, dtype=np.int64), 0, sum(balls))

    @property
    def total(self) -> int:
        return int(self.balls.sum())

    def proportions(self) -> np.ndarray:
        return self.balls / self.total

    def proportions_exact(self) -> list[Fraction]:
        total = self.total
        return [Fraction(int(b), total) for b in self.balls]


@dataclass(frozen=True)
class NoiseSample:
    n: int
    u: np.ndarray


@dataclass
class NoiseLog:
    """Realized noise u_n (rows) with the step sizes gamma_n used at each step."""

    n: np.ndarray
    u: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_samples(cls, samples: Sequence[NoiseSample], N0: int, N: int) -> "NoiseLog":
        n = np.array([s.n for s in samples], dtype=np.int64)
        u = np.array([s.u for s in samples], dtype=float)
        return cls(n, u, np.array([gamma(int(k), N0, N) for k in n]))


def gamma(n: int, N0: int, N: int) -> float:
    """Step size 1 / (N0/N + n + 1)."""
    return N / (N0 + (n + 1) * N)


def gamma_exact(n: int, N0: int, N: int) -> Fraction:
    return Fraction(N, N0 + (n + 1) * N)


def gamma_square_bound(N0: int, N: int) -> float:
    """Closed-form bound on sum_{n>=0} gamma_n**2 (first term plus integral tail)."""
    a = N0 / N + 1
    return 1 / a**2 + 1 / a


def _check_capacity(N0: int, steps: int, N: int) -> None:
    if N0 + steps * N >= MAX_TOTAL:
        raise SimulationOverflow(
            f"ball total would reach {N0 + steps * N}, beyond the exact sampling range 2**53"
        )


def _choose(weights: np.ndarray, u: float) -> int:
    cums = np.cumsum(weights)
    target = min(math.floor(u * int(cums[-1])), int(cums[-1]) - 1)
    return int(np.searchsorted(cums, target, side="right"))


def expected_increment(H: Hypergraph, balls) -> list[Fraction]:
    """Exact conditional mean of C_i / N given the current ball counts."""
    balls = [int(b) for b in balls]
    out = [Fraction(0)] * H.m
    for edge in H.edges:
        BI = sum(balls[i] for i in edge)
        for i in edge:
            out[i] += Fraction(balls[i], BI * H.N)
    return out


def step(H: Hypergraph, state: UrnState, rng: np.random.Generator, noise: bool = False):
    """Advance one step; returns the new state, or ``(state, NoiseSample)`` with noise."""
    _check_capacity(state.total, 1, H.N)
    balls = state.balls
    u = rng.random(H.N)
    added = np.zeros(H.m, dtype=np.int64)
    for e, edge in enumerate(H.edges):
        idx = list(edge)
        added[idx[_choose(balls[idx], u[e])]] += 1
    new = UrnState(balls + added, state.n + 1, state.N0)
    if not noise:
        return new
    mean = expected_increment(H, balls)
    un = np.array([float(Fraction(int(c), H.N) - mu) for c, mu in zip(added, mean)])
    return new, NoiseSample(state.n, un)


def saa_identity_check(H: Hypergraph, before: UrnState, after: UrnState) -> bool:
    """Exact check of x(n+1) - x(n) = gamma_n (-x(n) + C(n+1)/N) coordinatewise."""
    n, N = before.n, H.N
    if after.n != n + 1 or after.N0 != before.N0:
        return False
    if before.total != before.N0 + n * N or after.total != before.N0 + (n + 1) * N:
        return False
    C = [int(a) - int(b) for a, b in zip(after.balls, before.balls)]
    if any(c < 0 for c in C):
        return False
    g = gamma_exact(n, before.N0, N)
    x0 = before.proportions_exact()
    x1 = after.proportions_exact()
    return all(b - a == g * (-a + Fraction(c, N)) for a, b, c in zip(x0, x1, C))


# --- replica runs ---------------------------------------------------------------


@dataclass(frozen=True)
class Schedule:
    kind: str = "geometric"
    value: float = 1.1

    def __post_init__(self):
        if self.kind == "linear":
            if int(self.value) < 1:
                raise ValueError("linear stride must be >= 1")
        elif self.kind == "geometric":
            if not self.value > 1:
                raise ValueError("geometric ratio must exceed 1")
        else:
            raise ValueError(f"unknown schedule {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "Schedule":
        kind, _, value = text.partition(":")
        return cls(kind, float(value) if value else (1.1 if kind == "geometric" else 1))

    def steps(self, n_max: int) -> np.ndarray:
        if self.kind == "linear":
            out = list(range(0, n_max + 1, int(self.value)))
        else:
            out, n = [0], 1
            while n < n_max:
                out.append(n)
                n = max(n + 1, math.ceil(n * self.value))
        if out[-1] != n_max:
            out.append(n_max)
        return np.array(out, dtype=np.int64)


@dataclass(frozen=True)
class SimConfig:
    seed: int
    replicas: int
    steps: int
    initial_balls: tuple[int, ...]
    schedule: Schedule = field(default_factory=Schedule)
    record_trajectory: bool = True
    record_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "initial_balls", tuple(int(b) for b in self.initial_balls))
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if any(b < 1 for b in self.initial_balls):
            raise ValueError("initial balls must all be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "replicas": self.replicas,
            "steps": self.steps,
            "initial_balls": list(self.initial_balls),
            "schedule": {"kind": self.schedule.kind, "value": self.schedule.value},
            "record_trajectory": self.record_trajectory,
            "record_noise": self.record_noise,
        }


@dataclass
class ReplicaResult:
    replica: int
    sample_steps: np.ndarray
    samples: np.ndarray
    terminal_balls: np.ndarray
    noise: NoiseLog | None = None

    @property
    def terminal(self) -> np.ndarray:
        return self.terminal_balls / self.terminal_balls.sum()

    def at_step(self, n: int) -> np.ndarray:
        hit = np.flatnonzero(self.sample_steps == n)
        if hit.size == 0:
            raise KeyError(f"step {n} was not sampled")
        return self.samples[hit[0]]


def _padded_edges(H: Hypergraph) -> np.ndarray:
    width = max(len(e) for e in H.edges)
    # pad with the dummy column m, which carries zero balls
    idx = np.full((H.N, width), H.m, dtype=np.int64)
    for r, edge in enumerate(H.edges):
        idx[r, : len(edge)] = edge
    return idx


def _run_group(H: Hypergraph, config: SimConfig, replicas: list[int]) -> list[ReplicaResult]:
    R, m, N = len(replicas), H.m, H.N
    gens = [replica_generator(config.seed, r) for r in replicas]
    idx = _padded_edges(H)
    inc = H._incidence.astype(float)
    B = np.zeros((R, m + 1), dtype=np.int64)
    B[:, :m] = config.initial_balls
    N0 = int(sum(config.initial_balls))
    sched = config.schedule.steps(config.steps) if config.record_trajectory else np.array([0, config.steps])
    samples = np.empty((R, len(sched), m))
    next_sample = 0
    if sched[0] == 0:
        samples[:, 0] = B[:, :m] / N0
        next_sample = 1
    noise = np.empty((R, config.steps, m)) if config.record_noise else None
    offsets = (np.arange(R) * (m + 1))[:, None]

    n = 0
    while n < config.steps:
        chunk = min(CHUNK, config.steps - n)
        U = np.stack([g.random((chunk, N)) for g in gens], axis=1)  # (chunk, R, N)
        for c in range(chunk):
            W = B[:, idx]  # (R, N, width)
            cums = np.cumsum(W, axis=2)
            tot = cums[:, :, -1]
            target = np.minimum(np.floor(U[c] * tot).astype(np.int64), tot - 1)
            pos = np.sum(cums <= target[:, :, None], axis=2)
            chosen = idx[np.arange(N)[None, :], pos]  # (R, N)
            added = np.bincount((chosen + offsets).ravel(), minlength=R * (m + 1)).reshape(R, m + 1)
            if noise is not None:
                Bm = B[:, :m].astype(float)
                mean = Bm * ((1.0 / (Bm @ inc.T)) @ inc) / N
                noise[:, n] = added[:, :m] / N - mean
            B += added
            n += 1
            if next_sample < len(sched) and sched[next_sample] == n:
                samples[:, next_sample] = B[:, :m] / (N0 + n * N)
                next_sample += 1

    out = []
    g = np.array([gamma(k, N0, N) for k in range(config.steps)]) if noise is not None else None
    for j, r in enumerate(replicas):
        log = NoiseLog(np.arange(config.steps), noise[j], g) if noise is not None else None
        out.append(ReplicaResult(r, sched.copy(), samples[j], B[j, :m].copy(), log))
    return out


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("POLYURN_THREADS", "1")))
    except ValueError:
        return 1


def run(H: Hypergraph, config: SimConfig, threads: int | None = None) -> list[ReplicaResult]:
    """Run all replicas; output depends only on (H, config), not on ``threads``."""
    if len(config.initial_balls) != H.m:
        raise ValueError(f"need {H.m} initial ball counts, got {len(config.initial_balls)}")
    _check_capacity(sum(config.initial_balls), config.steps, H.N)
    threads = default_threads() if threads is None else max(1, threads)
    threads = min(threads, config.replicas)
    groups = [[int(r) for r in g] for g in np.array_split(np.arange(config.replicas), threads)]
    if threads == 1:
        parts = [_run_group(H, config, groups[0])]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda grp: _run_group(H, config, grp), groups))
    return [res for part in parts for res in part]


def write_trajectories_csv(results: Sequence[ReplicaResult], path_or_file) -> None:
    m = results[0].samples.shape[1] if results else 0

    def _write(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replica", "n", *(f"x{i}" for i in range(m))])
        for res in results:
            for n, x in zip(res.sample_steps, res.samples):
                writer.writerow([res.replica, int(n), *(format(float(v), ".17g") for v in x)])

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)


# --- statistics -----------------------------------------------------------------


@dataclass
class ReplicaLimitStats:
    replica: int
    sample_steps: np.ndarray
    distance: np.ndarray | None
    edge_deviation: np.ndarray | None
    min_coordinate: np.ndarray

    def terminal_distance(self):
        return None if self.distance is None else float(self.distance[-1])

    def to_json(self) -> dict:
        return {
            "replica": self.replica,
            "terminal_distance": self.terminal_distance(),
            "terminal_edge_deviation": None if self.edge_deviation is None else float(self.edge_deviation[-1]),
            "terminal_min_coordinate": float(self.min_coordinate[-1]),
        }


@dataclass
class LimitReport:
    replicas: list[ReplicaLimitStats]

    def _terminal(self, attr):
        vals = [getattr(r, attr) for r in self.replicas]
        if any(v is None for v in vals):
            return None
        return np.array([v[-1] for v in vals])

    def at_step(self, attr: str, n: int) -> np.ndarray:
        """Per-replica value of ``attr`` at sampled step ``n``."""
        out = []
        for r in self.replicas:
            hit = np.flatnonzero(r.sample_steps == n)
            if hit.size == 0:
                raise KeyError(f"step {n} was not sampled")
            out.append(getattr(r, attr)[hit[0]])
        return np.array(out)

    def aggregate(self) -> dict:
        out = {}
        for attr in ("distance", "edge_deviation", "min_coordinate"):
            vals = self._terminal(attr)
            if vals is not None:
                out[attr] = {
                    "mean": float(vals.mean()),
                    "median": float(np.median(vals)),
                    "max": float(vals.max()),
                }
        return out

    def to_json(self) -> dict:
        return {"aggregate": self.aggregate(), "replicas": [r.to_json() for r in self.replicas]}


def limit_statistics(
    H: Hypergraph, results: Sequence[ReplicaResult], candidates: LimitCandidateSet | None = None
) -> LimitReport:
    """Distances of sampled x(n) to w + K, edge-sum deviations from w_I, and min x_i(n).

    Without candidates (no interior equilibrium) only the boundary statistic
    min_i x_i(n) is reported.
    """
    stats = []
    if candidates is not None:
        from .exactlin import orthonormal_basis

        w = np.asarray(candidates.base.point)
        Kb = candidates.kernel.as_array()
        Q = orthonormal_basis(Kb) if Kb.size else np.zeros((0, H.m))
        wI = H._incidence @ w
    for res in results:
        X = res.samples
        dist = dev = None
        if candidates is not None:
            D = X - w
            D = D - (D @ Q.T) @ Q
            dist = np.linalg.norm(D, axis=1)
            dev = np.max(np.abs(X @ H._incidence.T - wI), axis=1)
        stats.append(ReplicaLimitStats(res.replica, res.sample_steps, dist, dev, X.min(axis=1)))
    return LimitReport(stats)


@dataclass
class NoiseReport:
    max_abs_sum: float
    max_sup_norm: float
    window: int
    window_z: np.ndarray
    partial_sums: np.ndarray
    gamma_square_sum: float
    gamma_square_bound: float

    @property
    def max_abs_z(self) -> float:
        return float(np.max(np.abs(self.window_z))) if self.window_z.size else 0.0

    def oscillation(self, n: int) -> float:
        return martingale_oscillation(self.partial_sums, n)

    def to_json(self) -> dict:
        return {
            "max_abs_sum": self.max_abs_sum,
            "max_sup_norm": self.max_sup_norm,
            "window": self.window,
            "max_abs_window_z": self.max_abs_z,
            "gamma_square_sum": self.gamma_square_sum,
            "gamma_square_bound": self.gamma_square_bound,
        }


def martingale_oscillation(M: np.ndarray, n: int) -> float:
    """sup over k, l in [n/2, n] of |M_k - M_l| in the sup norm.

    ``M[k]`` is the partial sum of the first k terms, so M has one more row
    than the noise log.
    """
    seg = M[n // 2 : n + 1]
    return float(np.max(seg.max(axis=0) - seg.min(axis=0)))


def noise_diagnostics(log: NoiseLog, window: int = 1000, N0: int | None = None, N: int | None = None) -> NoiseReport:
    u = np.asarray(log.u)
    steps = len(u)
    z = []
    for start in range(0, steps - window + 1, window):
        block = u[start : start + window]
        sd = block.std(axis=0, ddof=1)
        mean = block.mean(axis=0)
        se = sd / np.sqrt(window)
        z.append(np.where(se > 0, mean / np.where(se > 0, se, 1.0), 0.0))
    M = np.vstack([np.zeros(u.shape[1]), np.cumsum(log.gamma[:, None] * u, axis=0)])
    g2 = float(np.sum(log.gamma**2))
    if N0 is not None and N is not None:
        bound = gamma_square_bound(N0, N)
    else:
        # gamma_0 = 1 / (N0/N + 1), so the bound is gamma_0**2 + gamma_0
        bound = float(log.gamma[0] ** 2 + log.gamma[0]) if steps else 0.0
    return NoiseReport(
        float(np.max(np.abs(u.sum(axis=1)))) if steps else 0.0,
        float(np.max(np.abs(u))) if steps else 0.0,
        window,
        np.array(z),
        M,
        g2,
        bound,
    )

"""Finite hypergraphs, incidence matrices and the named examples.

Vertices are labelled ``0..m-1``.  A vertex written ``i`` in 1-based
notation is ``i - 1`` here.  Hyperedges form a list, so the same vertex set
may appear more than once; each copy throws its own ball every step.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    EmptyEdge,
    IsolatedVertex,
    ParseError,
    RepeatedVertex,
    UnknownName,
    VertexOutOfRange,
    ZeroVertices,
)


@dataclass(frozen=True)
class Hypergraph:
    """Vertex count ``m`` and a canonically ordered list of hyperedges.

    Construction validates and normalizes: vertices are sorted inside each
    edge and the edge list is sorted lexicographically.  Duplicate edges are
    kept as distinct rows.
    """

    m: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or isinstance(self.m, bool):
            raise ZeroVertices(f"vertex count must be an integer, got {self.m!r}")
        if self.m <= 0:
            raise ZeroVertices(f"vertex count must be positive, got {self.m}")
        normalized = []
        for index, edge in enumerate(self.edges):
            edge = [int(i) for i in edge]
            if not edge:
                raise EmptyEdge(index)
            seen = set()
            for i in edge:
                if not 0 <= i < self.m:
                    raise VertexOutOfRange(i, self.m)
                if i in seen:
                    raise RepeatedVertex(index, i)
                seen.add(i)
            normalized.append(tuple(sorted(edge)))
        normalized.sort()
        covered = set(itertools.chain.from_iterable(normalized))
        for i in range(self.m):
            if i not in covered:
                raise IsolatedVertex(i)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "edges", tuple(normalized))

    @property
    def N(self) -> int:
        return len(self.edges)

    def incidence(self) -> np.ndarray:
        """N x m 0/1 matrix with entry (I, i) = 1 iff vertex i lies in edge I."""
        return self._incidence.copy()

    @cached_property
    def _incidence(self) -> np.ndarray:
        inc = np.zeros((self.N, self.m), dtype=np.int64)
        for row, edge in enumerate(self.edges):
            inc[row, list(edge)] = 1
        inc.flags.writeable = False
        return inc

    def star(self, i: int) -> list[int]:
        """Indices of the edges containing vertex ``i``, in edge-list order."""
        if not 0 <= i < self.m:
            raise VertexOutOfRange(i, self.m)
        return [row for row, edge in enumerate(self.edges) if i in edge]

    def degrees(self) -> np.ndarray:
        return self._incidence.sum(axis=0)

    def to_dict(self) -> dict:
        return {"m": self.m, "edges": [list(e) for e in self.edges]}


def validate(m, edges) -> Hypergraph:
    return Hypergraph(m, tuple(tuple(e) for e in edges))


def incidence(H: Hypergraph) -> np.ndarray:
    return H.incidence()


def star(H: Hypergraph, i: int) -> list[int]:
    return H.star(i)


# --- serialization -------------------------------------------------------


def serialize(H: Hypergraph) -> str:
    """Canonical JSON text, byte-stable for a given normalized hypergraph."""
    return json.dumps(H.to_dict())


def parse(text: str) -> Hypergraph:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return from_dict(raw)


def from_dict(raw) -> Hypergraph:
    if not isinstance(raw, dict):
        raise ParseError("expected a JSON object")
    for key in ("m", "edges"):
        if key not in raw:
            raise ParseError("missing", field=key)
    m = raw["m"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise ParseError(f"expected an integer, got {m!r}", field="m")
    edges = raw["edges"]
    if not isinstance(edges, list):
        raise ParseError("expected a list of lists", field="edges")
    for a, edge in enumerate(edges):
        if not isinstance(edge, list):
            raise ParseError("expected a list", field=f"edges[{a}]")
        for b, v in enumerate(edge):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"expected an integer, got {v!r}", field=f"edges[{a}][{b}]")
    return validate(m, edges)


# --- named examples --------------------------------------------------------

# Faces of the cube in the 1-based labelling of the reference drawing
# (front face 1,2,6,5 / top face 1,2,3,4).
_CUBE_FACES_1 = (
    (1, 2, 3, 4),
    (5, 6, 7, 8),
    (1, 2, 6, 5),
    (2, 3, 7, 6),
    (3, 4, 8, 7),
    (1, 4, 8, 5),
)

_TETRAHEDRON_FACES_1 = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))


def _icosahedron_faces():
    phi = (1 + 5**0.5) / 2
    pts = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            pts.append((0.0, s1 * 1.0, s2 * phi))
            pts.append((s1 * 1.0, s2 * phi, 0.0))
            pts.append((s2 * phi, 0.0, s1 * 1.0))
    pts = np.array(sorted(pts))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    adjacent = np.isclose(dist, 2.0)
    faces = [
        (a, b, c)
        for a, b, c in itertools.combinations(range(12), 3)
        if adjacent[a, b] and adjacent[b, c] and adjacent[a, c]
    ]
    assert len(faces) == 20
    return faces


def _octahedron_faces():
    # vertices 2k, 2k+1 are the two poles on axis k
    return [tuple(2 * k + s for k, s in enumerate(signs)) for signs in itertools.product((0, 1), repeat=3)]


def _dodecahedron_faces():
    # dual of the icosahedron: vertices are icosahedron faces, faces are
    # the five icosahedron faces around each icosahedron vertex
    ico = sorted(_icosahedron_faces())
    return [tuple(f for f, face in enumerate(ico) if v in face) for v in range(12)]


def tetrahedron() -> Hypergraph:
    return validate(4, [[i - 1 for i in f] for f in _TETRAHEDRON_FACES_1])


def cube() -> Hypergraph:
    return validate(8, [[i - 1 for i in f] for f in _CUBE_FACES_1])


def octahedron() -> Hypergraph:
    return validate(6, _octahedron_faces())


def icosahedron() -> Hypergraph:
    return validate(12, _icosahedron_faces())


def dodecahedron() -> Hypergraph:
    return validate(20, _dodecahedron_faces())


def single_edge(m: int) -> Hypergraph:
    return validate(m, [list(range(m))])


def cycle(m: int) -> Hypergraph:
    if m < 3:
        raise UnknownName(f"cycle needs m >= 3, got {m}")
    return validate(m, [[i, (i + 1) % m] for i in range(m)])


def path(m: int) -> Hypergraph:
    if m < 2:
        raise UnknownName(f"path needs m >= 2, got {m}")
    return validate(m, [[i, i + 1] for i in range(m - 1)])


def complete_graph(m: int) -> Hypergraph:
    if m < 2:
        raise UnknownName(f"complete_graph needs m >= 2, got {m}")
    return validate(m, list(itertools.combinations(range(m), 2)))


PLATONIC = {
    "tetrahedron": tetrahedron,
    "cube": cube,
    "octahedron": octahedron,
    "icosahedron": icosahedron,
    "dodecahedron": dodecahedron,
}

FAMILIES = {
    "single_edge": single_edge,
    "cycle": cycle,
    "path": path,
    "complete_graph": complete_graph,
}

_FAMILY_RE = re.compile(r"^(\w+)\((\d+)\)$")


def builtin(name: str) -> Hypergraph:
    """Named hypergraph: a platonic solid or ``family(m)``, e.g. ``path(3)``."""
    name = name.strip()
    if name in PLATONIC:
        return PLATONIC[name]()
    if name == "triangle":
        return cycle(3)
    match = _FAMILY_RE.match(name)
    if match and match.group(1) in FAMILIES:
        return FAMILIES[match.group(1)](int(match.group(2)))
    raise UnknownName(f"unknown builtin hypergraph {name!r}")


def random_hypergraph(rng: np.random.Generator, m: int, N: int, max_size: int | None = None) -> Hypergraph:
    """Uniform-ish random hypergraph covering every vertex (property tests only)."""
    if N < 1:
        raise ValueError("need at least one edge")
    max_size = m if max_size is None else min(max_size, m)
    edges = []
    for _ in range(N):
        size = int(rng.integers(1, max_size + 1))
        edges.append(sorted(rng.choice(m, size=size, replace=False).tolist()))
    covered = set(itertools.chain.from_iterable(edges))
    # patch uncovered vertices into random edges rather than resampling
    for i in range(m):
        if i not in covered:
            edges[int(rng.integers(N))].append(i)
    return validate(m, edges)

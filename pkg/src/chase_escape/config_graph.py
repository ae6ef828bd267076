"""Configuration-model multigraphs with a blue seed vertex.

Vertex ``0`` is the blue seed, vertex ``1`` the root and ``1..n`` the sampled
vertices.  Edge instances are rows of ``MultiGraph.edges``; the row index is
the edge id.  In a seeded graph edge ``0`` is ``{0, 1}``.  Parallel edges and
self-loops are kept.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .degree_theory import DegreeModel

__all__ = [
    "MultiGraph",
    "ComponentLabels",
    "DisjointSet",
    "match_half_edges",
    "sample_graph",
    "components",
    "count_sa_paths",
    "dump_edgelist",
    "load_edgelist",
    "MAX_PATH_LENGTH",
]

MAX_PATH_LENGTH = 12


@dataclass(frozen=True, eq=False)
class MultiGraph:
    """Immutable multigraph on vertices ``0..n``.

    ``raw_degrees[v]`` is the sampled ``D_v`` (index 0 unused and zero);
    ``parity`` is 1 when a half-edge was added at vertex ``n``.
    """

    n: int
    edges: np.ndarray
    raw_degrees: np.ndarray
    parity: int = 0
    seeded: bool = True
    indptr: np.ndarray = field(init=False, repr=False)
    adj_vertex: np.ndarray = field(init=False, repr=False)
    adj_edge: np.ndarray = field(init=False, repr=False)
    adj_slot: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() > self.n):
            raise ValueError("edge endpoint outside 0..n")
        m = len(edges)
        # CSR adjacency; each edge contributes an entry at both endpoints
        # (twice at the same vertex for a self-loop). adj_slot records which
        # end of the edge row the owning vertex sits at.
        owner = np.concatenate([edges[:, 0], edges[:, 1]])
        other = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        slot = np.concatenate([np.zeros(m, np.int64), np.ones(m, np.int64)])
        order = np.argsort(owner, kind="stable")
        counts = np.bincount(owner, minlength=self.n + 1)
        indptr = np.zeros(self.n + 2, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        for name, value in (
            ("edges", edges),
            ("raw_degrees", np.asarray(self.raw_degrees, dtype=np.int64)),
            ("indptr", indptr),
            ("adj_vertex", other[order]),
            ("adj_edge", eid[order]),
            ("adj_slot", slot[order]),
        ):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_edges(
        cls, n: int, edges: Iterable[tuple[int, int]], seeded: bool = True
    ) -> "MultiGraph":
        """Build a graph on ``1..n`` from an edge list (vertex indices >= 1).

        With ``seeded`` the seed edge ``{0, 1}`` becomes edge id 0 and the
        listed edges follow in order.
        """
        body = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if body.size and body.min() < 1:
            raise ValueError("listed edges must use vertices 1..n")
        raw = np.bincount(body.ravel(), minlength=n + 1)[: n + 1]
        if seeded:
            body = np.vstack([[[0, 1]], body])
        return cls(n, body, raw, 0, seeded)

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        """Adjacency degree of every vertex ``0..n`` (self-loops count twice)."""
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def adjacency(self, v: int) -> Iterator[tuple[int, int]]:
        """Yield ``(edge_id, other_endpoint)`` for each incidence at ``v``."""
        lo, hi = self.indptr[v], self.indptr[v + 1]
        yield from zip(self.adj_edge[lo:hi].tolist(), self.adj_vertex[lo:hi].tolist())

    def is_loop(self) -> np.ndarray:
        return self.edges[:, 0] == self.edges[:, 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return (
            self.n == other.n
            and self.parity == other.parity
            and self.seeded == other.seeded
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.raw_degrees, other.raw_degrees)
        )

    __hash__ = None


def _pair_half_edges(degrees: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # vertex v owns degrees[v-1] half-edges
    stubs = np.repeat(np.arange(1, len(degrees) + 1, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    pairs = stubs.reshape(-1, 2)
    return np.sort(pairs, axis=1)


def match_half_edges(degrees, rng: np.random.Generator) -> MultiGraph:
    """Uniform perfect matching of half-edges on vertices ``1..len(degrees)``.

    Shuffling the half-edge array and pairing consecutive entries gives every
    matching the same probability.  The result carries no seed edge.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    if np.any(degrees < 0):
        raise ValueError("degrees must be nonnegative")
    if degrees.sum() % 2:
        raise ValueError(f"odd number of half-edges ({degrees.sum()}); apply the parity fix")
    n = len(degrees)
    raw = np.concatenate([[0], degrees])
    return MultiGraph(n, _pair_half_edges(degrees, rng), raw, 0, seeded=False)


def sample_graph(model: DegreeModel, n: int, rng: np.random.Generator) -> MultiGraph:
    """Configuration-model graph on ``1..n`` with i.i.d. ``model`` degrees.

    An extra half-edge goes to vertex ``n`` when the degree sum is odd, and
    the seed edge ``{0, 1}`` is attached as edge id 0.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    raw = model.sample(rng, n)
    parity = int(raw.sum() % 2)
    degrees = raw.copy()
    degrees[-1] += parity
    pairs = _pair_half_edges(degrees, rng)
    edges = np.vstack([np.array([[0, 1]], dtype=np.int64), pairs])
    return MultiGraph(n, edges, np.concatenate([[0], raw]), parity, seeded=True)


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


@dataclass(frozen=True, eq=False)
class ComponentLabels:
    """``labels[v]`` for ``v in 0..n`` (-1 for an excluded seed); ``sizes`` descending."""

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def largest(self) -> int:
        return int(self.sizes[0]) if len(self.sizes) else 0

    def size_of(self, v: int) -> int:
        lab = self.labels[v]
        return 0 if lab < 0 else int(self._by_label[lab])

    @property
    def _by_label(self) -> np.ndarray:
        return np.bincount(self.labels[self.labels >= 0])


def components(g: MultiGraph, include_seed: bool = False, vertices=None) -> ComponentLabels:
    """Connected components of ``g``.

    ``vertices`` optionally restricts labelling to a boolean mask over
    ``0..n``; unlabeled vertices get ``-1``.  Labels are numbered in order of
    each component's smallest vertex.
    """
    keep = np.ones(g.n + 1, dtype=bool) if vertices is None else np.asarray(vertices, bool).copy()
    if not include_seed:
        keep[0] = False
    dsu = DisjointSet(g.n + 1)
    for u, v in g.edges.tolist():
        if keep[u] and keep[v]:
            dsu.union(u, v)
    roots = np.array([dsu.find(v) for v in range(g.n + 1)])
    labels = np.full(g.n + 1, -1, dtype=np.int64)
    _, first, inverse = np.unique(roots[keep], return_index=True, return_inverse=True)
    # renumber so labels follow smallest member vertex
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    labels[keep] = rank[inverse]
    sizes = np.sort(np.bincount(labels[keep], minlength=len(first)))[::-1]
    return ComponentLabels(labels, sizes)


def count_sa_paths(g: MultiGraph, k_max: int) -> list[int]:
    """``[|Gamma_0|, ..., |Gamma_k_max|]``: self-avoiding paths from vertex 1.

    Paths ignore the seed vertex; parallel edges give distinct paths.
    """
    if k_max > MAX_PATH_LENGTH:
        raise ValueError(f"k_max={k_max} exceeds the enumeration guard of {MAX_PATH_LENGTH}")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    counts = [0] * (k_max + 1)
    nbrs = [
        [w for _, w in g.adjacency(v) if w != v and w != 0] for v in range(g.n + 1)
    ]
    on_path = [False] * (g.n + 1)

    def walk(v: int, depth: int) -> None:
        counts[depth] += 1
        if depth == k_max:
            return
        on_path[v] = True
        for w in nbrs[v]:
            if not on_path[w]:
                walk(w, depth + 1)
        on_path[v] = False

    walk(1, 0)
    return counts


def dump_edgelist(g: MultiGraph) -> str:
    """Text form: a header ``n=<n> seed_edge=0-1 parity=<p>``, then ``u v id`` lines.

    Raw degrees are not written; they are recovered from the realized
    degrees minus the seed and parity half-edges.
    """
    out = io.StringIO()
    seed = "0-1" if g.seeded else "none"
    out.write(f"n={g.n} seed_edge={seed} parity={g.parity}\n")
    for eid, (u, v) in enumerate(g.edges.tolist()):
        out.write(f"{u} {v} {eid}\n")
    return out.getvalue()


def load_edgelist(text: str) -> MultiGraph:
    lines = text.splitlines()
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    n = int(header["n"])
    parity = int(header["parity"])
    seeded = header["seed_edge"] == "0-1"
    rows = [tuple(int(x) for x in line.split()) for line in lines[1:] if line.strip()]
    rows.sort(key=lambda r: r[2])
    if [r[2] for r in rows] != list(range(len(rows))):
        raise ValueError("edge ids must be 0..m-1")
    edges = np.array([r[:2] for r in rows], dtype=np.int64).reshape(-1, 2)
    raw = np.bincount(edges.ravel(), minlength=n + 1)
    raw[0] = 0
    if seeded:
        raw[1] -= 1
    raw[n] -= parity
    return MultiGraph(n, edges, raw, parity, seeded)

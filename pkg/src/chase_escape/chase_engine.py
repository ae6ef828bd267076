"""Chase-escape dynamics.

Red spreads from a red vertex to an adjacent white vertex at rate ``lam`` per
edge instance; blue overtakes an adjacent red vertex at rate 1 per edge
instance.  Vertex 0 starts blue and vertex 1 starts red.

Two engines resolve the same law on a :class:`MultiGraph`:

* :func:`run_quenched` fixes one exponential passage time per edge direction
  and colour up front and processes arrivals in time order;
* :func:`run_gillespie` simulates the continuous-time Markov chain directly.

Self-loops are inert in both; parallel edges are independent channels.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .config_graph import MultiGraph
from .degree_theory import DegreeModel

__all__ = [
    "PassageTimes",
    "Outcome",
    "TreeResult",
    "draw_passage_times",
    "run_quenched",
    "run_gillespie",
    "run_path",
    "path_fronts",
    "run_tree",
    "MAX_TREE_DEPTH",
]

INF = math.inf
MAX_TREE_DEPTH = 30
_RED, _BLUE = 0, 1


@dataclass(frozen=True, eq=False)
class PassageTimes:
    """Per-direction passage times.

    ``red[e, s]`` is the red time from endpoint ``edges[e, s]`` to the other
    endpoint; ``blue[e, s]`` likewise for blue.  ``lam`` is the red rate the
    times were drawn with (``None`` for hand-built fixtures).
    """

    red: np.ndarray
    blue: np.ndarray
    lam: float | None = None

    @classmethod
    def from_directions(
        cls,
        g: MultiGraph,
        red: dict[tuple[int, int], float] | None = None,
        blue: dict[tuple[int, int], float] | None = None,
        default: float = INF,
    ) -> "PassageTimes":
        """Fixture helper: times keyed by ``(u, v)``, applied to the first
        edge joining ``u`` and ``v``; unspecified directions get ``default``."""
        arrays = []
        for table in (red or {}, blue or {}):
            arr = np.full((g.m, 2), default, dtype=float)
            for (u, v), t in table.items():
                hits = np.flatnonzero(
                    ((g.edges[:, 0] == u) & (g.edges[:, 1] == v))
                    | ((g.edges[:, 0] == v) & (g.edges[:, 1] == u))
                )
                if not hits.size:
                    raise ValueError(f"no edge between {u} and {v}")
                e = hits[0]
                arr[e, 0 if g.edges[e, 0] == u else 1] = t
            arrays.append(arr)
        return cls(arrays[0], arrays[1])

    def red_time(self, g: MultiGraph, e: int, u: int) -> float:
        return float(self.red[e, 0 if g.edges[e, 0] == u else 1])

    def blue_time(self, g: MultiGraph, e: int, u: int) -> float:
        return float(self.blue[e, 0 if g.edges[e, 0] == u else 1])

    def vertex_summaries(self, g: MultiGraph) -> tuple[np.ndarray, np.ndarray]:
        """``(T_r, T_b)`` for vertices ``0..n``.

        ``T_r(v)`` is the largest outbound red time and ``T_b(v)`` the smallest
        inbound blue time, over non-loop incidences.  Red towards the seed is
        never possible and is left out of ``T_r``; the seed's blue time into
        the root is part of ``T_b(1)``.  Empty maxima are 0, empty minima inf.
        """
        _check_pairing(g, self)
        owner = np.repeat(np.arange(g.n + 1), g.degrees)
        other, e, s = g.adj_vertex, g.adj_edge, g.adj_slot
        live = other != owner
        red_out = self.red[e, s]
        blue_in = self.blue[e, 1 - s]
        t_r = np.zeros(g.n + 1)
        t_b = np.full(g.n + 1, INF)
        use_r = live & (other != 0) if g.seeded else live
        np.maximum.at(t_r, owner[use_r], red_out[use_r])
        np.minimum.at(t_b, owner[live], blue_in[live])
        return t_r, t_b


def _check_pairing(g: MultiGraph, pt: PassageTimes) -> None:
    if pt.red.shape != (g.m, 2) or pt.blue.shape != (g.m, 2):
        raise ValueError(
            f"passage times of shape {pt.red.shape} do not match a graph with {g.m} edges"
        )


def draw_passage_times(g: MultiGraph, lam: float, rng: np.random.Generator) -> PassageTimes:
    """Independent red ``Exp(lam)`` and blue ``Exp(1)`` times per edge direction.

    Self-loop directions are drawn too (keeping the stream layout fixed) but
    never used.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    red = rng.exponential(1.0 / lam, (g.m, 2))
    blue = rng.exponential(1.0, (g.m, 2))
    return PassageTimes(red, blue, lam)


@dataclass(frozen=True, eq=False)
class Outcome:
    """Colouring times for vertices ``0..n``; ``inf`` means never."""

    r: np.ndarray
    b: np.ndarray
    fixation_time: float
    events: tuple[str, ...] = field(default=(), repr=False)

    @property
    def ever_red(self) -> np.ndarray:
        return np.flatnonzero(np.isfinite(self.r))

    @property
    def range(self) -> int:
        return int(np.isfinite(self.r).sum())

    def same_as(self, other: "Outcome") -> bool:
        return (
            np.array_equal(self.r, other.r)
            and np.array_equal(self.b, other.b)
            and self.fixation_time == other.fixation_time
        )


def _lists(g: MultiGraph):
    # memoryviews index to plain Python scalars without copying the graph
    return tuple(
        memoryview(np.ascontiguousarray(a))
        for a in (g.indptr, g.adj_vertex, g.adj_edge, g.adj_slot)
    )


def _finish(r, b, events) -> Outcome:
    r = np.asarray(r, dtype=float)
    b = np.asarray(b, dtype=float)
    red = np.isfinite(r)
    fix = float(b[red].max()) if red.any() else 0.0
    return Outcome(r, b, fix, tuple(events))


def run_quenched(g: MultiGraph, pt: PassageTimes, trace: bool = False) -> Outcome:
    """Resolve colouring times from fixed passage times.

    A red arrival along ``u -> v`` fires at ``r(u) + red(u->v)`` and colours
    ``v`` if ``u`` is still red and ``v`` still white.  A blue arrival fires at
    ``max(b(u), r(v)) + blue(u->v)`` and colours ``v`` if it is still red.
    Stale events are dropped when popped; ties go to the earlier-queued event.
    """
    _check_pairing(g, pt)
    indptr, adj_v, adj_e, adj_s = _lists(g)
    # flat views: direction (e, s) lives at 2e + s
    red = memoryview(np.ascontiguousarray(pt.red, dtype=float).ravel())
    blue = memoryview(np.ascontiguousarray(pt.blue, dtype=float).ravel())
    n = g.n
    r = [INF] * (n + 1)
    b = [INF] * (n + 1)
    events: list[str] = []
    heap: list = []
    seq = 0

    def turn_red(v: int, t: float) -> None:
        nonlocal seq
        for i in range(indptr[v], indptr[v + 1]):
            w = adj_v[i]
            if w == v:
                continue
            e, s = adj_e[i], adj_s[i]
            if b[w] < INF:
                heapq.heappush(heap, (max(b[w], t) + blue[2 * e + 1 - s], seq, _BLUE, w, v, e))
                seq += 1
            elif r[w] == INF:
                heapq.heappush(heap, (t + red[2 * e + s], seq, _RED, v, w, e))
                seq += 1

    def turn_blue(u: int, t: float) -> None:
        nonlocal seq
        for i in range(indptr[u], indptr[u + 1]):
            w = adj_v[i]
            if w != u and r[w] < INF and b[w] == INF:
                e, s = adj_e[i], adj_s[i]
                heapq.heappush(heap, (t + blue[2 * e + s], seq, _BLUE, u, w, e))
                seq += 1

    if g.seeded:
        b[0] = 0.0
    r[1] = 0.0
    turn_red(1, 0.0)
    while heap:
        t, _, kind, u, v, e = heapq.heappop(heap)
        if kind == _RED:
            if b[u] < INF or r[v] < INF:
                continue
            r[v] = t
            if trace:
                events.append(f"t={t!r} v={v} color=r via={e}")
            turn_red(v, t)
        else:
            if b[v] < INF:
                continue
            b[v] = t
            if trace:
                events.append(f"t={t!r} v={v} color=b via={e}")
            turn_blue(v, t)
    return _finish(r, b, events)


class _Bag:
    """Set with O(1) add, discard and uniform pick."""

    __slots__ = ("items", "pos")

    def __init__(self):
        self.items: list = []
        self.pos: dict = {}

    def add(self, x) -> None:
        if x not in self.pos:
            self.pos[x] = len(self.items)
            self.items.append(x)

    def discard(self, x) -> None:
        i = self.pos.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.pos[last] = i

    def __len__(self) -> int:
        return len(self.items)


def run_gillespie(
    g: MultiGraph, lam: float, rng: np.random.Generator, trace: bool = False
) -> Outcome:
    """Direct continuous-time simulation of chase-escape to fixation.

    Active transitions are directed edge instances: red ``(r, w)`` pairs at
    rate ``lam`` and blue ``(b, r)`` pairs at rate 1.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    indptr, adj_v, adj_e, adj_s = _lists(g)
    n = g.n
    r = [INF] * (n + 1)
    b = [INF] * (n + 1)
    events: list[str] = []
    # action (e, s): from edges[e, s] to edges[e, 1 - s]
    red_bag, blue_bag = _Bag(), _Bag()
    edges = memoryview(np.ascontiguousarray(g.edges).ravel())

    def turn_red(v: int) -> None:
        for i in range(indptr[v], indptr[v + 1]):
            w = adj_v[i]
            if w == v:
                continue
            e, s = adj_e[i], adj_s[i]
            red_bag.discard((e, 1 - s))
            if b[w] < INF:
                blue_bag.add((e, 1 - s))
            elif r[w] == INF:
                red_bag.add((e, s))

    def turn_blue(u: int) -> None:
        for i in range(indptr[u], indptr[u + 1]):
            w = adj_v[i]
            if w == u:
                continue
            e, s = adj_e[i], adj_s[i]
            red_bag.discard((e, s))
            blue_bag.discard((e, 1 - s))
            if r[w] < INF and b[w] == INF:
                blue_bag.add((e, s))

    if g.seeded:
        b[0] = 0.0
    r[1] = 0.0
    turn_red(1)
    t = 0.0
    # every step colours a vertex, so at most 2n steps; draw uniforms in bulk
    draws = rng.random((2 * n + 2, 3)).tolist()
    for u_time, u_colour, u_pick in draws:
        n_red, n_blue = len(red_bag), len(blue_bag)
        total = lam * n_red + n_blue
        if total == 0:
            break
        t += -math.log1p(-u_time) / total
        if u_colour * total < lam * n_red:
            e, s = red_bag.items[int(u_pick * n_red)]
            v = edges[2 * e + 1 - s]
            r[v] = t
            if trace:
                events.append(f"t={t!r} v={v} color=r via={e}")
            turn_red(v)
        else:
            e, s = blue_bag.items[int(u_pick * n_blue)]
            v = edges[2 * e + 1 - s]
            b[v] = t
            if trace:
                events.append(f"t={t!r} v={v} color=b via={e}")
            turn_blue(v)
    return _finish(r, b, events)


def path_fronts(k_max: int, lam: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Furthest vertex ever red on the path ``0, 1, 2, ...``, capped at ``k_max``.

    On a path the red vertices form an interval; its right end advances at
    rate ``lam`` and its left end is eaten at rate 1, so the jump chain is a
    +-1 walk on the red count started at 1.  ``2 k_max - 1`` steps always
    suffice to either kill red or push the front to ``k_max``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if k_max == 1:
        return np.ones(size, dtype=np.int64)
    p_red = lam / (1.0 + lam)
    steps = 2 * k_max - 1
    up = rng.random((size, steps)) < p_red
    count = 1 + np.cumsum(np.where(up, 1, -1), axis=1)
    reds = np.cumsum(up, axis=1)
    dead = count == 0
    died = dead.any(axis=1)
    at = np.where(died, dead.argmax(axis=1), steps - 1)
    red_steps = reds[np.arange(size), at]
    return np.minimum(1 + red_steps, k_max).astype(np.int64)


def run_path(k: int, lam: float, rng: np.random.Generator) -> bool:
    """Whether vertex ``k`` is ever red on the path ``0..k`` (0 blue, 1 red)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    return bool(path_fronts(k, lam, rng, 1)[0] >= k)


@dataclass(frozen=True)
class TreeResult:
    reached_depth: bool
    range: int
    deepest: int
    truncated: bool = False


def run_tree(
    offspring: DegreeModel,
    root_law: DegreeModel,
    depth: int,
    lam: float,
    rng: np.random.Generator,
    node_budget: int = 10**7,
) -> TreeResult:
    """Chase-escape on a Galton-Watson tree grown one generation at a time.

    The root's parent is the blue seed.  Only children of red vertices are
    sampled.  On a tree blue reaches a red child only through its parent, so
    a child is red iff ``r(parent) + red time < b(parent)`` and then turns
    blue at ``b(parent) + Exp(1)``.
    """
    if not 1 <= depth <= MAX_TREE_DEPTH:
        raise ValueError(f"depth must lie in 1..{MAX_TREE_DEPTH}, got {depth}")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    r = np.zeros(1)
    b = rng.exponential(1.0, 1)
    total, allocated, level = 1, 1, 0
    truncated = False
    while level < depth and r.size:
        law = root_law if level == 0 else offspring
        counts = law.sample(rng, r.size)
        n_child = int(counts.sum())
        allocated += n_child
        if allocated > node_budget:
            truncated = True
            break
        parent = np.repeat(np.arange(r.size), counts)
        r_child = r[parent] + rng.exponential(1.0 / lam, n_child)
        red = r_child < b[parent]
        r = r_child[red]
        b = b[parent][red] + rng.exponential(1.0, r.size)
        level += 1
        total += r.size
    deepest = level if r.size else level - 1
    return TreeResult(
        reached_depth=not truncated and level == depth and r.size > 0,
        range=total,
        deepest=max(deepest, 0),
        truncated=truncated,
    )

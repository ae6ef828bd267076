"""Open-vertex percolation and the giant-component degree statistics.

A vertex is open when every outbound red passage time beats every inbound
blue one.  Red that reaches an open vertex then passes it on to all of its
neighbours, so the component of the root among open vertices is a lower
bound for the red range on the same realization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chase_engine import PassageTimes
from .config_graph import ComponentLabels, MultiGraph, components

__all__ = [
    "OpenMask",
    "OpenSubgraph",
    "JPRRStats",
    "PercReport",
    "mark_open",
    "draw_open_mask",
    "build_open_subgraph",
    "jprr_stats",
    "half_edges_closed",
    "giant_check",
    "percolation_report",
    "PERC_FIELDS",
]


@dataclass(frozen=True, eq=False)
class OpenMask:
    """``open[i]`` refers to vertex ``i + 1``; the seed has no entry."""

    open: np.ndarray
    lam: float | None
    shared: bool

    def is_open(self, v: int) -> bool:
        return bool(self.open[v - 1])

    def padded(self) -> np.ndarray:
        """Mask over ``0..n`` with the seed marked closed."""
        return np.concatenate([[False], self.open])


def mark_open(g: MultiGraph, pt: PassageTimes) -> OpenMask:
    """Open vertices read off shared passage times (isolated vertices are open)."""
    t_r, t_b = pt.vertex_summaries(g)
    return OpenMask(t_r[1:] < t_b[1:], pt.lam, shared=True)


def draw_open_mask(g: MultiGraph, lam: float, rng: np.random.Generator) -> OpenMask:
    """Independent per-vertex draw of ``(T_r, T_b)`` without edge-level times.

    Cheaper than :func:`mark_open` but not coupled to any dynamics run.
    """
    deg = g.degrees[1:].copy()
    loops = np.bincount(g.edges[g.is_loop(), 0], minlength=g.n + 1)[1:]
    k_in = deg - 2 * loops
    k_out = k_in.copy()
    if g.seeded:
        k_out[0] -= 1
    u = rng.random(g.n)
    with np.errstate(divide="ignore"):
        # max of k Exp(lam) via inverse cdf; min of k Exp(1) is Exp(k)
        t_r = np.where(k_out > 0, -np.log1p(-u ** (1.0 / np.maximum(k_out, 1))) / lam, 0.0)
    e = rng.exponential(1.0, g.n)
    t_b = np.where(k_in > 0, e / np.maximum(k_in, 1), np.inf)
    return OpenMask(t_r < t_b, lam, shared=False)


@dataclass(frozen=True, eq=False)
class OpenSubgraph:
    """``graph`` holds the open-open edge instances (no seed edge)."""

    graph: MultiGraph
    hat_degrees: np.ndarray
    mask: OpenMask

    def components(self) -> ComponentLabels:
        return components(self.graph, include_seed=False, vertices=self.mask.padded())


def build_open_subgraph(g: MultiGraph, mask: OpenMask) -> OpenSubgraph:
    keep = mask.padded()
    u, v = g.edges[:, 0], g.edges[:, 1]
    inside = keep[u] & keep[v]
    edges = g.edges[inside]
    hat = np.bincount(edges.ravel(), minlength=g.n + 1)[1:]
    h = MultiGraph(g.n, edges, np.concatenate([[0], hat]), 0, seeded=False)
    return OpenSubgraph(h, hat.astype(np.int64), mask)


@dataclass(frozen=True)
class JPRRStats:
    j_n: int
    S_n: int
    M_n: int

    @property
    def degenerate(self) -> bool:
        return self.M_n == 0

    @property
    def ratio(self) -> float:
        return self.S_n / self.M_n if self.M_n else 0.0


def jprr_stats(degrees) -> JPRRStats:
    """Order-statistic quantities of a degree sequence.

    With degrees sorted ascending, ``j_n`` is the first (1-based) prefix
    length whose sum of ``d(d-2)`` is positive, or ``n`` if none is;
    ``S_n`` sums the sorted degrees from ``j_n`` on; ``M_n`` sums the
    degrees different from 2.
    """
    d = np.sort(np.asarray(degrees, dtype=np.int64))
    if d.size == 0:
        raise ValueError("empty degree sequence")
    partial = np.cumsum(d * (d - 2))
    positive = np.flatnonzero(partial > 0)
    j = int(positive[0]) + 1 if positive.size else d.size
    return JPRRStats(j, int(d[j - 1 :].sum()), int(d[d != 2].sum()))


def half_edges_closed(g: MultiGraph, mask: OpenMask) -> int:
    """Total realized degree (seed edge included at the root) of closed vertices."""
    return int(g.degrees[1:][~mask.open].sum())


def giant_check(stats: JPRRStats, eps: float) -> bool:
    """Sufficient condition ``S_n >= eps * M_n`` for a linear-size component."""
    if not eps > 0:
        raise ValueError(f"epsilon must be > 0, got {eps}")
    return stats.S_n >= eps * stats.M_n


PERC_FIELDS = (
    "n",
    "lambda",
    "seed",
    "j_n",
    "S_n",
    "M_n",
    "E_n",
    "ratio",
    "largest_open_component",
    "root_open_component",
    "root_open",
    "degenerate",
)


@dataclass(frozen=True, eq=False)
class PercReport:
    hat_degrees: np.ndarray
    j_n: int
    S_n: int
    M_n: int
    E_n: int
    largest_open_component: int
    root_open_component: int
    root_open: bool

    @property
    def ratio(self) -> float:
        return self.S_n / self.M_n if self.M_n else 0.0

    @property
    def degenerate(self) -> bool:
        return self.M_n == 0

    @property
    def stats(self) -> JPRRStats:
        return JPRRStats(self.j_n, self.S_n, self.M_n)

    def record(self, n: int, lam: float, seed: int) -> dict:
        """Flat record in :data:`PERC_FIELDS` order."""
        return {
            "n": n,
            "lambda": lam,
            "seed": seed,
            "j_n": self.j_n,
            "S_n": self.S_n,
            "M_n": self.M_n,
            "E_n": self.E_n,
            "ratio": self.ratio,
            "largest_open_component": self.largest_open_component,
            "root_open_component": self.root_open_component,
            "root_open": self.root_open,
            "degenerate": self.degenerate,
        }


def percolation_report(g: MultiGraph, mask: OpenMask) -> PercReport:
    sub = build_open_subgraph(g, mask)
    stats = jprr_stats(sub.hat_degrees)
    comps = sub.components()
    root_open = mask.is_open(1)
    return PercReport(
        hat_degrees=sub.hat_degrees,
        j_n=stats.j_n,
        S_n=stats.S_n,
        M_n=stats.M_n,
        E_n=half_edges_closed(g, mask),
        largest_open_component=comps.largest,
        root_open_component=comps.size_of(1) if root_open else 0,
        root_open=root_open,
    )

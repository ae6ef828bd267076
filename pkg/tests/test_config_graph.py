from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chase_escape.config_graph import (
    DisjointSet,
    MultiGraph,
    components,
    count_sa_paths,
    dump_edgelist,
    load_edgelist,
    match_half_edges,
    sample_graph,
)
from chase_escape.degree_theory import DegreeModel


def canonical(g):
    return tuple(sorted(map(tuple, g.edges.tolist())))


def enumerate_matchings(degrees):
    # brute force over all perfect matchings of labelled half-edges
    stubs = [v for v, d in enumerate(degrees, 1) for _ in range(d)]

    def rec(rest):
        if not rest:
            yield []
            return
        a = rest[0]
        for i in range(1, len(rest)):
            pair = tuple(sorted((stubs[a], stubs[rest[i]])))
            for tail in rec(rest[1:i] + rest[i + 1 :]):
                yield [pair] + tail

    return Counter(tuple(sorted(m)) for m in rec(list(range(len(stubs)))))


# -- matching -------------------------------------------------------------


def test_match_trivial_cases():
    rng = np.random.default_rng(0)
    assert match_half_edges([0, 0], rng).m == 0
    for _ in range(20):
        assert canonical(match_half_edges([1, 1], rng)) == ((1, 2),)


def test_match_odd_total_rejected():
    with pytest.raises(ValueError, match="odd"):
        match_half_edges([1, 2], np.random.default_rng(0))


def test_match_112_exact_weights():
    exact = enumerate_matchings([1, 1, 2])
    assert exact == {((1, 2), (3, 3)): 1, ((1, 3), (2, 3)): 2}


@pytest.mark.parametrize("degrees", [[1, 1, 2], [2, 2], [1, 2, 3], [3, 1, 1, 1]])
def test_match_distribution_against_enumeration(degrees):
    exact = enumerate_matchings(degrees)
    total = sum(exact.values())
    rng = np.random.default_rng(11)
    reps = 20_000
    seen = Counter(canonical(match_half_edges(degrees, rng)) for _ in range(reps))
    assert set(seen) <= set(exact)
    for key, w in exact.items():
        p = w / total
        se = np.sqrt(p * (1 - p) / reps)
        assert abs(seen[key] / reps - p) < 4.5 * se


@given(st.lists(st.integers(0, 6), min_size=1, max_size=30), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_match_preserves_degrees(degrees, seed):
    if sum(degrees) % 2:
        degrees[0] += 1
    g = match_half_edges(degrees, np.random.default_rng(seed))
    assert g.degrees[1:].tolist() == degrees
    assert g.m == sum(degrees) // 2


# -- sampling -------------------------------------------------------------


def test_sample_regular0():
    g = sample_graph(DegreeModel.regular(0), 2, np.random.default_rng(0))
    assert canonical(g) == ((0, 1),)
    assert g.degree(2) == 0


def test_sample_parity_fix():
    g = sample_graph(DegreeModel.regular(1), 3, np.random.default_rng(0))
    assert g.parity == 1
    assert g.degrees.tolist() == [1, 2, 1, 2]
    assert g.raw_degrees.tolist() == [0, 1, 1, 1]


def test_sample_degree_bookkeeping():
    g = sample_graph(DegreeModel.regular(3), 10_000, np.random.default_rng(1))
    assert g.degrees[1:].sum() == 3 * 10_000 + 1
    assert g.degree(0) == 1
    assert g.edges[0].tolist() == [0, 1]


@given(st.integers(1, 200), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_sample_invariants(n, seed):
    g = sample_graph(DegreeModel.poisson(2.0), n, np.random.default_rng(seed))
    expected = g.raw_degrees.copy()
    expected[1] += 1
    expected[n] += g.parity
    assert g.degrees[1:].tolist() == expected[1:].tolist()
    assert (g.edges[1:] > 0).all()
    assert g.m == 1 + (g.raw_degrees.sum() + g.parity) // 2


def test_sample_is_deterministic():
    a = sample_graph(DegreeModel.poisson(3), 500, np.random.default_rng(9))
    b = sample_graph(DegreeModel.poisson(3), 500, np.random.default_rng(9))
    assert a == b


def test_adjacency_counts_loops_twice():
    g = MultiGraph.from_edges(2, [(1, 2), (2, 2), (1, 2)])
    assert g.degree(2) == 4
    assert sorted(g.adjacency(1)) == [(0, 0), (1, 2), (3, 2)]
    assert g.is_loop().tolist() == [False, False, True, False]


# -- components -----------------------------------------------------------


def test_components_examples():
    empty = MultiGraph.from_edges(3, [], seeded=False)
    assert components(empty).sizes.tolist() == [1, 1, 1]
    tri = MultiGraph.from_edges(4, [(1, 2), (2, 3), (1, 3)])
    comps = components(tri)
    assert comps.sizes.tolist() == [3, 1]
    assert comps.size_of(1) == 3 and comps.size_of(4) == 1
    assert components(tri, include_seed=True).sizes.tolist() == [4, 1]
    g = MultiGraph.from_edges(3, [(1, 3), (2, 3)], seeded=False)
    assert components(g).sizes.tolist() == [3]


def test_components_mask():
    g = MultiGraph.from_edges(3, [(1, 2), (2, 3)])
    comps = components(g, vertices=[False, True, False, True])
    assert comps.sizes.tolist() == [1, 1]
    assert comps.labels[2] == -1


def test_disjoint_set():
    d = DisjointSet(5)
    d.union(0, 1)
    d.union(3, 4)
    d.union(1, 4)
    assert len({d.find(i) for i in range(5)}) == 2


@given(st.lists(st.tuples(st.integers(1, 15), st.integers(1, 15)), max_size=30))
@settings(max_examples=60, deadline=None)
def test_components_match_bfs(edges):
    g = MultiGraph.from_edges(15, edges, seeded=False)
    adj = {v: set() for v in range(1, 16)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    seen, sizes = set(), []
    for s in range(1, 16):
        if s in seen:
            continue
        stack, comp = [s], {s}
        while stack:
            for w in adj[stack.pop()]:
                if w not in comp:
                    comp.add(w)
                    stack.append(w)
        seen |= comp
        sizes.append(len(comp))
    assert components(g).sizes.tolist() == sorted(sizes, reverse=True)


# -- self-avoiding paths --------------------------------------------------


def brute_paths(g, k):
    # enumerate edge sequences directly
    out = 0
    inc = {v: [(e, w) for e, w in g.adjacency(v) if w not in (v, 0)] for v in range(g.n + 1)}

    def rec(v, visited, depth):
        nonlocal out
        if depth == k:
            out += 1
            return
        for _, w in inc[v]:
            if w not in visited:
                rec(w, visited | {w}, depth + 1)

    rec(1, {1}, 0)
    return out


def test_sa_paths_examples():
    single = MultiGraph.from_edges(2, [(1, 2)])
    assert count_sa_paths(single, 2) == [1, 1, 0]
    tri = MultiGraph.from_edges(3, [(1, 2), (2, 3), (1, 3)])
    assert count_sa_paths(tri, 2) == [1, 2, 2]
    assert count_sa_paths(MultiGraph.from_edges(1, []), 0) == [1]
    # parallel edges are distinct paths, loops never count
    multi = MultiGraph.from_edges(2, [(1, 2), (1, 2), (1, 1)])
    assert count_sa_paths(multi, 2) == [1, 2, 0]


def test_sa_paths_guard():
    with pytest.raises(ValueError, match="guard"):
        count_sa_paths(MultiGraph.from_edges(1, []), 13)


def test_sa_paths_vs_brute_force():
    g = sample_graph(DegreeModel.poisson(2.5), 40, np.random.default_rng(3))
    assert count_sa_paths(g, 6) == [brute_paths(g, k) for k in range(7)]


def test_sa_paths_dominated_by_branching():
    # on a 3-regular graph a self-avoiding path can extend in at most two ways
    model = DegreeModel.regular(3)
    rng = np.random.default_rng(4)
    counts = np.array([count_sa_paths(sample_graph(model, 2000, rng), 6) for _ in range(30)])
    bound = [1] + [3 * 2 ** (k - 1) for k in range(1, 7)]
    assert (counts.mean(axis=0) <= np.array(bound) + 1e-9).all()


# -- edge list -----------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_edgelist_round_trip(seed):
    g = sample_graph(DegreeModel.poisson(1.5), 50 + seed, np.random.default_rng(seed))
    text = dump_edgelist(g)
    assert text.splitlines()[0].startswith(f"n={g.n} seed_edge=0-1 parity={g.parity}")
    assert load_edgelist(text) == g


def test_edgelist_unseeded_round_trip():
    g = match_half_edges([1, 1, 2, 0], np.random.default_rng(0))
    assert load_edgelist(dump_edgelist(g)) == g


def test_edgelist_rejects_gaps():
    with pytest.raises(ValueError):
        load_edgelist("n=2 seed_edge=0-1 parity=0\n0 1 0\n1 2 2\n")


def test_small_matching_count():
    # number of perfect matchings of 2m labelled half-edges is (2m-1)!!
    for degrees in ([1, 1, 2], [2, 2, 2], [3, 3]):
        total = sum(enumerate_matchings(degrees).values())
        m = sum(degrees) // 2
        assert total == int(np.prod(range(2 * m - 1, 0, -2)))

import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chase_escape.chase_engine import (
    PassageTimes,
    draw_passage_times,
    path_fronts,
    run_gillespie,
    run_path,
    run_quenched,
    run_tree,
)
from chase_escape.config_graph import MultiGraph, sample_graph
from chase_escape.degree_theory import DegreeModel
from chase_escape.experiments import engine_test_graphs, range_distributions

W, R, B = 0, 1, 2


def exact_range_law(g, lam):
    """Exact law of the red range by recursion over colour configurations.

    Every transition moves one vertex forward in white -> red -> blue, so the
    states form a DAG and the absorption probabilities follow by memoised
    recursion on jump-chain probabilities.
    """
    pairs = [tuple(e) for e in g.edges.tolist() if e[0] != e[1]]

    @lru_cache(maxsize=None)
    def law(state):
        moves = []
        for u, v in pairs:
            for a, c in ((u, v), (v, u)):
                if state[a] == R and state[c] == W:
                    moves.append((lam, c, R))
                elif state[a] == B and state[c] == R:
                    moves.append((1.0, c, B))
        if not moves:
            ever = sum(1 for x in state[1:] if x != W)
            return {ever: 1.0}
        total = sum(rate for rate, _, _ in moves)
        out = {}
        for rate, c, col in moves:
            nxt = list(state)
            nxt[c] = col
            for k, p in law(tuple(nxt)).items():
                out[k] = out.get(k, 0.0) + rate / total * p
        return out

    start = [W] * (g.n + 1)
    start[0] = B
    start[1] = R
    return law(tuple(start))


# -- passage times --------------------------------------------------------


def test_passage_time_shapes_and_means():
    g = MultiGraph.from_edges(1, [])
    pt = draw_passage_times(g, 1.0, np.random.default_rng(0))
    assert pt.red.shape == pt.blue.shape == (1, 2)
    big = MultiGraph.from_edges(2, [(1, 2)] * 50_000)
    pt = draw_passage_times(big, 2.0, np.random.default_rng(1))
    x = pt.red.ravel()
    assert abs(x.mean() - 0.5) < 3 * x.std() / math.sqrt(x.size)
    y = pt.blue.ravel()
    assert abs(y.mean() - 1.0) < 3 * y.std() / math.sqrt(y.size)


def test_vertex_red_summary_is_max_of_exponentials():
    # vertex 2 sits on a path 1-2-3 and has two outbound red directions
    g = MultiGraph.from_edges(3, [(1, 2), (2, 3)])
    rng = np.random.default_rng(2)
    vals = np.array([draw_passage_times(g, 1.0, rng).vertex_summaries(g)[0][2] for _ in range(20_000)])
    assert abs(vals.mean() - 1.5) < 3 * vals.std() / math.sqrt(vals.size)


def test_vertex_summaries_fixture():
    g = MultiGraph.from_edges(2, [(1, 2), (2, 2)])
    pt = PassageTimes.from_directions(
        g, red={(1, 2): 0.2, (2, 1): 0.7, (1, 0): 5.0}, blue={(0, 1): 0.9, (2, 1): 0.4, (1, 2): 3.0}, default=9.0
    )
    t_r, t_b = pt.vertex_summaries(g)
    # red towards the seed is ignored; the loop at 2 is ignored
    assert t_r[1] == 0.2 and t_r[2] == 0.7
    assert t_b[1] == 0.4 and t_b[2] == 3.0


def test_pairing_checked():
    g = MultiGraph.from_edges(2, [(1, 2)])
    with pytest.raises(ValueError):
        run_quenched(g, PassageTimes(np.ones((1, 2)), np.ones((1, 2))))


# -- quenched engine fixtures ---------------------------------------------


def test_seed_edge_only():
    g = MultiGraph.from_edges(1, [])
    pt = PassageTimes.from_directions(g, blue={(0, 1): 0.8})
    out = run_quenched(g, pt)
    assert out.ever_red.tolist() == [1]
    assert out.range == 1
    assert out.fixation_time == 0.8


def test_path_red_wins():
    g = MultiGraph.from_edges(2, [(1, 2)])
    pt = PassageTimes.from_directions(g, red={(1, 2): 0.3}, blue={(0, 1): 0.5, (1, 2): 0.4})
    out = run_quenched(g, pt, trace=True)
    assert out.r[2] == pytest.approx(0.3)
    assert out.b[1] == pytest.approx(0.5)
    assert out.b[2] == pytest.approx(0.9)
    assert out.range == 2
    assert out.events == (
        "t=0.3 v=2 color=r via=1",
        "t=0.5 v=1 color=b via=0",
        "t=0.9 v=2 color=b via=1",
    )


def test_path_red_cut_off():
    g = MultiGraph.from_edges(2, [(1, 2)])
    pt = PassageTimes.from_directions(g, red={(1, 2): 0.7}, blue={(0, 1): 0.5, (1, 2): 0.4})
    out = run_quenched(g, pt)
    assert out.r[2] == math.inf
    assert out.range == 1


def test_blue_waits_for_red():
    # blue reaches 2 before red has got there; it must wait for r(2)
    g = MultiGraph.from_edges(3, [(1, 2), (2, 3), (1, 3)])
    pt = PassageTimes.from_directions(
        g,
        red={(1, 3): 0.1, (3, 2): 0.15, (1, 2): 9.0},
        blue={(0, 1): 0.2, (1, 2): 0.05, (1, 3): 0.2, (3, 2): 9.0},
    )
    out = run_quenched(g, pt)
    assert out.r.tolist()[1:] == [0.0, pytest.approx(0.25), pytest.approx(0.1)]
    assert out.b[3] == pytest.approx(0.4)
    # blue along 1->2 fires at max(b(1), r(2)) + 0.05 = 0.25 + 0.05
    assert out.b[2] == pytest.approx(0.3)


def test_self_loops_and_parallel_edges():
    g = MultiGraph.from_edges(2, [(1, 1), (1, 2), (1, 2)])
    pt = PassageTimes.from_directions(g, blue={(0, 1): 1.0}, default=5.0)
    red = pt.red.copy()
    red[2] = [0.4, 5.0]  # second parallel copy is the fast channel
    red[1] = [0.0, 0.0]  # a loop time of zero must never fire
    out = run_quenched(g, PassageTimes(red, pt.blue))
    assert out.r[2] == pytest.approx(0.4)


def invariant_check(g, out):
    assert out.b[0] == 0 and out.r[0] == math.inf
    red = np.isfinite(out.r)
    assert red[1]
    # white -> red -> blue with strictly increasing times
    assert (out.b[red] > out.r[red]).all()
    assert np.isinf(out.b[1:][~red[1:]]).all()
    assert np.isfinite(out.b[red]).all()
    # every red vertex other than the root was reached from a red neighbour
    for v in np.flatnonzero(red):
        if v == 1:
            continue
        assert any(red[w] and w != v for _, w in g.adjacency(v))
    if red.any():
        assert out.fixation_time == out.b[red].max()


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 20), st.integers(1, 60))
@settings(max_examples=60, deadline=None)
def test_quenched_invariants(seed, lam, n):
    rng = np.random.default_rng(seed)
    g = sample_graph(DegreeModel.poisson(2.5), n, rng)
    pt = draw_passage_times(g, lam, rng)
    out = run_quenched(g, pt)
    invariant_check(g, out)
    assert run_quenched(g, pt).same_as(out)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 20), st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_gillespie_invariants(seed, lam, n):
    rng = np.random.default_rng(seed)
    g = sample_graph(DegreeModel.poisson(2.5), n, rng)
    out = run_gillespie(g, lam, np.random.default_rng(seed))
    invariant_check(g, out)
    again = run_gillespie(g, lam, np.random.default_rng(seed))
    assert again.same_as(out)


def test_gillespie_rejects_bad_lambda():
    with pytest.raises(ValueError):
        run_gillespie(MultiGraph.from_edges(1, []), 0.0, np.random.default_rng(0))


# -- Gillespie fixtures ---------------------------------------------------


def test_gillespie_seed_only():
    rng = np.random.default_rng(0)
    g = MultiGraph.from_edges(1, [])
    assert all(run_gillespie(g, 2.0, rng).range == 1 for _ in range(50))


def test_gillespie_path_half():
    g = MultiGraph.from_edges(2, [(1, 2)])
    rng = np.random.default_rng(3)
    reps = 20_000
    hits = sum(run_gillespie(g, 1.0, rng).range == 2 for _ in range(reps))
    assert abs(hits / reps - 0.5) < 4 * math.sqrt(0.25 / reps)


def test_gillespie_star_fast_red():
    g = MultiGraph.from_edges(3, [(1, 2), (1, 3)])
    rng = np.random.default_rng(4)
    assert np.mean([run_gillespie(g, 1e4, rng).range == 3 for _ in range(2000)]) > 0.99


# -- exact oracle on the engine fixtures ----------------------------------


def test_exact_oracle_known_cases():
    assert exact_range_law(MultiGraph.from_edges(2, [(1, 2)]), 1.0) == {2: 0.5, 1: 0.5}
    law = exact_range_law(MultiGraph.from_edges(3, [(1, 2), (1, 3)]), 1e9)
    assert law[3] == pytest.approx(1, abs=1e-8)


@pytest.mark.parametrize("name", ["triangle", "deg112"])
def test_engines_match_exact_law(name):
    g = engine_test_graphs()[name]
    law = exact_range_law(g, 1.0)
    reps = 20_000
    q, c = range_distributions(g, 1.0, reps, seed=17)
    for k, p in law.items():
        se = math.sqrt(p * (1 - p) / reps)
        assert abs(q[k] / reps - p) < 4.5 * se, ("quenched", k)
        assert abs(c[k] / reps - p) < 4.5 * se, ("gillespie", k)


# -- path -----------------------------------------------------------------


def test_run_path_examples():
    rng = np.random.default_rng(0)
    assert all(run_path(1, 0.1, rng) for _ in range(10))
    for lam in (1.0, 3.0):
        reps = 40_000
        p = lam / (1 + lam)
        hits = sum(run_path(2, lam, rng) for _ in range(reps // 20))
        fronts = path_fronts(2, lam, rng, reps)
        assert abs((fronts >= 2).mean() - p) < 4 * math.sqrt(p * (1 - p) / reps)
        assert abs(hits / (reps // 20) - p) < 4 * math.sqrt(p * (1 - p) / (reps // 20))


def test_path_fronts_match_graph_engine():
    # a path 0-1-...-k simulated by the general engine gives the same law
    k, lam, reps = 5, 1.5, 20_000
    g = MultiGraph.from_edges(k, [(i, i + 1) for i in range(1, k)])
    rng = np.random.default_rng(8)
    engine = np.array([run_quenched(g, draw_passage_times(g, lam, rng)).range for _ in range(reps)])
    walk = path_fronts(k, lam, np.random.default_rng(9), reps)
    for j in range(1, k + 1):
        p1, p2 = (engine >= j).mean(), (walk >= j).mean()
        se = math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / reps) + 1e-12
        assert abs(p1 - p2) < 4.5 * se


def test_path_fronts_exact_two_step():
    # exact hit probabilities of the red front, by recursion on (red count, front)
    lam = 0.7
    p = lam / (1 + lam)

    @lru_cache(maxsize=None)
    def reach(count, front, k):
        if front >= k:
            return 1.0
        if count == 0:
            return 0.0
        return p * reach(count + 1, front + 1, k) + (1 - p) * reach(count - 1, front, k)

    reps = 200_000
    fronts = path_fronts(6, lam, np.random.default_rng(5), reps)
    for k in range(2, 7):
        exact = reach(1, 1, k)
        se = math.sqrt(exact * (1 - exact) / reps)
        assert abs((fronts >= k).mean() - exact) < 4 * se


def test_path_domain():
    with pytest.raises(ValueError):
        run_path(0, 1.0, np.random.default_rng(0))
    with pytest.raises(ValueError):
        path_fronts(0, 1.0, np.random.default_rng(0), 3)


# -- tree -----------------------------------------------------------------


def test_tree_depth_one():
    # with depth 1 the root wins iff some child's red time beats b(root)
    rng = np.random.default_rng(0)
    reps = 20_000
    hits = sum(
        run_tree(DegreeModel.regular(2), DegreeModel.regular(3), 1, 1.0, rng).reached_depth
        for _ in range(reps)
    )
    # P(min of 3 Exp(1) < Exp(1)) = 3/4
    assert abs(hits / reps - 0.75) < 4 * math.sqrt(0.75 * 0.25 / reps)


def test_tree_subcritical():
    rng = np.random.default_rng(1)
    hits = [
        run_tree(DegreeModel.regular(2), DegreeModel.regular(3), 12, 0.05, rng).reached_depth
        for _ in range(1000)
    ]
    assert np.mean(hits) < 0.01


def test_tree_supercritical_band():
    # band frozen from a pilot run (observed ~0.67 at 1000 replicas)
    rng = np.random.default_rng(2)
    hits = [
        run_tree(DegreeModel.regular(2), DegreeModel.regular(3), 12, 1.0, rng).reached_depth
        for _ in range(1000)
    ]
    assert np.mean(hits) > 0.5


def test_tree_budget_truncates():
    res = run_tree(DegreeModel.regular(3), DegreeModel.regular(3), 30, 50.0, np.random.default_rng(0), node_budget=1000)
    assert res.truncated and not res.reached_depth


def test_tree_matches_graph_engine_on_binary_tree():
    # a finite binary tree as a graph; range laws must agree
    depth, lam, reps = 3, 1.0, 20_000
    edges, frontier, nxt = [], [1], 2
    for level in range(depth):
        new = []
        for v in frontier:
            for _ in range(3 if level == 0 else 2):
                edges.append((v, nxt))
                new.append(nxt)
                nxt += 1
        frontier = new
    g = MultiGraph.from_edges(nxt - 1, edges)
    rng = np.random.default_rng(6)
    a = np.array([run_quenched(g, draw_passage_times(g, lam, rng)).range for _ in range(reps)])
    b = np.array(
        [run_tree(DegreeModel.regular(2), DegreeModel.regular(3), depth, lam, rng).range for _ in range(reps)]
    )
    se = math.sqrt((a.var() + b.var()) / reps)
    assert abs(a.mean() - b.mean()) < 4.5 * se

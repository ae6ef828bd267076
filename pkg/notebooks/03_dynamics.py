"""
Chase-escape runs
=================

The two graph engines, the path walk and the tree process.
"""
import numpy as np

from chase_escape import (
    DegreeModel,
    MultiGraph,
    PassageTimes,
    draw_passage_times,
    path_fronts,
    run_gillespie,
    run_quenched,
    run_tree,
    sample_graph,
    size_biased_offspring,
)

# Hand-built times on the path 0-1-2: red reaches 2 at 0.3, blue follows.
g = MultiGraph.from_edges(2, [(1, 2)])
pt = PassageTimes.from_directions(g, red={(1, 2): 0.3}, blue={(0, 1): 0.5, (1, 2): 0.4})
out = run_quenched(g, pt, trace=True)
print("\n".join(out.events))

# On a random 3-regular graph the range stays small below Lambda(2) ~ 0.17
# and becomes a sizeable fraction of n well above it.
rng = np.random.default_rng(1)
model = DegreeModel.regular(3)
for lam in (0.1, 0.5, 1.0, 2.0):
    ranges = []
    for _ in range(200):
        g = sample_graph(model, 1000, rng)
        ranges.append(run_quenched(g, draw_passage_times(g, lam, rng)).range)
    print(f"lambda={lam}: mean range {np.mean(ranges):.1f} of 1000")

# The Gillespie engine samples the same law directly from the Markov chain.
g = sample_graph(model, 300, rng)
q = [run_quenched(g, draw_passage_times(g, 1.0, rng)).range for _ in range(300)]
c = [run_gillespie(g, 1.0, rng).range for _ in range(300)]
print("quenched mean", np.mean(q), "gillespie mean", np.mean(c))

# Path: the red block is a +-1 walk; reaching vertex 2 has probability lam/(1+lam).
fronts = path_fronts(10, 1.0, rng, 100_000)
print([float((fronts >= k).mean()) for k in range(1, 11)])

# Tree: root law regular(3), offspring the size-biased law regular(2).
off = size_biased_offspring(model)
for lam in (0.05, 1.0):
    hits = np.mean([run_tree(off, model, 12, lam, rng).reached_depth for _ in range(500)])
    print(f"tree lambda={lam}: P(reach depth 12) ~ {hits:.3f}")

"""
Configuration-model multigraphs
===============================

Sampling, the seed edge, parity fixing, components and self-avoiding paths.
"""
from collections import Counter

import numpy as np

from chase_escape import (
    DegreeModel,
    components,
    count_sa_paths,
    dump_edgelist,
    load_edgelist,
    match_half_edges,
    sample_graph,
)

rng = np.random.default_rng(0)

# Degrees [1, 1, 2] have three perfect matchings; one of them puts a loop at 3.
shapes = Counter(
    tuple(sorted(map(tuple, match_half_edges([1, 1, 2], rng).edges.tolist()))) for _ in range(30_000)
)
for shape, count in shapes.items():
    print(shape, count / 30_000)

# A sampled graph keeps the blue seed 0 attached to the root 1 as edge 0.
g = sample_graph(DegreeModel.regular(1), 5, rng)
print("parity half-edge added:", g.parity, "degrees:", g.degrees.tolist())
print(dump_edgelist(g))
assert load_edgelist(dump_edgelist(g)) == g

# Poisson(3) graphs have a giant component holding most vertices.
g = sample_graph(DegreeModel.poisson(3.0), 20_000, rng)
comps = components(g)
print("largest component fraction:", comps.largest / g.n)

# Self-avoiding paths from the root grow roughly like a^k with a = 3 here.
print(count_sa_paths(sample_graph(DegreeModel.poisson(3.0), 5000, rng), 6))

"""
Building a hypergraph and looking at its structure
==================================================

A hypergraph is a list of node sets plus a feature row per node.
"""

import numpy as np

from hyperpred import Hypergraph
from hyperpred.hgraph import clique_expand, degrees, split

# four nodes, three hyperedges; node 3 only appears in the last one
H = Hypergraph(4, [[0, 1, 2], [1, 2], [2, 3]], np.eye(4))
print(H)
print("incidence (nodes x hyperedges):")
print(H.incidence.toarray().astype(int))

# node degree counts memberships, hyperedge degree is the set size
d = degrees(H)
print("node degrees:", d.node_deg, " hyperedge sizes:", d.edge_deg)

# the clique expansion joins every pair that shares a hyperedge
print("clique pairs:", sorted(clique_expand(H).pairs()))

# hyperedge-level split; validation and test take floor(20%) each
big = Hypergraph(10, [[i, (i + 1) % 10] for i in range(10)], np.eye(10))
s = split(big, seed=0)
print("split sizes (train, val, test):", s.sizes())

# bad input fails loudly
try:
    Hypergraph(2, [[0, 0]], np.eye(2))
except ValueError as exc:
    print("rejected:", exc)

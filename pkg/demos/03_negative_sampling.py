"""
Drawing negative hyperedges
===========================

Three samplers of increasing difficulty: uniform sets (SNS), connected sets
of the clique expansion (MNS) and one-member swaps of a real hyperedge (CNS).
"""

from collections import Counter

from hyperpred.datasets import planted_hypergraph
from hyperpred.hgraph import clique_expand, split
from hyperpred.negsample import build_eval_sets, cns, mns, sns
from hyperpred.numkit.rng import stream

H = planted_hypergraph(num_nodes=100, num_edges=80, num_features=20, seed=3)
ex = clique_expand(H)
rng = stream(0, "demo")

print("SNS:", sns(H, 4, rng))
print("MNS:", mns(H, ex, 4, rng))
source = H.edges[5].tolist()
print("CNS from", source, "->", cns(H, ex, rng, source_edges=[5]))

# evaluation sets: one negative per held-out positive, never an observed set
s = split(H, seed=0)
sets = build_eval_sets(H, s, seed=0)
for regime, ns in sets["test"].items():
    print(f"{regime}: {len(ns)} negatives for {len(s.test)} positives")
print("MIX sources:", Counter(sets["test"]["MIX"].sources))

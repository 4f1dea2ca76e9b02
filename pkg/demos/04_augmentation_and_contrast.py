"""
Augmented views and the dual contrastive loss
=============================================

Masking a fixed share of each hyperedge's members keeps every relation
alive.  Two such views are encoded, projected and compared.
"""

import numpy as np

from hyperpred.augment import augment, make_views
from hyperpred.contrast import ProjectedViews, dual_contrastive_loss, init_projectors, project
from hyperpred.datasets import planted_hypergraph
from hyperpred.encoder import encode, init_encoder
from hyperpred.numkit.rng import stream

H = planted_hypergraph(num_nodes=80, num_edges=60, num_features=30, seed=1)

for method in ("hyperedge", "bernoulli"):
    v = augment(H, H.features, 0.5, 0.3, stream(0, method), method)
    empty = sum(len(e) == 0 for e in v.edges())
    print(f"{method:9s}: removed {len(v.removed)} of {H.nnz} memberships, empty hyperedges {empty}, "
          f"masked feature columns {int((v.feature_mask == 0).sum())}")

enc = init_encoder(H.num_features, 16, stream(0, "enc"))
heads = init_projectors(16, stream(0, "proj"))


def loss_for(p_m, p_f):
    v1, v2 = make_views(H, H.features, p_m, p_f, stream(0, "views"))
    e1, e2 = encode(v1, v1.features, enc), encode(v2, v2.features, enc)
    (z1v, z1e), (z2v, z2e) = project(e1.P, e1.Q, heads), project(e2.P, e2.Q, heads)
    return dual_contrastive_loss(ProjectedViews(z1v, z2v, z1e, z2e)).item()


# unmasked views agree perfectly, so the loss is exactly zero
for p in (0.0, 0.3, 0.6, 0.9):
    print(f"p_m = p_f = {p}: contrastive loss {loss_for(p, p):.4f}")

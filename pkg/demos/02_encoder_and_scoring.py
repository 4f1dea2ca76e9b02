"""
Encoding nodes and scoring candidate hyperedges
===============================================

Node features are pushed to hyperedges and back, then a candidate set is
scored from the embeddings of its members.
"""

import numpy as np

import hyperpred.numkit as nk
from hyperpred.datasets import planted_hypergraph
from hyperpred.encoder import encode, init_encoder
from hyperpred.numkit.rng import stream
from hyperpred.scorer import attention_weights, init_scorer, score_batch, score_candidate

H = planted_hypergraph(num_nodes=60, num_edges=40, num_features=30, seed=0)
rng = stream(0, "demo")
params = {**init_encoder(H.num_features, 16, rng), **init_scorer(16, rng)}

emb = encode(H, H.features, params)
print("node embeddings", emb.P.shape, " hyperedge embeddings", emb.Q.shape)

# attention over the members of one observed hyperedge
members = H.edges[0].tolist()
alpha = attention_weights(emb.P.values[members], params)
print("members", members, "attention", np.round(alpha.values, 3))

res = score_candidate(emb.P, members, params)
print("predicted probability (untrained):", round(res.y_hat, 4))

# the batched path gives the same numbers for many candidates at once
batch = [e.tolist() for e in H.edges[:5]]
print("batch scores:", np.round(score_batch(emb.P, batch, params).values, 4))

# everything is differentiable through the tape
with nk.Tape() as tape:
    loss = nk.mean(score_batch(encode(H, H.features, params).P, batch, params))
nk.backward(tape, loss)
print("grad norm of predictor weights:", float(np.linalg.norm(params["predictor.w"].grad)))

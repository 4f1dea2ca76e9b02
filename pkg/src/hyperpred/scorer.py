"""Hyperedge candidate scoring.

Two node aggregators are available:

``attention``
    Each member gets a weight ``softmax_i(p_i W'' x)`` over the candidate,
    members are mixed as ``sum_i alpha_i p_i W'``, and the mixed rows are
    max-pooled.  The weights do not depend on the receiving member, so every
    mixed row is the same vector and the max pool returns it unchanged.
``maxmin``
    Element-wise max minus element-wise min of the member embeddings.

Either aggregate goes through a single linear unit and a sigmoid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numkit as nk
from .encoder import glorot

AGGREGATORS = ("attention", "maxmin")


@dataclass
class CandidateScore:
    candidate: tuple[int, ...]
    q_star: np.ndarray
    y_hat: float


def init_scorer(dim: int, rng: np.random.Generator) -> dict:
    params = {
        "aggregator.W_mix": glorot(rng, dim, dim),
        "aggregator.W_att": glorot(rng, dim, dim),
        "aggregator.query": glorot(rng, dim, 1),
        "predictor.w": glorot(rng, dim, 1),
        "predictor.b": np.zeros(1),
    }
    return {k: nk.Tensor(v, requires_grad=True, name=k) for k, v in params.items()}


def flatten(candidates: Sequence[Sequence[int]], num_nodes: int | None = None):
    """Member index array and set id per member for a batch of candidates."""
    sizes = np.array([len(c) for c in candidates], dtype=np.int64)
    if np.any(sizes == 0):
        raise ValueError("empty hyperedge candidate")
    idx = np.fromiter((v for c in candidates for v in c), dtype=np.int64, count=int(sizes.sum()))
    if num_nodes is not None and idx.size and (idx.min() < 0 or idx.max() >= num_nodes):
        raise IndexError(f"candidate node id out of range [0, {num_nodes})")
    seg = np.repeat(np.arange(len(candidates)), sizes)
    return idx, seg


def attention_logits(P_sub: nk.Tensor, params: dict) -> nk.Tensor:
    s = nk.matmul(nk.matmul(P_sub, params["aggregator.W_att"]), params["aggregator.query"])
    return nk.reshape(s, (P_sub.shape[0],))


def _attention_pool(P_sub: nk.Tensor, seg: np.ndarray, n: int, params: dict) -> nk.Tensor:
    alpha = nk.segment_softmax(attention_logits(P_sub, params), seg, n)
    mixed = nk.mul(nk.reshape(alpha, (alpha.shape[0], 1)), nk.matmul(P_sub, params["aggregator.W_mix"]))
    p_star = nk.segment_sum(mixed, seg, n)
    # one influence-reflected row per member, then max pooling over them
    return nk.segment_max(nk.gather_rows(p_star, seg), seg, n)


def aggregate(P: nk.Tensor, candidates, params: dict, aggregator: str = "attention") -> nk.Tensor:
    """One ``d``-vector per candidate."""
    idx, seg = flatten(candidates, P.shape[0])
    n = len(candidates)
    P_sub = nk.gather_rows(P, idx)
    if aggregator == "attention":
        return _attention_pool(P_sub, seg, n, params)
    if aggregator == "maxmin":
        return nk.sub(nk.segment_max(P_sub, seg, n), nk.segment_min(P_sub, seg, n))
    raise ValueError(f"unknown aggregator {aggregator!r}")


def predict(q: nk.Tensor, params: dict) -> nk.Tensor:
    logits = nk.add(nk.matmul(q, params["predictor.w"]), params["predictor.b"])
    return nk.sigmoid(nk.reshape(logits, (q.shape[0],)))


def score_batch(P: nk.Tensor, candidates, params: dict, aggregator: str = "attention") -> nk.Tensor:
    """Predicted probabilities for a batch of candidates."""
    return predict(aggregate(P, candidates, params, aggregator), params)


# -- single-candidate views of the same computation ------------------------


def attention_weights(P_sub, params: dict) -> nk.Tensor:
    P_sub = nk.as_tensor(P_sub)
    if P_sub.shape[0] == 0:
        raise ValueError("empty hyperedge candidate")
    return nk.softmax(attention_logits(P_sub, params))


def influence_embeddings(P_sub, alpha, params: dict) -> nk.Tensor:
    """Rows ``p*_j = sum_i alpha_i p_i W'`` for every member ``j``."""
    P_sub, alpha = nk.as_tensor(P_sub), nk.as_tensor(alpha)
    m = P_sub.shape[0]
    mixed = nk.mul(nk.reshape(alpha, (m, 1)), nk.matmul(P_sub, params["aggregator.W_mix"]))
    p_star = nk.segment_sum(mixed, np.zeros(m, dtype=np.int64), 1)
    return nk.gather_rows(p_star, np.zeros(m, dtype=np.int64))


def score_candidate(P, candidate: Sequence[int], params: dict) -> CandidateScore:
    P = nk.as_tensor(P)
    q = aggregate(P, [list(candidate)], params, "attention")
    y = predict(q, params)
    return CandidateScore(tuple(int(v) for v in candidate), q.values[0].copy(), float(y.values[0]))

"""Membership and feature masking for contrastive views.

``hyperedge`` masking removes exactly ``floor(p_m * s)`` uniformly chosen
members from every hyperedge of size ``s``, so no hyperedge ever becomes
empty.  ``bernoulli`` masking drops each membership independently with
probability ``p_m``, which may empty a hyperedge.  Feature masking draws a
single keep/drop decision per feature column and applies it to every node.

Views keep the original node and hyperedge index spaces; nodes left without
any hyperedge simply become isolated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .hgraph import Hypergraph
from .numkit.rng import split as split_rng

METHODS = ("hyperedge", "bernoulli")


@dataclass
class AugmentedView:
    incidence: sp.csr_matrix
    features: object
    edge_weights: np.ndarray
    feature_mask: np.ndarray
    removed: np.ndarray  # (k, 2) array of removed (node, hyperedge) memberships
    mask_rates: tuple[float, float]
    method: str

    @property
    def num_nodes(self) -> int:
        return self.incidence.shape[0]

    @property
    def num_edges(self) -> int:
        return self.incidence.shape[1]

    def edges(self) -> list[np.ndarray]:
        csc = self.incidence.tocsc()
        return [np.sort(csc.indices[csc.indptr[j] : csc.indptr[j + 1]]) for j in range(self.num_edges)]

    def to_hypergraph(self, node_labels=None) -> Hypergraph:
        return Hypergraph(
            self.num_nodes, self.edges(), self.features, self.edge_weights, node_labels,
            allow_empty=True,
        )


def _check_rate(name: str, p: float) -> None:
    if not 0.0 <= p < 1.0:
        raise ValueError(f"{name}={p} outside [0, 1)")


def mask_features(X, keep: np.ndarray):
    if sp.issparse(X):
        return (sp.csr_matrix(X) @ sp.diags(keep.astype(np.float64))).tocsr()
    return X * keep.astype(np.float64)


def augment(
    H: Hypergraph,
    X,
    p_m: float,
    p_f: float,
    rng: np.random.Generator,
    method: str = "hyperedge",
) -> AugmentedView:
    _check_rate("p_m", p_m)
    _check_rate("p_f", p_f)
    if method not in METHODS:
        raise ValueError(f"unknown augmentation method {method!r}")

    csc = H.incidence_csc
    nodes = csc.indices
    edge_of = np.repeat(np.arange(H.num_edges), np.diff(csc.indptr))
    keys = rng.random(nodes.size)
    if method == "hyperedge":
        # rank of each membership within its hyperedge under a random key
        order = np.lexsort((keys, edge_of))
        rank = np.empty(nodes.size, dtype=np.int64)
        rank[order] = np.arange(nodes.size) - csc.indptr[edge_of[order]]
        sizes = np.diff(csc.indptr)
        # round first so that e.g. 0.7 * 90 drops 63, not 62
        n_drop = np.floor(np.round(p_m * sizes, 9)).astype(np.int64)
        drop = rank < n_drop[edge_of]
    else:
        drop = keys < p_m

    keep = ~drop
    inc = sp.csr_matrix(
        (np.ones(int(keep.sum())), (nodes[keep], edge_of[keep])),
        shape=(H.num_nodes, H.num_edges),
    )
    feature_keep = rng.random(X.shape[1]) >= p_f
    return AugmentedView(
        incidence=inc,
        features=mask_features(X, feature_keep),
        edge_weights=H.edge_weights,
        feature_mask=feature_keep.astype(np.int8),
        removed=np.stack([nodes[drop], edge_of[drop]], axis=1),
        mask_rates=(p_m, p_f),
        method=method,
    )


def make_views(H, X, p_m, p_f, rng, method="hyperedge") -> tuple[AugmentedView, AugmentedView]:
    """Two independent views drawn from child streams of ``rng``."""
    r1, r2 = split_rng(rng, 2)
    return augment(H, X, p_m, p_f, r1, method), augment(H, X, p_m, p_f, r2, method)

"""Two-stage (node -> hyperedge -> node) hypergraph encoder.

Per layer ``k``::

    Q_k = prelu(D_E^-1 H^T P_{k-1} W_E + b_E)
    P_k = prelu(D_V^-1 H W Q_k W_V + b_V)

with ``P_0 = X``, ``D_E`` the hyperedge sizes, ``D_V`` the weighted node
degrees and ``W`` the diagonal of hyperedge weights.  A zero degree gives a
zero inverse, so a node with no hyperedges receives a zero message.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import numkit as nk
from .hgraph import safe_inverse

PREFIX = "encoder"


@dataclass
class Embeddings:
    P: nk.Tensor
    Q: nk.Tensor


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape=None) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_in, fan_out))


def init_encoder(num_features: int, dim: int, rng: np.random.Generator, layers: int = 1) -> dict:
    params = {}
    d_in = num_features
    for k in range(layers):
        p = f"{PREFIX}.{k}"
        params[f"{p}.W_E"] = glorot(rng, d_in, dim)
        params[f"{p}.b_E"] = np.zeros(dim)
        params[f"{p}.W_V"] = glorot(rng, dim, dim)
        params[f"{p}.b_V"] = np.zeros(dim)
        params[f"{p}.slope"] = np.array(0.25)
        d_in = dim
    return {k: nk.Tensor(v, requires_grad=True, name=k) for k, v in params.items()}


def num_layers(params: dict) -> int:
    return len({k.split(".")[1] for k in params if k.startswith(PREFIX + ".")})


def propagators(incidence, edge_weights) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Row-normalised operators ``D_E^-1 H^T`` and ``D_V^-1 H W``."""
    inc = sp.csr_matrix(incidence, dtype=np.float64)
    w = np.asarray(edge_weights, dtype=np.float64)
    edge_deg = np.asarray(inc.sum(axis=0)).ravel()
    hw = inc @ sp.diags(w)
    node_deg = np.asarray(hw.sum(axis=1)).ravel()
    to_edges = (sp.diags(safe_inverse(edge_deg)) @ inc.T).tocsr()
    to_nodes = (sp.diags(safe_inverse(node_deg)) @ hw).tocsr()
    return to_edges, to_nodes


def graph_propagators(graph) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """:func:`propagators` for ``graph``, cached on the (immutable) graph object."""
    ops = getattr(graph, "_propagators", None)
    if ops is None:
        ops = propagators(graph.incidence, graph.edge_weights)
        try:
            graph._propagators = ops
        except AttributeError:
            pass
    return ops


def encode(graph, X, params: dict) -> Embeddings:
    """Encode ``graph`` (anything with ``incidence`` and ``edge_weights``).

    ``X`` is a constant dense or sparse feature matrix.  The same ``params``
    are used for the original graph and for augmented views.
    """
    to_edges, to_nodes = graph_propagators(graph)
    n_layers = num_layers(params)
    if n_layers == 0:
        raise ValueError("no encoder parameters")
    w0 = params[f"{PREFIX}.0.W_E"]
    if X.shape[1] != w0.shape[0]:
        raise ValueError(f"feature dim {X.shape[1]} does not match W_E input dim {w0.shape[0]}")
    if X.shape[0] != to_nodes.shape[0]:
        raise ValueError(f"feature rows {X.shape[0]} != number of nodes {to_nodes.shape[0]}")

    P = X
    Q = None
    for k in range(n_layers):
        p = f"{PREFIX}.{k}"
        slope = params[f"{p}.slope"]
        Q = nk.prelu(
            nk.add(nk.spmm(to_edges, nk.matmul(P, params[f"{p}.W_E"])), params[f"{p}.b_E"]),
            slope,
        )
        P = nk.prelu(
            nk.add(nk.spmm(to_nodes, nk.matmul(Q, params[f"{p}.W_V"])), params[f"{p}.b_V"]),
            slope,
        )
    return Embeddings(P, Q)

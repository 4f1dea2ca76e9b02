"""Hypergraph data model, file I/O, degrees, clique expansion and splits."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .numkit.rng import stream


class HypergraphError(ValueError):
    """Malformed or invalid hypergraph data."""


def _as_features(features, num_nodes: int):
    if sp.issparse(features):
        features = sp.csr_matrix(features, dtype=np.float64)
    else:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1 and num_nodes == 0:
            features = features.reshape(0, 0)
        if features.ndim != 2:
            raise HypergraphError("features must be a 2-D matrix")
        if not np.all(np.isfinite(features)):
            raise HypergraphError("features contain NaN or Inf")
    if features.shape[0] != num_nodes:
        raise HypergraphError(
            f"features have {features.shape[0]} rows but num_nodes={num_nodes}"
        )
    return features


class Hypergraph:
    """Nodes ``0..num_nodes-1``, hyperedges as node sets, and node features.

    The incidence matrix is kept in both CSR (node -> hyperedges) and CSC
    (hyperedge -> nodes) layouts.  Instances are treated as immutable.

    ``features`` may be a dense array or a scipy sparse matrix; bag-of-words
    features are usually sparse and the encoder exploits that.
    """

    def __init__(
        self,
        num_nodes: int,
        hyperedges: Sequence[Sequence[int]],
        features,
        edge_weights=None,
        node_labels: Sequence[str] | None = None,
        allow_empty: bool = False,
    ):
        self.num_nodes = int(num_nodes)
        edges = []
        for j, e in enumerate(hyperedges):
            arr = np.asarray(list(e), dtype=np.int64)
            if arr.size == 0 and not allow_empty:
                raise HypergraphError(f"hyperedge {j}: empty hyperedge")
            if arr.size and (arr.min() < 0 or arr.max() >= self.num_nodes):
                raise HypergraphError(f"hyperedge {j}: node id out of range [0, {self.num_nodes})")
            uniq = np.unique(arr)
            if uniq.size != arr.size:
                raise HypergraphError(f"hyperedge {j}: duplicate member")
            edges.append(uniq)
        self.edges: list[np.ndarray] = edges
        self.num_edges = len(edges)

        if edge_weights is None:
            edge_weights = np.ones(self.num_edges)
        edge_weights = np.asarray(edge_weights, dtype=np.float64)
        if edge_weights.shape != (self.num_edges,):
            raise HypergraphError(
                f"edge_weights has length {edge_weights.size}, expected {self.num_edges}"
            )
        if np.any(edge_weights <= 0) or not np.all(np.isfinite(edge_weights)):
            raise HypergraphError("edge_weights must be positive and finite")
        self.edge_weights = edge_weights
        self.features = _as_features(features, self.num_nodes)
        if node_labels is not None and len(node_labels) != self.num_nodes:
            raise HypergraphError("node_labels length differs from num_nodes")
        self.node_labels = list(node_labels) if node_labels is not None else None

        sizes = np.array([e.size for e in edges], dtype=np.int64)
        rows = np.concatenate(edges) if edges else np.zeros(0, dtype=np.int64)
        cols = np.repeat(np.arange(self.num_edges), sizes)
        data = np.ones(rows.size)
        shape = (self.num_nodes, self.num_edges)
        self.incidence = sp.csr_matrix((data, (rows, cols)), shape=shape)
        self.incidence_csc = self.incidence.tocsc()

    # -- convenience -------------------------------------------------------

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @property
    def nnz(self) -> int:
        return int(self.incidence.nnz)

    def edge_sizes(self) -> np.ndarray:
        return np.diff(self.incidence_csc.indptr)

    def edge_set(self) -> set[frozenset]:
        return {frozenset(e.tolist()) for e in self.edges}

    def restrict_edges(self, idx) -> "Hypergraph":
        """Same nodes and features, only the hyperedges listed in ``idx``."""
        idx = np.asarray(idx, dtype=np.int64)
        return Hypergraph(
            self.num_nodes,
            [self.edges[j] for j in idx],
            self.features,
            self.edge_weights[idx],
            self.node_labels,
            allow_empty=True,
        )

    def with_structure(self, hyperedges, features) -> "Hypergraph":
        """Copy with replaced memberships/features; hyperedges may be empty."""
        return Hypergraph(
            self.num_nodes, hyperedges, features, self.edge_weights, self.node_labels,
            allow_empty=True,
        )

    def __repr__(self) -> str:
        return f"Hypergraph(|V|={self.num_nodes}, |E|={self.num_edges}, F={self.num_features})"


# ---------------------------------------------------------------- degrees


@dataclass(frozen=True)
class DegreeVectors:
    node_deg: np.ndarray
    edge_deg: np.ndarray


def degrees(H: Hypergraph) -> DegreeVectors:
    """Weighted node degrees ``sum_j w_j h_ij`` and hyperedge sizes."""
    node_deg = np.asarray(H.incidence @ H.edge_weights, dtype=np.float64).ravel()
    edge_deg = H.edge_sizes().astype(np.int64)
    return DegreeVectors(node_deg, edge_deg)


def safe_inverse(deg) -> np.ndarray:
    """Elementwise ``1/deg`` with ``1/0 := 0``."""
    deg = np.asarray(deg, dtype=np.float64)
    out = np.zeros_like(deg)
    nz = deg != 0
    out[nz] = 1.0 / deg[nz]
    return out


# -------------------------------------------------------- clique expansion


@dataclass(frozen=True)
class CliqueExpansion:
    """Symmetric 0/1 adjacency of nodes that share at least one hyperedge."""

    adjacency: sp.csr_matrix

    def neighbors(self, u: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[u] : a.indptr[u + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def pairs(self) -> set[tuple[int, int]]:
        coo = sp.triu(self.adjacency, k=1).tocoo()
        return set(zip(coo.row.tolist(), coo.col.tolist()))


def clique_expand(H: Hypergraph) -> CliqueExpansion:
    inc = sp.csr_matrix(H.incidence, dtype=np.float64)
    co = (inc @ inc.T).tocsr()
    co.setdiag(0)
    co.eliminate_zeros()
    co.data[:] = 1.0
    co.sort_indices()
    return CliqueExpansion(co.astype(np.int8).tocsr())


# ----------------------------------------------------------------- splits


@dataclass(frozen=True)
class SplitSpec:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.val), len(self.test)


def split(H: Hypergraph, seed: int, ratios=(0.6, 0.2, 0.2)) -> SplitSpec:
    """Random train/val/test partition of hyperedge indices.

    Validation and test sizes are ``floor(ratio * |E|)``; the leftover goes
    to train.
    """
    if len(ratios) != 3:
        raise ValueError("ratios must have three entries")
    for r in ratios:
        if not 0.0 < r < 1.0:
            raise ValueError(f"split ratio {r} outside (0, 1)")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise ValueError(f"split ratios sum to {sum(ratios)}, expected 1")
    n = H.num_edges
    n_val = math.floor(ratios[1] * n)
    n_test = math.floor(ratios[2] * n)
    perm = stream(seed, "split").permutation(n)
    n_train = n - n_val - n_test
    return SplitSpec(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
        seed=int(seed),
    )


# ------------------------------------------------------------------- files


def _parse_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise HypergraphError(f"{path}: parse error at line {exc.lineno}: {exc.msg}") from exc


def hypergraph_from_dict(doc: dict) -> Hypergraph:
    for key in ("num_nodes", "features", "hyperedges"):
        if key not in doc:
            raise HypergraphError(f"missing key {key!r}")
    num_nodes = doc["num_nodes"]
    if not isinstance(num_nodes, int) or num_nodes < 0:
        raise HypergraphError("num_nodes must be a non-negative integer")
    feats = doc["features"]
    widths = {len(row) for row in feats}
    if len(widths) > 1:
        raise HypergraphError("feature rows have differing lengths")
    features = np.asarray(feats, dtype=np.float64).reshape(len(feats), widths.pop() if widths else 0)
    for j, e in enumerate(doc["hyperedges"]):
        if not all(isinstance(v, int) for v in e):
            raise HypergraphError(f"hyperedge {j}: members must be integers")
    return Hypergraph(
        num_nodes,
        doc["hyperedges"],
        features,
        doc.get("edge_weights"),
        doc.get("node_labels"),
        allow_empty=doc.get("allow_empty", False),
    )


def hypergraph_to_dict(H: Hypergraph) -> dict:
    feats = H.features.toarray() if sp.issparse(H.features) else H.features
    doc = {
        "num_nodes": H.num_nodes,
        "features": feats.tolist(),
        "hyperedges": [e.tolist() for e in H.edges],
        "edge_weights": H.edge_weights.tolist(),
    }
    if H.node_labels is not None:
        doc["node_labels"] = H.node_labels
    if any(e.size == 0 for e in H.edges):
        doc["allow_empty"] = True
    return doc


def load_hypergraph(path, sparse_features: bool | None = None) -> Hypergraph:
    """Read a hypergraph JSON file.

    Features are stored densely on disk; with ``sparse_features=None`` they
    are converted to CSR when fewer than 10% of entries are nonzero.
    """
    H = hypergraph_from_dict(_parse_json(path))
    X = H.features
    if sparse_features is None:
        sparse_features = X.size > 0 and np.count_nonzero(X) < 0.1 * X.size
    if sparse_features:
        H.features = sp.csr_matrix(X)
    return H


def save_hypergraph(H: Hypergraph, path) -> None:
    Path(path).write_text(json.dumps(hypergraph_to_dict(H)), encoding="utf-8")


def save_split(s: SplitSpec, path) -> None:
    doc = {"seed": s.seed, "train": s.train.tolist(), "val": s.val.tolist(), "test": s.test.tolist()}
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_split(path, H: Hypergraph | None = None) -> SplitSpec:
    doc = _parse_json(path)
    s = SplitSpec(
        train=np.asarray(doc["train"], dtype=np.int64),
        val=np.asarray(doc["val"], dtype=np.int64),
        test=np.asarray(doc["test"], dtype=np.int64),
        seed=int(doc.get("seed", 0)),
    )
    if H is not None:
        allidx = np.concatenate([s.train, s.val, s.test])
        if allidx.size != H.num_edges or not np.array_equal(np.sort(allidx), np.arange(H.num_edges)):
            raise HypergraphError(f"{path}: split is not a partition of {H.num_edges} hyperedges")
    return s

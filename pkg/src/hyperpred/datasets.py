"""Raw-dataset conversion and a synthetic hypergraph generator.

Two raw co-citation layouts are understood by :func:`ingest`:

pickle directory
    ``features.pickle`` (scipy sparse or dense ``|V| x F`` matrix) and
    ``hypergraph.pickle`` (dict mapping a hyperedge key to an iterable of
    node ids), as distributed with the common co-citation benchmarks.
text directory
    ``features.txt`` with one whitespace-separated row of floats per node and
    ``hyperedges.txt`` with one whitespace- or comma-separated list of node
    ids per hyperedge.  Blank lines and lines starting with ``#`` are
    ignored.

Hyperedges of size one are kept; their count is reported.  Duplicate node
ids inside a raw hyperedge are collapsed.
"""
from __future__ import annotations

import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .hgraph import Hypergraph, HypergraphError
from .numkit.rng import stream


@dataclass
class IngestSummary:
    num_nodes: int
    num_edges: int
    num_features: int
    singleton_edges: int

    def __str__(self) -> str:
        return (f"|V|={self.num_nodes} |E|={self.num_edges} F={self.num_features} "
                f"(size-1 hyperedges kept: {self.singleton_edges})")


def _split_ids(line: str) -> list[str]:
    return line.replace(",", " ").split()


def _read_text(raw: Path) -> tuple[np.ndarray, list[list[int]]]:
    rows = []
    for lineno, line in enumerate((raw / "features.txt").read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            rows.append([float(x) for x in line.split()])
        except ValueError:
            raise HypergraphError(f"features.txt line {lineno}: malformed row") from None
        if len(rows[-1]) != len(rows[0]):
            raise HypergraphError(f"features.txt line {lineno}: expected {len(rows[0])} values")
    edges = []
    for lineno, line in enumerate((raw / "hyperedges.txt").read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            edges.append([int(x) for x in _split_ids(line)])
        except ValueError:
            raise HypergraphError(f"hyperedges.txt line {lineno}: malformed row") from None
        bad = [v for v in edges[-1] if v < 0 or v >= len(rows)]
        if bad:
            raise HypergraphError(f"hyperedges.txt line {lineno}: node id {bad[0]} out of range")
    return np.asarray(rows, dtype=np.float64), edges


def _read_pickles(raw: Path):
    with open(raw / "features.pickle", "rb") as fh:
        X = pickle.load(fh)
    with open(raw / "hypergraph.pickle", "rb") as fh:
        hg = pickle.load(fh)
    values = hg.values() if isinstance(hg, dict) else hg
    edges = [[int(v) for v in e] for e in values]
    X = sp.csr_matrix(X, dtype=np.float64) if sp.issparse(X) else np.asarray(X, dtype=np.float64)
    return X, edges


def ingest(raw_path) -> tuple[Hypergraph, IngestSummary]:
    raw = Path(raw_path)
    if (raw / "hypergraph.pickle").exists():
        X, edges = _read_pickles(raw)
    elif (raw / "hyperedges.txt").exists():
        X, edges = _read_text(raw)
    else:
        raise HypergraphError(f"{raw}: no hypergraph.pickle or hyperedges.txt found")
    edges = [sorted(set(e)) for e in edges if e]
    H = Hypergraph(X.shape[0], edges, X)
    summary = IngestSummary(H.num_nodes, H.num_edges, H.num_features,
                            int(np.sum(H.edge_sizes() == 1)))
    return H, summary


def planted_hypergraph(
    num_nodes: int = 400,
    num_edges: int = 400,
    num_features: int = 300,
    clusters: int = 8,
    latent_dim: int = 8,
    neighborhood: int = 12,
    words_per_node: int = 15,
    seed: int = 0,
) -> Hypergraph:
    """Synthetic hypergraph whose hyperedges are tight latent neighbourhoods.

    Nodes get unit latent vectors around ``clusters`` centres.  A hyperedge
    takes a uniform anchor node plus 1 to 5 members drawn from the anchor's
    ``neighborhood`` most similar nodes.  Features are binary bag-of-words
    whose word choice follows the latent vector, so feature similarity is a
    noisy proxy for co-membership.
    """
    rng = stream(seed, "planted")
    centres = rng.normal(size=(clusters, latent_dim))
    z = centres[rng.integers(clusters, size=num_nodes)] + 0.6 * rng.normal(size=(num_nodes, latent_dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    sim = z @ z.T
    np.fill_diagonal(sim, -np.inf)
    near = np.argsort(-sim, axis=1)[:, :neighborhood]

    edges = set()
    while len(edges) < num_edges:
        a = int(rng.integers(num_nodes))
        k = int(rng.integers(1, 6))
        others = rng.choice(near[a], size=k, replace=False)
        edges.add(tuple(sorted({a, *others.tolist()})))

    words = rng.normal(size=(num_features, latent_dim))
    logits = 3.0 * (z @ words.T)
    prob = np.exp(logits - logits.max(axis=1, keepdims=True))
    prob /= prob.sum(axis=1, keepdims=True)
    rows, cols = [], []
    for v in range(num_nodes):
        picked = np.unique(rng.choice(num_features, size=words_per_node, p=prob[v]))
        rows.extend([v] * picked.size)
        cols.extend(picked.tolist())
    X = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(num_nodes, num_features))
    return Hypergraph(num_nodes, sorted(edges), X)

"""Heuristic negative hyperedge samplers.

SNS
    ``k`` distinct uniform nodes.
MNS
    A connected ``k``-node set of the clique expansion, grown from a uniform
    non-isolated start node by repeatedly adding a uniform node from the
    current set's neighbourhood.  A start that stalls below ``k`` is
    abandoned and a new start drawn.
CNS
    Take a uniform hyperedge ``e`` and member ``u``; replace ``u`` with a
    uniform ``v`` outside ``e`` that is adjacent to every other member.
MIX
    Each negative comes from one of the three samplers chosen uniformly.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .hgraph import CliqueExpansion, Hypergraph, SplitSpec, clique_expand
from .numkit.rng import stream

log = logging.getLogger(__name__)

REGIMES = ("SNS", "MNS", "CNS", "MIX")
MAX_RETRIES = 100


class SamplerExhausted(RuntimeError):
    """No valid negative could be produced within the retry budget."""


@dataclass
class NegativeSet:
    candidates: list[tuple[int, ...]]
    sampler_tag: str
    seed: int
    sources: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.candidates)

    def to_dict(self) -> dict:
        doc = {"regime": self.sampler_tag, "seed": self.seed,
               "candidates": [list(c) for c in self.candidates]}
        if self.sampler_tag == "MIX":
            doc["sources"] = self.sources
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "NegativeSet":
        return cls([tuple(c) for c in doc["candidates"]], doc["regime"], int(doc["seed"]),
                   list(doc.get("sources", [])))


def sns(H: Hypergraph, size_k: int, rng: np.random.Generator) -> tuple[int, ...]:
    if size_k < 2 or size_k > H.num_nodes:
        raise ValueError(f"SNS size {size_k} outside [2, {H.num_nodes}]")
    return tuple(sorted(rng.choice(H.num_nodes, size=size_k, replace=False).tolist()))


def mns(
    H: Hypergraph,
    expansion: CliqueExpansion,
    size_k: int,
    rng: np.random.Generator,
    max_retries: int = MAX_RETRIES,
) -> tuple[int, ...]:
    if size_k < 2:
        raise ValueError(f"MNS size {size_k} < 2")
    starts = np.flatnonzero(expansion.degree() > 0)
    if starts.size == 0 or size_k > H.num_nodes:
        raise SamplerExhausted(f"no connected {size_k}-node set exists")
    for _ in range(max_retries):
        u = int(starts[rng.integers(starts.size)])
        chosen = {u}
        frontier = set(expansion.neighbors(u).tolist())
        while len(chosen) < size_k and frontier:
            options = sorted(frontier)
            v = options[rng.integers(len(options))]
            chosen.add(v)
            frontier.discard(v)
            frontier.update(w for w in expansion.neighbors(v).tolist() if w not in chosen)
        if len(chosen) == size_k:
            return tuple(sorted(chosen))
    raise SamplerExhausted(f"MNS found no connected {size_k}-node set in {max_retries} tries")


def cns(
    H: Hypergraph,
    expansion: CliqueExpansion,
    rng: np.random.Generator,
    source_edges=None,
    max_retries: int = MAX_RETRIES,
) -> tuple[int, ...]:
    """Clique negative. ``source_edges`` restricts which hyperedges are perturbed."""
    pool = np.arange(H.num_edges) if source_edges is None else np.asarray(source_edges)
    if pool.size == 0:
        raise SamplerExhausted("no hyperedges to perturb")
    for _ in range(max_retries):
        e = H.edges[int(pool[rng.integers(pool.size)])]
        if e.size < 2:
            continue
        u = int(e[rng.integers(e.size)])
        rest = [int(x) for x in e if x != u]
        common = set(expansion.neighbors(rest[0]).tolist())
        for w in rest[1:]:
            common.intersection_update(expansion.neighbors(w).tolist())
        common.difference_update(e.tolist())
        if not common:
            continue
        options = sorted(common)
        v = options[rng.integers(len(options))]
        return tuple(sorted(rest + [v]))
    raise SamplerExhausted(f"CNS found no replaceable member in {max_retries} tries")


def draw_unique(
    fn: Callable[[], tuple[int, ...]],
    forbidden: set[frozenset],
    max_retries: int = MAX_RETRIES,
) -> tuple[int, ...]:
    """Call ``fn`` until it returns a set not in ``forbidden``."""
    for _ in range(max_retries):
        try:
            cand = fn()
        except SamplerExhausted:
            continue
        if frozenset(cand) not in forbidden:
            return cand
    raise SamplerExhausted("could not draw a non-observed negative")


def size_sampler(sizes, num_nodes: int, rng: np.random.Generator) -> Callable[[], int]:
    """Draw sizes from an empirical size distribution, clipped to [2, |V|]."""
    sizes = np.asarray(sizes, dtype=np.int64)

    def draw() -> int:
        return int(np.clip(sizes[rng.integers(sizes.size)], 2, num_nodes))

    return draw


class Sampler:
    """All samplers over one hypergraph, sharing one clique expansion."""

    def __init__(self, H: Hypergraph, expansion: CliqueExpansion | None = None,
                 forbidden: set[frozenset] | None = None):
        self.H = H
        self.expansion = expansion if expansion is not None else clique_expand(H)
        self.forbidden = forbidden if forbidden is not None else H.edge_set()

    def draw(self, regime: str, rng, size: Callable[[], int], source_edges=None) -> tuple[tuple[int, ...], str]:
        """One negative; returns ``(candidate, sampler actually used)``."""
        if regime == "MIX":
            regime = REGIMES[int(rng.integers(3))]
        if regime == "SNS":
            fn = lambda: sns(self.H, size(), rng)
        elif regime == "MNS":
            fn = lambda: mns(self.H, self.expansion, size(), rng)
        elif regime == "CNS":
            fn = lambda: cns(self.H, self.expansion, rng, source_edges)
        else:
            raise ValueError(f"unknown regime {regime!r}")
        return draw_unique(fn, self.forbidden), regime

    def negative_set(self, regime: str, n: int, positives_idx, seed: int, stream_name: str) -> NegativeSet:
        rng = stream(seed, stream_name)
        positives_idx = np.asarray(positives_idx, dtype=np.int64)
        sizes = self.H.edge_sizes()[positives_idx] if positives_idx.size else self.H.edge_sizes()
        size = size_sampler(sizes, self.H.num_nodes, rng)
        cands, sources = [], []
        for _ in range(n):
            c, src = self.draw(regime, rng, size, positives_idx if positives_idx.size else None)
            cands.append(c)
            sources.append(src)
        return NegativeSet(cands, regime, seed, sources if regime == "MIX" else [])


def build_eval_sets(H: Hypergraph, split: SplitSpec, seed: int,
                    regimes=REGIMES) -> dict[str, dict[str, NegativeSet | None]]:
    """Negatives for the validation and test splits, one set per regime.

    Each set has as many negatives as the split has positives.  A regime
    whose sampler is exhausted maps to ``None`` and a warning is logged.
    """
    sampler = Sampler(H)
    out: dict[str, dict[str, NegativeSet | None]] = {}
    for part, idx in (("val", split.val), ("test", split.test)):
        out[part] = {}
        for regime in regimes:
            try:
                out[part][regime] = sampler.negative_set(
                    regime, len(idx), idx, seed, f"negatives/{part}/{regime}"
                )
            except SamplerExhausted as exc:
                log.warning("%s %s negatives unavailable: %s", part, regime, exc)
                out[part][regime] = None
    return out

"""Hyperedge prediction with context-aware aggregation and dual contrastive learning."""
from .hgraph import (
    CliqueExpansion,
    DegreeVectors,
    Hypergraph,
    HypergraphError,
    SplitSpec,
    clique_expand,
    degrees,
    load_hypergraph,
    save_hypergraph,
    split,
)
from .trainer import EvalReport, TrainConfig, TrainResult, Trainer, evaluate, train

__version__ = "0.1.0"

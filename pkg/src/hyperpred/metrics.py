"""Ranking metrics for binary hyperedge classification."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.stats import rankdata


class MetricUndefined(ValueError):
    pass


def _validate(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-D and the same length")
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be 0 or 1")
    return scores, labels.astype(bool)


def auroc(scores, labels) -> float:
    """Mann-Whitney AUROC; tied positive/negative pairs count one half."""
    scores, pos = _validate(scores, labels)
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricUndefined("AUROC needs both positive and negative examples")
    ranks = rankdata(scores)  # average ranks for ties
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """Mean precision at the rank of each positive.

    Examples are ordered by descending score; equal scores keep their input
    order.  The sum is exact rational arithmetic, so the result is the
    correctly rounded value.
    """
    scores, pos = _validate(scores, labels)
    if not pos.any():
        raise MetricUndefined("AP needs at least one positive example")
    order = np.argsort(-scores, kind="stable")
    hits = pos[order]
    ranks = np.flatnonzero(hits) + 1
    total = sum((Fraction(h, int(r)) for h, r in enumerate(ranks, 1)), Fraction(0))
    return float(total / ranks.size)

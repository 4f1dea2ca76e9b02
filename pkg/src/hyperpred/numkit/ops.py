"""Differentiable primitives.

Every function accepts :class:`Tensor` inputs (or plain arrays for
constants), returns a new :class:`Tensor`, and records a backward rule when a
tape is active.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .tensor import NumericError, Tensor, as_tensor, record


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _dense(x) -> np.ndarray:
    return x.toarray() if sp.issparse(x) else np.asarray(x)


# ---------------------------------------------------------------- linear algebra


def matmul(a, b) -> Tensor:
    """``a @ b``. Either side may be a constant array or sparse matrix."""
    a_const = not isinstance(a, Tensor)
    b_const = not isinstance(b, Tensor)
    av = a if a_const else a.values
    bv = b if b_const else b.values
    if av.shape[-1] != bv.shape[0]:
        raise ValueError(f"matmul shape mismatch: {av.shape} @ {bv.shape}")
    out = Tensor(_dense(av @ bv))

    def back(g):
        ga = None if a_const else _dense(g @ bv.T)
        gb = None if b_const else _dense(av.T @ g)
        return ga, gb

    inputs = [t for t in (a, b) if isinstance(t, Tensor)]
    if a_const:
        return record(out, inputs, lambda g: (back(g)[1],))
    if b_const:
        return record(out, inputs, lambda g: (back(g)[0],))
    return record(out, inputs, back)


def spmm(S, D: Tensor, row_scale=None) -> Tensor:
    """``diag(row_scale) @ S @ D`` for a constant sparse ``S``.

    Rows whose scale is zero come out exactly zero.
    """
    D = as_tensor(D)
    S = sp.csr_matrix(S)
    if S.shape[1] != D.shape[0]:
        raise ValueError(f"spmm shape mismatch: {S.shape} @ {D.shape}")
    if row_scale is not None:
        row_scale = np.asarray(row_scale, dtype=np.float64)
        if row_scale.shape != (S.shape[0],):
            raise ValueError(
                f"row_scale has length {row_scale.shape}, expected {S.shape[0]}"
            )
        S = sp.diags(row_scale) @ S
    out = Tensor(S @ D.values)
    ST = S.T.tocsr()
    return record(out, [D], lambda g: (ST @ g,))


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.values + b.values)
    return record(
        out,
        [a, b],
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.values - b.values)
    return record(
        out,
        [a, b],
        lambda g: (_unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)),
    )


def mul(a, b) -> Tensor:
    """Elementwise product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.values * b.values)
    return record(
        out,
        [a, b],
        lambda g: (
            _unbroadcast(g * b.values, a.shape),
            _unbroadcast(g * a.values, b.shape),
        ),
    )


def scale(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.values * c)
    return record(out, [a], lambda g: (g * c,))


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def total(a: Tensor) -> Tensor:
    """Sum of all entries, as a scalar tensor."""
    out = Tensor(a.values.sum())
    return record(out, [a], lambda g: (np.broadcast_to(g, a.shape).copy(),))


def mean(a: Tensor) -> Tensor:
    n = a.values.size
    out = Tensor(a.values.mean())
    return record(out, [a], lambda g: (np.full(a.shape, float(g) / n),))


def reshape(a: Tensor, shape) -> Tensor:
    out = Tensor(a.values.reshape(shape))
    return record(out, [a], lambda g: (g.reshape(a.shape),))


# ------------------------------------------------------------------ activations


def prelu(x: Tensor, slope) -> Tensor:
    """``x`` where positive, ``slope * x`` otherwise. ``slope`` may be learnable."""
    x, slope = as_tensor(x), as_tensor(slope)
    pos = x.values > 0
    out = Tensor(np.where(pos, x.values, slope.values * x.values))

    def back(g):
        gx = np.where(pos, g, g * slope.values)
        gs = _unbroadcast(np.where(pos, 0.0, g * x.values), slope.shape)
        return gx, gs

    return record(out, [x, slope], back)


def _elu_deriv(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def elu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    v = np.where(x.values > 0, x.values, np.expm1(np.minimum(x.values, 0.0)))
    out = Tensor(v)
    return record(out, [x], lambda g: (g * _elu_deriv(x.values),))


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    v = x.values
    # split by sign so exp never overflows
    e = np.exp(-np.abs(v))
    s = np.where(v >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = Tensor(s)
    return record(out, [x], lambda g: (g * s * (1.0 - s),))


def log(x: Tensor) -> Tensor:
    x = as_tensor(x)
    if np.any(x.values <= 0):
        raise NumericError("log of a non-positive value")
    out = Tensor(np.log(x.values))
    return record(out, [x], lambda g: (g / x.values,))


def clip(x: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp to ``[lo, hi]``; the gradient is zero where clamping is active."""
    x = as_tensor(x)
    inside = (x.values >= lo) & (x.values <= hi)
    out = Tensor(np.clip(x.values, lo, hi))
    return record(out, [x], lambda g: (np.where(inside, g, 0.0),))


def softmax(v: Tensor) -> Tensor:
    """Softmax over a 1-D tensor, computed with max subtraction."""
    v = as_tensor(v)
    if v.values.ndim != 1:
        raise ValueError("softmax expects a vector")
    z = np.exp(v.values - v.values.max())
    s = z / z.sum()
    out = Tensor(s)
    return record(out, [v], lambda g: (s * (g - np.dot(g, s)),))


# ------------------------------------------------------------- ragged set ops
#
# A batch of sets is stored flat: row i belongs to set seg[i].


def gather_rows(x: Tensor, idx) -> Tensor:
    x = as_tensor(x)
    idx = np.asarray(idx, dtype=np.int64)
    out = Tensor(x.values[idx])

    def back(g):
        gx = np.zeros_like(x.values)
        np.add.at(gx, idx, g)
        return (gx,)

    return record(out, [x], back)


def segment_sum(x: Tensor, seg, n_segments: int) -> Tensor:
    x = as_tensor(x)
    seg = np.asarray(seg, dtype=np.int64)
    v = np.zeros((n_segments,) + x.shape[1:])
    np.add.at(v, seg, x.values)
    out = Tensor(v)
    return record(out, [x], lambda g: (g[seg],))


def _segment_extreme(x: Tensor, seg, n_segments: int, take_max: bool) -> Tensor:
    x = as_tensor(x)
    seg = np.asarray(seg, dtype=np.int64)
    vals = x.values if take_max else -x.values
    order = np.argsort(seg, kind="stable")
    starts = np.searchsorted(seg[order], np.arange(n_segments))
    if np.any(np.bincount(seg, minlength=n_segments) == 0):
        raise ValueError("empty segment in segment max/min")
    best = np.maximum.reduceat(vals[order], starts, axis=0)
    # first row attaining the extreme receives the gradient
    rr, cc = np.nonzero(vals == best[seg])
    cols = np.arange(x.shape[1])
    winner = np.full((n_segments, x.shape[1]), x.shape[0], dtype=np.int64)
    np.minimum.at(winner, (seg[rr], cc), rr)
    out = Tensor(best if take_max else -best)

    def back(g):
        gx = np.zeros_like(x.values)
        gx[winner, cols[None, :]] += g
        return (gx,)

    return record(out, [x], back)


def segment_max(x: Tensor, seg, n_segments: int) -> Tensor:
    """Column-wise max within each set."""
    return _segment_extreme(x, seg, n_segments, take_max=True)


def segment_min(x: Tensor, seg, n_segments: int) -> Tensor:
    """Column-wise min within each set."""
    return _segment_extreme(x, seg, n_segments, take_max=False)


def segment_softmax(scores: Tensor, seg, n_segments: int) -> Tensor:
    """Softmax of a 1-D score vector within each set."""
    scores = as_tensor(scores)
    seg = np.asarray(seg, dtype=np.int64)
    v = scores.values
    top = np.full(n_segments, -np.inf)
    np.maximum.at(top, seg, v)
    z = np.exp(v - top[seg])
    denom = np.zeros(n_segments)
    np.add.at(denom, seg, z)
    s = z / denom[seg]
    out = Tensor(s)

    def back(g):
        dot = np.zeros(n_segments)
        np.add.at(dot, seg, g * s)
        return (s * (g - dot[seg]),)

    return record(out, [scores], back)


# ------------------------------------------------------------------ similarity


def row_cosine(a: Tensor, b: Tensor) -> Tensor:
    """Cosine similarity between aligned rows.

    Computed as ``<a,b> / sqrt(|a|^2 |b|^2)`` so that identical nonzero rows
    give exactly 1.0.  A zero row against a nonzero row yields 0; two zero
    rows are identical and yield 1.  Both zero-row cases pass no gradient.
    """
    a, b = as_tensor(a), as_tensor(b)
    dot = np.einsum("ij,ij->i", a.values, b.values)
    na2 = np.einsum("ij,ij->i", a.values, a.values)
    nb2 = np.einsum("ij,ij->i", b.values, b.values)
    ok = (na2 > 0) & (nb2 > 0)
    norm = np.sqrt(np.where(ok, na2 * nb2, 1.0))
    both_zero = (na2 == 0) & (nb2 == 0)
    cos = np.where(ok, dot / norm, np.where(both_zero, 1.0, 0.0))
    out = Tensor(cos)

    def back(g):
        inv = np.where(ok, 1.0 / norm, 0.0)
        ga = (g * inv)[:, None] * b.values - (
            g * np.where(ok, cos / np.where(ok, na2, 1.0), 0.0)
        )[:, None] * a.values
        gb = (g * inv)[:, None] * a.values - (
            g * np.where(ok, cos / np.where(ok, nb2, 1.0), 0.0)
        )[:, None] * b.values
        return ga, gb

    return record(out, [a, b], back)

"""Dense tensors and the gradient tape.

Operations in :mod:`hyperpred.numkit.ops` record themselves onto the
innermost active :class:`Tape`.  Outside a ``with Tape():`` block nothing is
recorded and ops are plain numpy evaluations.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class NumericError(FloatingPointError):
    """A NaN or Inf appeared in a tensor."""


class Tensor:
    """A float64 array with an optional gradient slot."""

    __slots__ = ("values", "grad", "requires_grad", "name")

    def __init__(self, values, requires_grad: bool = False, name: str | None = None):
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise NumericError(f"non-finite values in tensor {name or ''}".strip())
        self.values = values
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def zero_grad(self) -> None:
        self.grad = None

    def item(self) -> float:
        return float(self.values)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


class _Record:
    __slots__ = ("out", "inputs", "backward")

    def __init__(self, out: Tensor, inputs: Sequence[Tensor], backward: Callable):
        self.out = out
        self.inputs = inputs
        self.backward = backward


_active: list["Tape"] = []


class Tape:
    """Ordered log of differentiable operations.

    Used as a context manager; records are appended in execution order, which
    is already a topological order of the computation.
    """

    def __init__(self):
        self.records: list[_Record] = []

    def __enter__(self) -> "Tape":
        _active.append(self)
        return self

    def __exit__(self, *exc) -> None:
        _active.remove(self)

    def __len__(self) -> int:
        return len(self.records)


def record(out: Tensor, inputs: Sequence[Tensor], backward: Callable) -> Tensor:
    """Attach ``backward(grad_out) -> tuple of input grads`` to ``out``.

    Only inputs with ``requires_grad`` matter; if none do, nothing is recorded.
    """
    if _active and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        _active[-1].records.append(_Record(out, tuple(inputs), backward))
    return out


def backward(tape: Tape, loss: Tensor) -> None:
    """Reverse sweep over ``tape`` seeded at the scalar ``loss``.

    Gradients are accumulated into ``.grad`` of leaf tensors (tensors that
    were not produced by a record on this tape). Intermediate gradients live
    only for the duration of the sweep, so calling this twice accumulates
    leaf gradients exactly twice.
    """
    if loss.values.size != 1:
        raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
    produced = {id(r.out) for r in tape.records}
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.values)}
    leaves: dict[int, Tensor] = {}

    for rec in reversed(tape.records):
        g_out = grads.pop(id(rec.out), None)
        if g_out is None:
            continue
        in_grads = rec.backward(g_out)
        for t, g in zip(rec.inputs, in_grads):
            if g is None or not t.requires_grad:
                continue
            key = id(t)
            if key in grads:
                grads[key] = grads[key] + g
            else:
                grads[key] = g
            if key not in produced:
                leaves[key] = t

    for key, t in leaves.items():
        g = grads[key]
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {t.name or 'tensor'}")
        t.grad = g.copy() if t.grad is None else t.grad + g

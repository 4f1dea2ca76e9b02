"""Numeric substrate: tensors, reverse-mode gradients, Adam, seeded streams."""
from .adam import AdamState, TrainingError, adam_step
from .checkpoint import load_params, params_from_dict, params_to_dict, save_params
from .ops import (
    add,
    clip,
    elu,
    gather_rows,
    log,
    matmul,
    mean,
    mul,
    neg,
    prelu,
    reshape,
    row_cosine,
    scale,
    segment_max,
    segment_min,
    segment_softmax,
    segment_sum,
    sigmoid,
    softmax,
    spmm,
    sub,
    total,
)
from .rng import split, stream
from .tensor import NumericError, Tape, Tensor, as_tensor, backward

__all__ = [
    "AdamState", "NumericError", "Tape", "Tensor", "TrainingError",
    "adam_step", "add", "as_tensor", "backward", "clip", "elu", "gather_rows",
    "load_params", "log", "matmul", "mean", "mul", "neg", "params_from_dict",
    "params_to_dict", "prelu", "reshape", "row_cosine", "save_params", "scale",
    "segment_max", "segment_min", "segment_softmax", "segment_sum", "sigmoid",
    "softmax", "split", "spmm", "stream", "sub", "total",
]

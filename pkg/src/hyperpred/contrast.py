"""Projection heads and the node/hyperedge dual contrastive loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit as nk
from .encoder import glorot

EPS = 1e-8


@dataclass
class ProjectedViews:
    Z1V: nk.Tensor
    Z2V: nk.Tensor
    Z1E: nk.Tensor
    Z2E: nk.Tensor


def init_projectors(dim: int, rng: np.random.Generator, d_proj: int | None = None) -> dict:
    d_proj = d_proj or dim
    params = {}
    for head in ("proj_V", "proj_E"):
        params[f"{head}.W1"] = glorot(rng, dim, d_proj)
        params[f"{head}.b1"] = np.zeros(d_proj)
        params[f"{head}.W2"] = glorot(rng, d_proj, dim)
        params[f"{head}.b2"] = np.zeros(dim)
    return {k: nk.Tensor(v, requires_grad=True, name=k) for k, v in params.items()}


def _mlp(x, params: dict, head: str) -> nk.Tensor:
    h = nk.elu(nk.add(nk.matmul(x, params[f"{head}.W1"]), params[f"{head}.b1"]))
    return nk.add(nk.matmul(h, params[f"{head}.W2"]), params[f"{head}.b2"])


def project(P, Q, params: dict) -> tuple[nk.Tensor, nk.Tensor]:
    """Apply the node head to ``P`` and the hyperedge head to ``Q``."""
    return _mlp(P, params, "proj_V"), _mlp(Q, params, "proj_E")


def agreement(Z1: nk.Tensor, Z2: nk.Tensor) -> nk.Tensor:
    """Mean row cosine rescaled to [0, 1] and clamped to [EPS, 1]."""
    cos = nk.row_cosine(Z1, Z2)
    s = nk.scale(nk.add(nk.mean(cos), 1.0), 0.5)
    return nk.clip(s, EPS, 1.0)


def dual_contrastive_loss(views: ProjectedViews) -> nk.Tensor:
    s_v = agreement(views.Z1V, views.Z2V)
    s_e = agreement(views.Z1E, views.Z2E)
    return nk.sub(0.0, nk.add(nk.log(s_v), nk.log(s_e)))

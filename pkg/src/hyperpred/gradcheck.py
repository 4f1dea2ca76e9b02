"""Finite-difference verification of every trainable parameter group."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkit as nk
from .augment import make_views
from .encoder import num_layers, propagators
from .hgraph import Hypergraph
from .numkit.rng import stream
from .trainer import TrainConfig, init_model, model_loss, param_group

REL_TOL = 1e-4
ABS_TOL = 1e-6
KINK_MARGIN = 1e-3


@dataclass
class GradcheckReport:
    max_rel_error: dict[str, float]
    worst_param: dict[str, str]
    failed: list[str]

    @property
    def ok(self) -> bool:
        return not self.failed

    def lines(self) -> list[str]:
        out = []
        for g, err in sorted(self.max_rel_error.items()):
            status = "FAIL" if g in self.failed else "ok"
            out.append(f"{g:<12} max rel error {err:.3e}  worst {self.worst_param[g]}  {status}")
        return out


def tiny_instance(seed: int) -> tuple[Hypergraph, list, np.ndarray]:
    """Random hypergraph with |V|<=8, |E|<=6 plus a labelled candidate batch."""
    rng = stream(seed, "gradcheck/instance")
    n = int(rng.integers(5, 9))
    m = int(rng.integers(3, 7))
    edges = []
    for _ in range(m):
        k = int(rng.integers(2, min(4, n) + 1))
        edges.append(sorted(rng.choice(n, size=k, replace=False).tolist()))
    X = rng.normal(size=(n, 4))
    H = Hypergraph(n, edges, X)
    cands = [edges[0], edges[1], sorted(rng.choice(n, 3, replace=False).tolist()),
             sorted(rng.choice(n, 2, replace=False).tolist())]
    return H, cands, np.array([1.0, 1.0, 0.0, 0.0])


def _min_prelu_input(graph, X, params) -> float:
    to_edges, to_nodes = propagators(graph.incidence, graph.edge_weights)
    P, smallest = X, np.inf
    for k in range(num_layers(params)):
        pre = to_edges @ (P @ params[f"encoder.{k}.W_E"].values) + params[f"encoder.{k}.b_E"].values
        smallest = min(smallest, np.abs(pre).min())
        slope = params[f"encoder.{k}.slope"].values
        Q = np.where(pre > 0, pre, slope * pre)
        pre = to_nodes @ (Q @ params[f"encoder.{k}.W_V"].values) + params[f"encoder.{k}.b_V"].values
        smallest = min(smallest, np.abs(pre).min())
        P = np.where(pre > 0, pre, slope * pre)
    return float(smallest)


def numeric_grad(f, t: nk.Tensor, h: float) -> np.ndarray:
    g = np.zeros_like(t.values)
    for i in np.ndindex(t.values.shape):
        orig = t.values[i]
        t.values[i] = orig + h
        up = f()
        t.values[i] = orig - h
        down = f()
        t.values[i] = orig
        g[i] = (up - down) / (2 * h)
    return g


def compare(analytic: np.ndarray, numeric: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-entry relative error and pass flag (relative or near-zero absolute)."""
    diff = np.abs(analytic - numeric)
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    rel = np.where(scale > 0, diff / np.where(scale > 0, scale, 1.0), 0.0)
    return rel, (rel <= REL_TOL) | (diff <= ABS_TOL)


def gradcheck(seed: int = 0, dim: int = 6, h: float = 1e-5, aggregator: str = "attention") -> GradcheckReport:
    H, cands, labels = tiny_instance(seed)
    cfg = TrainConfig(dim=dim, seed=seed, beta=1.0, p_m=0.3, p_f=0.2, d_proj=dim + 1)
    base = init_model(H.num_features, cfg)
    views = make_views(H, H.features, cfg.p_m, cfg.p_f, stream(seed, "gradcheck/views"))
    rng = stream(seed, "gradcheck/params")
    for _ in range(100):
        # move away from the all-zero bias initialisation, and redraw while a
        # PReLU input lies within the difference stencil of its kink
        params = {k: nk.Tensor(p.values + 0.3 * rng.normal(size=p.shape), True, k) for k, p in base.items()}
        if min(_min_prelu_input(g, g.features, params) for g in (H, *views)) > KINK_MARGIN:
            break

    def loss_value() -> float:
        return model_loss(H, H.features, params, cands, labels, aggregator, views, cfg.beta)[0].item()

    with nk.Tape() as tape:
        loss = model_loss(H, H.features, params, cands, labels, aggregator, views, cfg.beta)[0]
    nk.backward(tape, loss)

    max_err: dict[str, float] = {}
    worst: dict[str, str] = {}
    failed = set()
    for name, p in params.items():
        analytic = np.zeros_like(p.values) if p.grad is None else p.grad
        rel, passed = compare(analytic, numeric_grad(loss_value, p, h))
        g = param_group(name)
        if not passed.all():
            failed.add(g)
        err = float(rel.max())
        if err >= max_err.get(g, -1.0):
            max_err[g], worst[g] = err, name
    failed = sorted(failed)
    return GradcheckReport(max_err, worst, failed)

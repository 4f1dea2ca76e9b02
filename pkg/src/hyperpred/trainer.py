"""Losses, the training loop, evaluation and best-epoch selection."""
from __future__ import annotations

import copy
import csv
import io
import logging
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import numkit as nk
from .augment import make_views
from .contrast import ProjectedViews, dual_contrastive_loss, init_projectors, project
from .encoder import encode, init_encoder
from .hgraph import Hypergraph, SplitSpec
from .metrics import MetricUndefined, auroc, average_precision
from .negsample import REGIMES, NegativeSet, Sampler, SamplerExhausted, build_eval_sets, size_sampler
from .numkit.rng import stream
from .scorer import AGGREGATORS, init_scorer, score_batch

log = logging.getLogger(__name__)

CLAMP = 1e-12
REPORT_SCHEMA = "hyperpred-report"
REPORT_VERSION = 1
CSV_COLUMNS = ["epoch", "L_pred", "L_con"] + [f"val_auroc_{r}" for r in REGIMES] + ["val_auroc_avg"]

# ablation mode -> (contrastive learning on, augmentation method, aggregator)
ABLATIONS = {
    "No": (False, None, "maxmin"),
    "CL": (True, "bernoulli", "maxmin"),
    "HCL": (True, "hyperedge", "maxmin"),
    "ALL": (True, "hyperedge", "attention"),
}


@dataclass
class TrainConfig:
    batch_size: int = 32
    dim: int = 64
    lr: float = 5e-3
    weight_decay: float = 5e-4
    beta: float = 0.5
    p_m: float = 0.5
    p_f: float = 0.5
    epochs: int = 100
    seed: int = 0
    ablation: str = "ALL"
    layers: int = 1
    d_proj: int | None = None
    aggregator: str | None = None  # overrides the ablation's aggregator

    def __post_init__(self):
        if self.ablation not in ABLATIONS:
            raise ValueError(f"ablation must be one of {sorted(ABLATIONS)}, got {self.ablation!r}")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.aggregator is not None and self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")
        for name in ("p_m", "p_f"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.batch_size < 1 or self.dim < 1 or self.epochs < 0 or self.layers < 1:
            raise ValueError("batch_size, dim, layers must be positive and epochs >= 0")

    @property
    def uses_contrast(self) -> bool:
        return ABLATIONS[self.ablation][0] and self.beta > 0

    @property
    def augmentation(self) -> str | None:
        return ABLATIONS[self.ablation][1]

    @property
    def resolved_aggregator(self) -> str:
        return self.aggregator or ABLATIONS[self.ablation][2]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)


# --------------------------------------------------------------------- losses


def prediction_loss(y_hat, y) -> nk.Tensor:
    """Mean binary cross-entropy with probabilities clamped to [1e-12, 1-1e-12]."""
    y_hat = nk.as_tensor(y_hat)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != y_hat.shape:
        raise ValueError(f"{y_hat.shape[0]} predictions for {y.shape[0]} labels")
    p = nk.clip(y_hat, CLAMP, 1.0 - CLAMP)
    pos = nk.mul(nk.log(p), y)
    negs = nk.mul(nk.log(nk.sub(1.0, p)), 1.0 - y)
    return nk.neg(nk.mean(nk.add(pos, negs)))


def total_loss(l_pred, l_con, beta: float) -> nk.Tensor:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    return nk.add(l_pred, nk.scale(nk.as_tensor(l_con), beta))


# ---------------------------------------------------------------------- model


def init_model(num_features: int, config: TrainConfig) -> dict[str, nk.Tensor]:
    """All trainable parameters, drawn from the ``init`` stream in fixed order."""
    rng = stream(config.seed, "init")
    params = {}
    params.update(init_encoder(num_features, config.dim, rng, config.layers))
    params.update(init_scorer(config.dim, rng))
    params.update(init_projectors(config.dim, rng, config.d_proj))
    return params


def param_group(name: str) -> str:
    head = name.split(".")[0]
    return {"proj_V": "projectors", "proj_E": "projectors"}.get(head, head)


def model_loss(graph, X, params, candidates, labels, aggregator, views=None, beta=0.0):
    """``(L, L_pred, L_con)`` for one batch; ``views`` enables the contrast term."""
    emb = encode(graph, X, params)
    y_hat = score_batch(emb.P, candidates, params, aggregator)
    l_pred = prediction_loss(y_hat, labels)
    if views is None:
        return l_pred, l_pred, None
    e1 = encode(views[0], views[0].features, params)
    e2 = encode(views[1], views[1].features, params)
    z1v, z1e = project(e1.P, e1.Q, params)
    z2v, z2e = project(e2.P, e2.Q, params)
    l_con = dual_contrastive_loss(ProjectedViews(z1v, z2v, z1e, z2e))
    return total_loss(l_pred, l_con, beta), l_pred, l_con


# ----------------------------------------------------------------- reporting


@dataclass
class EvalReport:
    val: dict[str, dict[str, float] | None]
    test: dict[str, dict[str, float] | None]
    best_epoch: int

    @staticmethod
    def _avg(block, metric) -> float:
        vals = [m[metric] for m in block.values() if m is not None]
        return float(np.mean(vals)) if vals else float("nan")

    @property
    def val_avg_auroc(self) -> float:
        return self._avg(self.val, "auroc")

    @property
    def test_avg_auroc(self) -> float:
        return self._avg(self.test, "auroc")

    @property
    def test_avg_ap(self) -> float:
        return self._avg(self.test, "ap")

    def to_dict(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": REPORT_VERSION,
            "best_epoch": self.best_epoch,
            "val": self.val,
            "test": self.test,
            "average": {
                "val_auroc": self._avg(self.val, "auroc"),
                "val_ap": self._avg(self.val, "ap"),
                "test_auroc": self.test_avg_auroc,
                "test_ap": self.test_avg_ap,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        if doc.get("schema") != REPORT_SCHEMA:
            raise ValueError("not an evaluation report")
        return cls(doc["val"], doc["test"], int(doc["best_epoch"]))

    def to_table(self, label: str = "model") -> str:
        """Plain-text table: one row per split, AUROC block then AP block."""
        head = ["", "Metric"] + [f"AUROC {r}" for r in REGIMES] + ["AUROC Average"]
        head += [f"AP {r}" for r in REGIMES] + ["AP Average"]
        rows = [head]
        for part, block in (("val", self.val), ("test", self.test)):
            row = [label, part]
            for metric in ("auroc", "ap"):
                for r in REGIMES:
                    m = block.get(r)
                    row.append("n/a" if m is None else f"{m[metric]:.3f}")
                row.append(f"{self._avg(block, metric):.3f}")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        return "\n".join(lines) + "\n"


def summarize_reports(reports: list[EvalReport], label: str = "model", part: str = "test") -> str:
    """Mean +- std over runs, one row in the same column layout as ``to_table``."""
    if not reports:
        raise ValueError("no reports to summarize")
    head = ["", "Metric"] + [f"AUROC {r}" for r in REGIMES] + ["AUROC Average"]
    head += [f"AP {r}" for r in REGIMES] + ["AP Average"]
    row = [label, f"{part} (n={len(reports)})"]
    for metric in ("auroc", "ap"):
        for r in REGIMES:
            vals = [getattr(rep, part)[r][metric] for rep in reports if getattr(rep, part).get(r)]
            row.append(f"{np.mean(vals):.3f} +- {np.std(vals):.3f}" if vals else "n/a")
        avgs = [rep._avg(getattr(rep, part), metric) for rep in reports]
        row.append(f"{np.mean(avgs):.3f} +- {np.std(avgs):.3f}")
    widths = [max(len(a), len(b)) for a, b in zip(head, row)]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in (head, row)) + "\n"


@dataclass
class EpochLog:
    epoch: int
    l_pred: float
    l_con: float
    val_auroc: dict[str, float | None]
    seconds: float = 0.0

    def csv_row(self) -> list[str]:
        aucs = [self.val_auroc.get(r) for r in REGIMES]
        avail = [a for a in aucs if a is not None]
        avg = float(np.mean(avail)) if avail else float("nan")
        return [str(self.epoch), repr(self.l_pred), repr(self.l_con)] + [
            "" if a is None else repr(a) for a in aucs
        ] + [repr(avg)]


def history_csv(history: list[EpochLog]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(h.csv_row() for h in history)
    return buf.getvalue()


@dataclass
class TrainResult:
    params: dict[str, nk.Tensor]
    report: EvalReport
    history: list[EpochLog] = field(default_factory=list)


# -------------------------------------------------------------------- trainer


class Trainer:
    """Owns parameters, optimiser state and random streams for one run.

    The encoder sees only the training hyperedges.  Every step draws a batch
    of positives, the same number of MNS negatives (sizes mirror the batch),
    and, when contrast is enabled, a fresh pair of augmented views.
    """

    def __init__(self, H: Hypergraph, split: SplitSpec, config: TrainConfig,
                 eval_sets: dict | None = None, train_idx=None):
        self.H = H
        self.split = split
        self.config = config
        self.X = H.features
        self.train_idx = np.asarray(split.train if train_idx is None else train_idx, dtype=np.int64)
        self.graph = H.restrict_edges(self.train_idx)
        self.params = init_model(H.num_features, config)
        self.adam = nk.AdamState(lr=config.lr, weight_decay=config.weight_decay)
        self.train_sampler = Sampler(self.graph)
        self.eval_sets = eval_sets
        self._shuffle = stream(config.seed, "shuffle")
        self._negatives = stream(config.seed, "train-negatives")
        self._augment = stream(config.seed, "augment")

    # -- training ---------------------------------------------------------

    def _negatives_for(self, positives: list[np.ndarray]) -> list[tuple[int, ...]]:
        out = []
        rng = self._negatives
        for e in positives:
            size = size_sampler([e.size], self.graph.num_nodes, rng)
            try:
                cand, _ = self.train_sampler.draw("MNS", rng, size)
            except SamplerExhausted:
                log.warning("MNS exhausted for size %d; using SNS", size())
                cand, _ = self.train_sampler.draw("SNS", rng, size)
            out.append(cand)
        return out

    def step(self, batch_idx: np.ndarray) -> tuple[float, float]:
        cfg = self.config
        positives = [self.graph.edges[i] for i in batch_idx]
        negatives = self._negatives_for(positives)
        candidates = [p.tolist() for p in positives] + [list(n) for n in negatives]
        labels = np.r_[np.ones(len(positives)), np.zeros(len(negatives))]
        views = None
        if cfg.uses_contrast:
            views = make_views(self.graph, self.X, cfg.p_m, cfg.p_f, self._augment, cfg.augmentation)
        for p in self.params.values():
            p.zero_grad()
        with nk.Tape() as tape:
            loss, l_pred, l_con = model_loss(
                self.graph, self.X, self.params, candidates, labels,
                cfg.resolved_aggregator, views, cfg.beta,
            )
        nk.backward(tape, loss)
        nk.adam_step(self.params, {k: p.grad for k, p in self.params.items() if p.grad is not None}, self.adam)
        return l_pred.item(), 0.0 if l_con is None else l_con.item()

    def run_epoch(self, epoch: int) -> tuple[float, float]:
        order = self._shuffle.permutation(self.graph.num_edges)
        bs = self.config.batch_size
        preds, cons = [], []
        for s, start in enumerate(range(0, order.size, bs)):
            try:
                lp, lc = self.step(order[start : start + bs])
            except (nk.NumericError, nk.TrainingError, FloatingPointError) as exc:
                raise nk.TrainingError(f"epoch {epoch} step {s}: {exc}") from exc
            if not (np.isfinite(lp) and np.isfinite(lc)):
                raise nk.TrainingError(f"epoch {epoch} step {s}: non-finite loss")
            preds.append(lp)
            cons.append(lc)
        return float(np.mean(preds)) if preds else 0.0, float(np.mean(cons)) if cons else 0.0

    # -- evaluation -------------------------------------------------------

    def ensure_eval_sets(self) -> dict:
        if self.eval_sets is None:
            self.eval_sets = build_eval_sets(self.H, self.split, self.config.seed)
        return self.eval_sets

    def evaluate(self, part: str, params=None) -> dict[str, dict[str, float] | None]:
        params = params or self.params
        sets = self.ensure_eval_sets()[part]
        pos_idx = self.split.val if part == "val" else self.split.test
        P = encode(self.graph, self.X, params).P
        return evaluate_embeddings(P, params, [self.H.edges[i].tolist() for i in pos_idx], sets,
                                   self.config.resolved_aggregator)

    def fit(self, on_epoch=None) -> TrainResult:
        self.ensure_eval_sets()
        best_auc, best_epoch = -np.inf, 0
        best_params = copy.deepcopy(self.params)
        history = []
        for epoch in range(1, self.config.epochs + 1):
            t0 = time.perf_counter()
            l_pred, l_con = self.run_epoch(epoch)
            seconds = time.perf_counter() - t0
            val = self.evaluate("val")
            entry = EpochLog(epoch, l_pred, l_con,
                             {r: (None if m is None else m["auroc"]) for r, m in val.items()}, seconds)
            history.append(entry)
            avail = [m["auroc"] for m in val.values() if m is not None]
            avg = float(np.mean(avail)) if avail else -np.inf
            if avg > best_auc:
                best_auc, best_epoch = avg, epoch
                best_params = copy.deepcopy(self.params)
            log.info("epoch %d  L_pred=%.4f  L_con=%.4f  val AUROC=%.4f", epoch, l_pred, l_con, avg)
            if on_epoch is not None:
                on_epoch(entry)
        report = EvalReport(self.evaluate("val", best_params), self.evaluate("test", best_params), best_epoch)
        return TrainResult(best_params, report, history)


def evaluate_embeddings(P, params, positives, negative_sets: dict[str, NegativeSet | None],
                        aggregator: str) -> dict[str, dict[str, float] | None]:
    """AUROC/AP per regime for fixed node embeddings."""
    pos_scores = score_batch(P, positives, params, aggregator).values if positives else np.zeros(0)
    out = {}
    for regime in REGIMES:
        negs = negative_sets.get(regime)
        if negs is None or len(negs) == 0:
            out[regime] = None
            continue
        neg_scores = score_batch(P, [list(c) for c in negs.candidates], params, aggregator).values
        scores = np.r_[pos_scores, neg_scores]
        labels = np.r_[np.ones(pos_scores.size), np.zeros(neg_scores.size)]
        try:
            out[regime] = {"auroc": auroc(scores, labels), "ap": average_precision(scores, labels)}
        except MetricUndefined:
            out[regime] = None
    return out


def train(H: Hypergraph, split: SplitSpec, config: TrainConfig, eval_sets=None, on_epoch=None) -> TrainResult:
    return Trainer(H, split, config, eval_sets).fit(on_epoch)


def evaluate(H: Hypergraph, split: SplitSpec, params, config: TrainConfig, eval_sets=None) -> EvalReport:
    """Evaluate fixed parameters on the validation and test regimes."""
    tr = Trainer(H, split, config, eval_sets)
    tr.params = params
    return EvalReport(tr.evaluate("val"), tr.evaluate("test"), best_epoch=0)

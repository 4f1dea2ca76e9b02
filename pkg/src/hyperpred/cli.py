"""Command-line entry point: ``hyperpred <command> ...``.

Exit codes: 0 success, 1 invalid input (files, arguments, data), 2 runtime
or numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import numkit as nk
from .augment import METHODS, augment
from .datasets import ingest
from .gradcheck import gradcheck
from .hgraph import HypergraphError, load_hypergraph, load_split, save_hypergraph, save_split, split
from .negsample import REGIMES, NegativeSet, SamplerExhausted, build_eval_sets
from .numkit.rng import stream
from .trainer import ABLATIONS, EvalReport, TrainConfig, Trainer, history_csv, summarize_reports

log = logging.getLogger("hyperpred")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument errors are validation errors: exit 1, not argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _resolve_config(args) -> TrainConfig:
    doc = {}
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    overrides = {
        "seed": args.seed, "ablation": getattr(args, "ablation", None), "beta": getattr(args, "beta", None),
        "p_m": getattr(args, "pm", None), "p_f": getattr(args, "pf", None), "dim": getattr(args, "dim", None),
        "epochs": getattr(args, "epochs", None),
    }
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return TrainConfig.from_dict(doc)


def _load_split(args, H, out_dir: Path | None = None):
    if args.split_file:
        return load_split(args.split_file, H)
    s = split(H, args.seed)
    if out_dir is not None:
        save_split(s, out_dir / "split.json")
    return s


def _load_negatives(directory) -> dict:
    sets = {}
    for part in ("val", "test"):
        sets[part] = {}
        for regime in REGIMES:
            path = Path(directory) / f"{part}_{regime}.json"
            sets[part][regime] = (
                NegativeSet.from_dict(json.loads(path.read_text(encoding="utf-8"))) if path.exists() else None
            )
    return sets


# ------------------------------------------------------------------ commands


def cmd_ingest(args) -> int:
    H, summary = ingest(args.raw)
    save_hypergraph(H, args.out)
    print(summary)
    return EXIT_OK


def cmd_split(args) -> int:
    H = load_hypergraph(args.dataset)
    s = split(H, args.seed, tuple(args.ratios))
    save_split(s, args.out)
    print(f"train={len(s.train)} val={len(s.val)} test={len(s.test)}")
    return EXIT_OK


def cmd_sample_negatives(args) -> int:
    H = load_hypergraph(args.dataset)
    s = _load_split(args, H)
    regimes = REGIMES if args.regime == "all" else (args.regime,)
    sets = build_eval_sets(H, s, args.seed, regimes)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for part, block in sets.items():
        for regime, ns in block.items():
            if ns is None:
                print(f"{part} {regime}: unavailable", file=sys.stderr)
                continue
            _write_json(out / f"{part}_{regime}.json", ns.to_dict())
            print(f"{part} {regime}: {len(ns)} negatives")
    return EXIT_OK


def cmd_augment(args) -> int:
    H = load_hypergraph(args.dataset)
    view = augment(H, H.features, args.pm, args.pf, stream(args.seed, "augment"), args.method)
    save_hypergraph(view.to_hypergraph(H.node_labels), args.out)
    meta = {
        "seed": args.seed, "p_m": args.pm, "p_f": args.pf, "method": args.method,
        "removed": view.removed.tolist(), "feature_mask": view.feature_mask.tolist(),
    }
    _write_json(Path(str(args.out) + ".mask.json"), meta)
    print(f"removed {len(view.removed)} memberships, masked {int((view.feature_mask == 0).sum())} feature columns")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    H = load_hypergraph(args.dataset)
    s = _load_split(args, H, out)
    _write_json(out / "config.json", cfg.to_dict())
    eval_sets = _load_negatives(args.negatives) if args.negatives else None
    trainer = Trainer(H, s, cfg, eval_sets)
    result = trainer.fit()
    (out / "metrics.csv").write_text(history_csv(result.history), encoding="utf-8")
    nk.save_params(result.params, out / "checkpoint.json")
    _write_json(out / "report.json", result.report.to_dict())
    table = result.report.to_table(f"{cfg.ablation}")
    (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _resolve_config(args)
    H = load_hypergraph(args.dataset)
    s = _load_split(args, H)
    params = nk.load_params(args.checkpoint)
    eval_sets = _load_negatives(args.negatives) if args.negatives else None
    trainer = Trainer(H, s, cfg, eval_sets)
    trainer.params = params
    report = EvalReport(trainer.evaluate("val"), trainer.evaluate("test"), best_epoch=0)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "report.json", report.to_dict())
        (out / "report.txt").write_text(report.to_table(cfg.ablation), encoding="utf-8")
    print(report.to_table(cfg.ablation), end="")
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    ok = True
    for seed in range(args.seed, args.seed + args.seeds):
        report = gradcheck(seed)
        print(f"seed {seed}: {'pass' if report.ok else 'FAIL ' + ','.join(report.failed)}")
        for line in report.lines():
            print("  " + line)
        ok &= report.ok
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_summarize(args) -> int:
    reports = [EvalReport.from_dict(json.loads((Path(d) / "report.json").read_text(encoding="utf-8")))
               for d in args.run_dirs]
    print(summarize_reports(reports, args.label, args.part), end="")
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperpred", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, dataset=True, split_file=True):
        if dataset:
            p.add_argument("--dataset", required=True, help="hypergraph JSON file")
        if split_file:
            p.add_argument("--split-file", help="split JSON; derived from --seed when omitted")
        p.add_argument("--seed", type=int, default=0)

    def model(p):
        p.add_argument("--config", help="JSON file with training configuration keys")
        p.add_argument("--ablation", choices=sorted(ABLATIONS))
        p.add_argument("--beta", type=float)
        p.add_argument("--pm", type=float)
        p.add_argument("--pf", type=float)
        p.add_argument("--dim", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--negatives", help="directory of {val,test}_{REGIME}.json negative files")

    p = sub.add_parser("ingest", help="convert a raw co-citation dataset to hypergraph JSON")
    p.add_argument("raw")
    p.add_argument("out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="write a random train/val/test split")
    common(p, split_file=False)
    p.add_argument("--ratios", type=float, nargs=3, default=(0.6, 0.2, 0.2))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("sample-negatives", help="sample validation/test negatives")
    common(p)
    p.add_argument("--regime", choices=REGIMES + ("all",), default="all")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sample_negatives)

    p = sub.add_parser("augment", help="write one augmented view")
    common(p, split_file=False)
    p.add_argument("--pm", type=float, default=0.5)
    p.add_argument("--pf", type=float, default=0.5)
    p.add_argument("--method", choices=METHODS, default="hyperedge")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train and report the best-validation checkpoint")
    common(p)
    model(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint")
    common(p)
    model(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("summarize", help="mean +- std over several run directories")
    p.add_argument("run_dirs", nargs="+")
    p.add_argument("--part", choices=("val", "test"), default="test")
    p.add_argument("--label", default="model")
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("gradcheck", help="finite-difference check of all parameter groups")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (HypergraphError, ValueError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (nk.TrainingError, nk.NumericError, SamplerExhausted, FloatingPointError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

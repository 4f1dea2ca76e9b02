"""
Training and comparing ablation modes
=====================================

A short run of each mode on a generated hypergraph.  Numbers here are
illustrative only; the real comparison needs a benchmark dataset and the
full epoch budget (see the acceptance suite).
"""

from hyperpred import TrainConfig, train
from hyperpred.datasets import planted_hypergraph
from hyperpred.hgraph import split
from hyperpred.negsample import build_eval_sets

H = planted_hypergraph(num_nodes=300, num_edges=300, num_features=200, seed=0)
s = split(H, seed=0)
eval_sets = build_eval_sets(H, s, seed=0)  # shared so modes see the same negatives

for mode in ("No", "CL", "HCL", "ALL"):
    cfg = TrainConfig(ablation=mode, dim=32, epochs=10, seed=0)
    res = train(H, s, cfg, eval_sets)
    print(res.report.to_table(mode).splitlines()[-1])
    print(f"   best epoch {res.report.best_epoch}, last L_pred {res.history[-1].l_pred:.4f}, "
          f"last L_con {res.history[-1].l_con:.4f}")

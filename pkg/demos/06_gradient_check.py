"""
Checking every gradient against finite differences
==================================================

The full model (encoder, attention aggregator, predictor and projection
heads, with the contrastive term on) is differentiated on a tiny random
hypergraph and compared entry by entry with central differences.
"""

from hyperpred.gradcheck import gradcheck

for seed in range(3):
    report = gradcheck(seed)
    print(f"seed {seed}: {'pass' if report.ok else 'FAIL'}")
    for line in report.lines():
        print("   ", line)

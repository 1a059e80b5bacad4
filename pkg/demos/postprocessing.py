"""
The five post-processing steps on one small example
===================================================

B is the baseline, F the fair output; every step returns new outputs Y.
"""
import numpy as np

from fairdelta import PredictionPair, apply_postprocess, diff_distribution

pair = PredictionPair(baseline=[0.2, 0.5, 0.7, 0.4], fair=[0.4, 0.3, 0.7, 0.35],
                      sensitive=[True, False, True, False], targets=[1, 0, 1, 0])
d = diff_distribution(pair)
print("F - B:", np.round(d.diffs, 3), " max", round(d.max_increase, 3),
      " min", round(d.max_decrease, 3), " mean", round(d.mean_diff, 3))

steps = [("cap", {"theta": 0.0}),
         ("translate-nonpos", {}),
         ("norm-nonpos", {"a": -0.2, "b": 0.0}),
         ("translate-budget", {}),
         ("norm-budget", {"a": -0.1, "b": 0.1})]

for name, params in steps:
    y = apply_postprocess(name, pair, **params)
    print(f"{name:17s} Y - B = {np.round(y - pair.baseline, 3)}  mean {np.mean(y - pair.baseline):+.3f}")

# the translations keep the fair ranking; the cap flattens the top

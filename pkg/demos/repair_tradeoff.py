"""
Trading loss for parity with the quantile repair
================================================

Sweep the interpolation weight and watch disparity fall while the loss rises.
"""
import numpy as np

from fairdelta import apply_repair, dp_disparity, fit_repair, standard_loss, with_lambda

rng = np.random.default_rng(3)
n = 2000
sensitive = rng.random(n) < 0.4
target = np.clip(rng.normal(0.45 + 0.2 * sensitive, 0.15), 0, 1)
base = np.clip(target + rng.normal(0, 0.05, n), 0, 1)

model = fit_repair(base, sensitive, epsilon_target=0.05)
print("chosen lambda for epsilon 0.05:", model.lam)

print(" lambda   dp      mse")
for lam in np.linspace(0, 1, 9):
    fair = apply_repair(with_lambda(model, lam), base, sensitive)
    print(f" {lam:5.3f}  {dp_disparity(fair, sensitive):.3f}  {standard_loss(fair, target, 'square_loss'):.4f}")

fair = apply_repair(model, base, sensitive)
diff = fair - base
print("who moves: largest increase %.3f, largest decrease %.3f" % (diff.max(), diff.min()))

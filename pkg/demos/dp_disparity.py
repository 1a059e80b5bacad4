"""
Demographic parity disparity on a toy sample
============================================

Two groups whose predictions are shifted apart, then moved back together.
"""
import numpy as np

from fairdelta import dp_disparity, empirical_cdf, standard_loss

rng = np.random.default_rng(0)
sensitive = rng.random(500) < 0.5
pred = np.clip(rng.beta(2, 5, 500) + 0.25 * sensitive, 0, 1)

# distance between each group's CDF and the pooled CDF, worst group wins
print("disparity, shifted groups:", round(dp_disparity(pred, sensitive), 3))

# shifting everyone by the same amount changes nothing
print("after a common shift:     ", round(dp_disparity(pred - 0.1, sensitive), 3))

# removing the group offset brings it close to zero
print("offset removed:           ", round(dp_disparity(pred - 0.25 * sensitive, sensitive), 3))

cdf = empirical_cdf(pred[sensitive])
print("P(pred <= 0.5 | group)   =", round(cdf(0.5), 3))

target = (rng.random(500) < pred).astype(float)
print("log-loss of the scores:   ", round(standard_loss(pred, target, "logistic_loss"), 3))

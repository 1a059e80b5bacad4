import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairdelta.errors import ValidationError
from fairdelta.metrics import dp_disparity, empirical_cdf, standard_loss


def brute_force_disparity(pred, sens):
    """Sup over a grid of every sample point and every midpoint between them."""
    pred = np.asarray(pred, dtype=float)
    sens = np.asarray(sens, dtype=bool)
    pts = np.unique(pred)
    grid = np.concatenate([[pts[0] - 1.0], pts, (pts[:-1] + pts[1:]) / 2])
    best = 0.0
    for z in grid:
        all_cdf = np.count_nonzero(pred <= z) / pred.size
        for mask in (sens, ~sens):
            g = pred[mask]
            best = max(best, abs(np.count_nonzero(g <= z) / g.size - all_cdf))
    return best


def test_cdf_single_point():
    cdf = empirical_cdf([0.5])
    assert cdf(0.4) == 0.0
    assert cdf(0.5) == 1.0


def test_cdf_counts_ties():
    assert empirical_cdf([0.2, 0.2, 0.8])(0.2) == pytest.approx(2 / 3, abs=0)


def test_cdf_reaches_one():
    assert empirical_cdf(np.random.default_rng(1).random(30))(1.0) == 1.0


def test_cdf_empty():
    with pytest.raises(ValidationError):
        empirical_cdf([])


def test_disparity_separated_groups():
    pred = [0.1, 0.2, 0.8, 0.9]
    sens = [True, True, False, False]
    assert dp_disparity(pred, sens) == 0.5


def test_disparity_constant_predictions():
    assert dp_disparity([0.3] * 6, [True, False] * 3) == 0.0


def test_disparity_shift():
    rng = np.random.default_rng(2)
    pred = rng.random(40) * 0.5
    sens = rng.random(40) < 0.4
    assert dp_disparity(pred + 0.25, sens) == dp_disparity(pred, sens)


def test_disparity_needs_both_groups():
    with pytest.raises(ValidationError):
        dp_disparity([0.1, 0.2], [True, True])
    with pytest.raises(ValidationError):
        dp_disparity([0.1, 0.2], [True])


def test_square_loss_perfect():
    assert standard_loss([0.1, 0.7], [0.1, 0.7], "square_loss") == 0.0


def test_logistic_loss_half():
    assert standard_loss([0.5, 0.5], [0, 1], "logistic_loss") == pytest.approx(math.log(2), abs=1e-15)


def test_square_loss_maximal():
    assert standard_loss([0, 1], [1, 0], "square_loss") == 1.0


def test_logistic_loss_clamps_extremes():
    v = standard_loss([0.0, 1.0], [1, 0], "logistic_loss")
    assert math.isfinite(v)
    assert v == pytest.approx(-math.log(1e-12), rel=1e-5)


def test_loss_length_mismatch():
    with pytest.raises(ValidationError):
        standard_loss([0.1], [0.1, 0.2], "square_loss")


def test_unknown_task():
    with pytest.raises(ValidationError):
        standard_loss([0.1], [0.1], "hinge")


grid_values = st.lists(st.integers(0, 1000), min_size=2, max_size=50)


@st.composite
def labelled(draw):
    vals = draw(grid_values)
    n = len(vals)
    sens = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    sens[0], sens[-1] = True, False
    return np.array(vals) / 1000.0, np.array(sens)


@given(labelled())
def test_disparity_in_unit_interval(case):
    d = dp_disparity(*case)
    assert 0.0 <= d <= 1.0


@given(labelled())
def test_disparity_matches_brute_force(case):
    assert dp_disparity(*case) == brute_force_disparity(*case)


@given(labelled(), st.floats(0.1, 10.0), st.floats(-5, 5))
def test_disparity_invariant_under_affine_map(case, scale, offset):
    pred, sens = case
    assert dp_disparity(scale * pred + offset, sens) == dp_disparity(pred, sens)


@given(labelled())
def test_disparity_invariant_under_cubic_map(case):
    pred, sens = case
    assert dp_disparity(pred ** 3 + pred, sens) == dp_disparity(pred, sens)


@settings(max_examples=50)
@given(labelled(), st.floats(-0.5, 0.5))
def test_disparity_shift_invariance(case, c):
    pred, sens = case
    assert dp_disparity(pred + c, sens) == dp_disparity(pred, sens)

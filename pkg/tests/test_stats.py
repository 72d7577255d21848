import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kestenmc.stats import (
    EstimateWithCI,
    RngSpec,
    agree,
    binomial_ci,
    intervals_overlap,
    ks_two_sample,
    mean_ci,
    product_stderr,
    proportion,
    ratio_delta_stderr,
    stream,
    z_value,
)


def test_mean_ci_examples():
    e = mean_ci([1, 1, 1, 1])
    assert (e.point, e.stderr) == (1.0, 0.0)
    e = mean_ci([0, 2])
    assert e.point == 1.0
    assert e.stderr == pytest.approx(1.0, rel=1e-15)
    with pytest.raises(ValueError):
        mean_ci([])
    with pytest.raises(ValueError):
        mean_ci([3.0])


def test_ci_halfwidth():
    e = EstimateWithCI(2.0, 0.5, 100)
    assert e.halfwidth == pytest.approx(z_value(0.95) * 0.5)
    assert e.ci == pytest.approx((2.0 - e.halfwidth, 2.0 + e.halfwidth))
    assert z_value(0.95) == pytest.approx(1.959963984540054)


def test_ks_examples():
    rng = stream(1, "ks")
    x = rng.random(10_000)
    d, p = ks_two_sample(x, x)
    assert d == 0.0 and p == 1.0
    d, p = ks_two_sample(rng.random(10_000), 0.5 + rng.random(10_000))
    assert d == pytest.approx(0.5, abs=0.03)
    assert p < 1e-6
    with pytest.raises(ValueError):
        ks_two_sample([], [1.0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(1, 60), elements=st.floats(-5, 5)),
       arrays(float, st.integers(1, 60), elements=st.floats(-5, 5)),
       st.floats(0.01, 100))
def test_equal_weights_reduce_to_unweighted(x, y, w):
    d0, p0 = ks_two_sample(x, y)
    d1, p1 = ks_two_sample(x, y, np.full(x.size, w), np.full(y.size, 2 * w))
    assert abs(d0 - d1) <= 1e-12
    assert abs(p0 - p1) <= 1e-9


def test_ks_null_calibration():
    rng = stream(2, "ks_calibration")
    rejections = 0
    for _ in range(1000):
        z = rng.standard_normal(400)
        rejections += ks_two_sample(z[:200], z[200:])[1] < 0.05
    assert abs(rejections / 1000 - 0.05) <= 0.01 + 2 * math.sqrt(0.05 * 0.95 / 1000)


def test_ratio_delta_examples(oracle):
    assert ratio_delta_stderr(EstimateWithCI(1, 0, 10), EstimateWithCI(2, 0, 10)) == 0.0
    assert ratio_delta_stderr(EstimateWithCI(1, 0.1, 10), EstimateWithCI(1, 0, 10)) == \
        pytest.approx(0.1, rel=1e-14)
    assert ratio_delta_stderr(EstimateWithCI(2, 0.1, 10), EstimateWithCI(2, 0.1, 10)) == \
        pytest.approx(oracle["ratio_delta_example"], rel=1e-14)
    with pytest.raises(ZeroDivisionError):
        ratio_delta_stderr(EstimateWithCI(1, 0.1, 10), EstimateWithCI(0, 0.1, 10))


def test_ratio_delta_matches_simulation():
    rng = stream(3, "delta")
    a = 5 + 0.1 * rng.standard_normal(200_000)
    b = 2 + 0.05 * rng.standard_normal(200_000)
    se = ratio_delta_stderr(EstimateWithCI(5, 0.1, 1), EstimateWithCI(2, 0.05, 1))
    assert (a / b).std() == pytest.approx(se, rel=0.02)


def test_product_stderr():
    p, se = product_stderr(EstimateWithCI(2, 0.2, 1), EstimateWithCI(3, 0.3, 1))
    assert p == 6 and se == pytest.approx(6 * math.sqrt(0.02), rel=1e-14)
    p, se = product_stderr(EstimateWithCI(2, 0.2, 1), powers=[2])
    assert p == 4 and se == pytest.approx(0.8, rel=1e-14)


def test_binomial_ci_and_proportion():
    lo, hi = binomial_ci(0, 10)
    assert lo == 0.0 and 0.25 < hi < 0.35
    lo, hi = binomial_ci(50, 100)
    assert lo < 0.5 < hi
    e = proportion(30, 100)
    assert e.point == 0.3 and e.bias_note["exact_ci"][0] < 0.3


def test_agreement_helpers():
    a, b = EstimateWithCI(1.0, 0.1, 10), EstimateWithCI(1.35, 0.1, 10)
    assert not agree(a, b)
    assert intervals_overlap(a, b)
    assert not intervals_overlap(a, EstimateWithCI(1.5, 0.1, 10))


def test_rng_streams():
    a = RngSpec(42, (1, 2)).generator().random(5)
    b = RngSpec(42, (1, 2)).generator().random(5)
    c = RngSpec(42, (1, 3)).generator().random(5)
    d = RngSpec(43, (1, 2)).generator().random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)
    assert np.array_equal(stream(9, "lbl", 0).random(3), stream(9, "lbl", 0).random(3))


def test_rng_streams_uncorrelated():
    xs = np.array([stream(11, "corr", i).standard_normal(20_000) for i in range(8)])
    c = np.corrcoef(xs)
    off = c[~np.eye(8, dtype=bool)]
    assert np.max(np.abs(off)) < 5 / math.sqrt(20_000)

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import geometric_law
from mg1learn import metrics
from mg1learn.errors import DimensionMismatch, PercentileBeyondTruncation


def test_metric1_identity():
    Y = np.random.default_rng(0).random((5, 70))
    assert metrics.metric1(Y, Y) == 0.0


def test_metric1_two_atoms():
    Y = np.zeros((1, 70))
    Y[0, 0] = 1.0
    Yhat = np.zeros((1, 70))
    Yhat[0, 1] = 1.0
    assert metrics.metric1(Y, Yhat) == 2.0


def test_metric1_shape_check():
    with pytest.raises(DimensionMismatch):
        metrics.metric1(np.zeros((2, 3)), np.zeros((2, 4)))


def test_metric1_symmetric_and_triangle():
    rng = np.random.default_rng(3)
    A, B, C = rng.random((3, 8, 70))
    assert metrics.metric1(A, B) == metrics.metric1(B, A)
    assert metrics.metric1(A, C) <= metrics.metric1(A, B) + metrics.metric1(B, C) + 1e-12


def test_percentile_inverse_geometric():
    law = geometric_law(0.5)
    # CDF(0) = 0.5; CDF(2) = 0.875 < 0.9 <= CDF(3) = 0.9375
    assert metrics.percentile_inverse(law, 0.5) == 0
    assert metrics.percentile_inverse(law, 0.9) == 3


def test_percentile_inverse_beyond_truncation():
    law = geometric_law(0.5, l=10)  # covered mass 1 - 0.5^10
    with pytest.raises(PercentileBeyondTruncation):
        metrics.percentile_inverse(law, 1.0 - 2.0**-11)
    dist = np.array([0.6, 0.4 - 1e-9])
    with pytest.raises(PercentileBeyondTruncation):
        metrics.percentile_inverse(dist, 1.0 - 5e-10)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_percentile_inverse_nondecreasing(seed, p1, p2):
    raw = np.random.default_rng(seed).random(20)
    dist = raw / raw.sum()
    lo, hi = sorted((p1, p2))
    assert metrics.percentile_inverse(dist, lo) <= metrics.percentile_inverse(dist, hi)


def test_percentile_inverse_validates_p():
    with pytest.raises(ValueError):
        metrics.percentile_inverse(geometric_law(0.5), 0.0)
    with pytest.raises(ValueError):
        metrics.percentile_inverse(geometric_law(0.5), 1.0)


def test_metric2_identity():
    Y = np.tile(geometric_law(0.7), (4, 1))
    for p in metrics.PERCENTILES:
        assert metrics.metric2(Y, Y, p) == 0.0


def test_metric2_single_pair():
    # true 90th percentile 8, predicted 7 -> |8-7|/8 = 0.125
    Y = np.zeros((1, 20))
    Y[0, 8] = 1.0
    Yhat = np.zeros((1, 20))
    Yhat[0, 7] = 1.0
    assert metrics.metric2(Y, Yhat, 0.9) == pytest.approx(0.125)
    assert metrics.metric2(Y, Yhat, 0.9, signed=True) == pytest.approx(0.125)
    assert metrics.metric2(Yhat, Y, 0.9, signed=True) == pytest.approx(-1.0 / 7.0)


def test_metric2_zero_denominator_guard():
    # true 25th percentile is 0: denominator falls back to 1
    Y = np.zeros((1, 10))
    Y[0, 0] = 1.0
    Yhat = np.zeros((1, 10))
    Yhat[0, 2] = 1.0
    assert metrics.metric2(Y, Yhat, 0.25) == pytest.approx(2.0)


def test_evaluate_report_structure():
    rng = np.random.default_rng(8)
    rows = [geometric_law(rho) for rho in rng.uniform(0.2, 0.8, 30)]
    Y = np.array(rows)
    noise = rng.random(Y.shape) * 1e-3
    Yhat = Y + noise
    Yhat /= Yhat.sum(axis=1, keepdims=True)
    report = metrics.evaluate(Y, Yhat)
    assert report.metric1_mean == pytest.approx(metrics.metric1(Y, Yhat))
    assert set(report.metric1_percentiles) == set(metrics.PERCENTILES)
    assert set(report.metric2) == set(metrics.PERCENTILES)
    values = [report.metric1_percentiles[p] for p in sorted(report.metric1_percentiles)]
    assert values == sorted(values)
    text = metrics.format_report(report)
    assert "Metric 1" in text and "Metric 2" in text
    assert str(report.metric2_zero_denominator[0.25]) in text


def test_histogram_csv():
    csv = metrics.histogram_csv([0.1, 0.2, 0.2, 0.9], bins=4)
    lines = csv.strip().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert len(lines) == 5
    counts = [int(line.split(",")[2]) for line in lines[1:]]
    assert sum(counts) == 4

"""Evaluation metrics for predicted queue-length distributions.

metric1 is the per-sample L1 distance between true and predicted probability
vectors averaged over samples; metric2 is the average relative error of the
inverse-CDF (percentile) values at fixed percentile levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PercentileBeyondTruncation

# the six reporting percentile levels
PERCENTILES = (0.25, 0.50, 0.75, 0.90, 0.99, 0.999)


def _as_matrix_pair(Y, Yhat) -> tuple[np.ndarray, np.ndarray]:
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    Yhat = np.atleast_2d(np.asarray(Yhat, dtype=float))
    if Y.shape != Yhat.shape:
        raise DimensionMismatch(f"shape mismatch: {Y.shape} vs {Yhat.shape}")
    return Y, Yhat


def metric1_per_sample(Y, Yhat) -> np.ndarray:
    """Row-wise L1 distances."""
    Y, Yhat = _as_matrix_pair(Y, Yhat)
    return np.abs(Y - Yhat).sum(axis=1)


def metric1(Y, Yhat) -> float:
    """Mean over samples of the L1 distance between the distributions."""
    return float(metric1_per_sample(Y, Yhat).mean())


def percentile_inverse(dist, p: float) -> int:
    """Smallest k with CDF(k) >= p for a (possibly truncated) pmf."""
    if not 0.0 < p < 1.0:
        raise ValueError("percentile must be in (0, 1)")
    cum = np.cumsum(np.asarray(dist, dtype=float))
    k = int(np.searchsorted(cum, p, side="left"))
    if k >= cum.shape[0]:
        raise PercentileBeyondTruncation(
            f"percentile {p} exceeds covered mass {cum[-1]!r}"
        )
    return k


def _percentile_inverse_rows(M: np.ndarray, p: float) -> np.ndarray:
    """Row-wise inverse CDF; raises if any row's covered mass is below p."""
    cum = np.cumsum(M, axis=1)
    ks = (cum < p).sum(axis=1)
    if np.any(ks >= M.shape[1]):
        bad = int(np.argmax(ks >= M.shape[1]))
        raise PercentileBeyondTruncation(
            f"row {bad}: percentile {p} exceeds covered mass {cum[bad, -1]!r}"
        )
    return ks


def metric2(Y, Yhat, p: float, signed: bool = False) -> float:
    """Average relative error of the p-percentile of the distributions.

    A zero true percentile (empty-system mass already covers p) would divide
    by zero; the denominator falls back to 1 for those rows.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("percentile must be in (0, 1)")
    Y, Yhat = _as_matrix_pair(Y, Yhat)
    true_k = _percentile_inverse_rows(Y, p)
    pred_k = _percentile_inverse_rows(Yhat, p)
    diff = true_k - pred_k if signed else np.abs(true_k - pred_k)
    denom = np.where(true_k > 0, true_k, 1)
    return float((diff / denom).mean())


@dataclass(frozen=True)
class EvalReport:
    """Accuracy summary over a test set.

    metric1_percentiles holds percentiles of the per-sample L1 errors;
    metric2 holds the percentile-inverse relative errors per level;
    metric2_zero_denominator counts rows that hit the denominator guard.
    """

    metric1_mean: float
    metric1_percentiles: dict[float, float]
    metric2: dict[float, float]
    metric2_zero_denominator: dict[float, int]


def evaluate(Y, Yhat, percentiles=PERCENTILES) -> EvalReport:
    Y, Yhat = _as_matrix_pair(Y, Yhat)
    per_sample = metric1_per_sample(Y, Yhat)
    m1_pcts = {
        p: float(np.percentile(per_sample, 100.0 * p)) for p in percentiles
    }
    m2 = {}
    zero_rows = {}
    for p in percentiles:
        m2[p] = metric2(Y, Yhat, p)
        zero_rows[p] = int((_percentile_inverse_rows(Y, p) == 0).sum())
    return EvalReport(
        metric1_mean=float(per_sample.mean()),
        metric1_percentiles=m1_pcts,
        metric2=m2,
        metric2_zero_denominator=zero_rows,
    )


def format_report(report: EvalReport) -> str:
    """Plain-text tables mirroring the percentile-row layout."""
    levels = sorted(report.metric1_percentiles)
    header = "Percentile " + " ".join(f"{100 * p:>9g}%" for p in levels)
    row1 = "Metric 1   " + " ".join(
        f"{report.metric1_percentiles[p]:>10.6f}" for p in levels
    )
    row2 = "Metric 2   " + " ".join(f"{report.metric2[p]:>10.6f}" for p in levels)
    guard = "zero-denom " + " ".join(
        f"{report.metric2_zero_denominator[p]:>10d}" for p in levels
    )
    return "\n".join(
        [
            f"metric1 mean: {report.metric1_mean:.8f}",
            header,
            row1,
            row2,
            guard,
        ]
    )


def histogram_csv(values, bins: int = 50) -> str:
    """Histogram of per-sample metric1 values as CSV (bin_lo,bin_hi,count)."""
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    lines = ["bin_lo,bin_hi,count"]
    lines += [
        f"{edges[i]!r},{edges[i + 1]!r},{int(counts[i])}" for i in range(len(counts))
    ]
    return "\n".join(lines) + "\n"

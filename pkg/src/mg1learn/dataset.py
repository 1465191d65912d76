"""Dataset generation and pre-processing for the queue-length surrogate.

Each sample pairs the features [lambda, log m2, ..., log mn] of a freshly
sampled stable M/PH/1 instance with its exact truncated queue-length
distribution from the QBD solver. The unit first moment is dropped and the
remaining moments are log-transformed; z-score standardization statistics are
fit on the training split only. Per-sample RNG streams are derived from the
master seed by a counter-based key, so generation is reproducible and
independent of worker count.
"""

from __future__ import annotations

import logging
import multiprocessing
import re
from dataclasses import dataclass

import numpy as np

from . import phtype, qbd, sampler
from .errors import (
    DegenerateFeature,
    DimensionMismatch,
    Mg1Error,
    RejectionBudgetExceeded,
)

_log = logging.getLogger(__name__)

_HEADER_RE = re.compile(r"^#mg1ds v1 n=(\d+) l=(\d+) count=(\d+) seed=(\d+)$")


@dataclass(frozen=True)
class TrainingSample:
    features: np.ndarray
    target: np.ndarray
    tail_mass: float


@dataclass
class Dataset:
    """Column-wise store of training samples.

    features holds raw (pre-standardization) rows so standardizers can be
    re-fit without regeneration.
    """

    features: np.ndarray
    targets: np.ndarray
    tails: np.ndarray
    n_moments: int
    l: int
    seed: int

    def __len__(self) -> int:
        return int(self.features.shape[0])

    def sample(self, i: int) -> TrainingSample:
        return TrainingSample(
            features=self.features[i], target=self.targets[i], tail_mass=float(self.tails[i])
        )

    def with_n_moments(self, n: int) -> "Dataset":
        """Same instances, features truncated to [lambda, log m2 .. log mn]."""
        if not 2 <= n <= self.n_moments:
            raise DimensionMismatch(
                f"requested n={n} outside 2..{self.n_moments}"
            )
        return Dataset(
            features=self.features[:, :n],
            targets=self.targets,
            tails=self.tails,
            n_moments=n,
            l=self.l,
            seed=self.seed,
        )


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature z-score parameters fit on the training split."""

    mean: np.ndarray
    std: np.ndarray


def feature_vector(arrival_rate: float, raw_moments) -> np.ndarray:
    """[lambda, log m2, ..., log mn] from raw service moments m1..mn."""
    mom = np.asarray(raw_moments, dtype=float)
    if mom.ndim != 1 or mom.size < 2:
        raise DimensionMismatch("need raw moments m1..mn with n >= 2")
    return np.concatenate([[arrival_rate], np.log(mom[1:])])


def _generate_one(args) -> tuple[np.ndarray, np.ndarray, float]:
    seed, base_key, index, n_moments, config, l, epsilon = args
    for attempt in range(10_000):
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(*base_key, index, attempt))
        rng = np.random.default_rng(ss)
        try:
            instance = sampler.sample_instance(config, rng)
            mom = phtype.moments(instance.service, n_moments)
            dist = qbd.solve(instance, l=l, epsilon=epsilon)
        except Mg1Error as exc:
            _log.debug("sample %d attempt %d retried: %s", index, attempt, exc)
            continue
        return feature_vector(instance.arrival_rate, mom), dist.probs, dist.tail_mass
    raise RejectionBudgetExceeded(f"sample {index}: 10000 consecutive rejected draws")


def generate(
    count: int,
    n_moments: int,
    config: sampler.SamplerConfig,
    seed: int | None = None,
    l: int = qbd.DEFAULT_L,
    epsilon: float = qbd.DEFAULT_EPSILON,
    workers: int = 1,
    base_key: tuple[int, ...] = (),
) -> Dataset:
    """Generate ``count`` samples; draws hitting solver errors are retried.

    With the same seed and base_key the output is bit-identical for any
    worker count: sample i always uses the stream keyed (*base_key, i, attempt).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if n_moments < 2:
        raise ValueError("n_moments must be >= 2")
    if seed is None:
        seed = config.seed
    jobs = [
        (seed, tuple(base_key), i, n_moments, config, l, epsilon) for i in range(count)
    ]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            rows = pool.map(_generate_one, jobs, chunksize=max(1, count // (8 * workers)))
    else:
        rows = [_generate_one(job) for job in jobs]
    return Dataset(
        features=np.array([r[0] for r in rows]),
        targets=np.array([r[1] for r in rows]),
        tails=np.array([r[2] for r in rows]),
        n_moments=n_moments,
        l=l,
        seed=seed,
    )


def fit_standardizer(data: Dataset | np.ndarray) -> FeatureStats:
    """Per-feature mean/std over a split; rejects zero-variance columns."""
    feats = data.features if isinstance(data, Dataset) else np.asarray(data, float)
    if feats.ndim != 2 or feats.shape[0] < 1:
        raise DimensionMismatch("need a non-empty (N, n) feature matrix")
    mean = feats.mean(axis=0)
    std = feats.std(axis=0)
    degenerate = std < 1e-12 * np.maximum(1.0, np.abs(mean))
    if degenerate.any():
        raise DegenerateFeature(
            f"zero-variance feature columns: {np.flatnonzero(degenerate).tolist()}"
        )
    return FeatureStats(mean=mean, std=std)


def apply_standardizer(stats: FeatureStats, features: np.ndarray) -> np.ndarray:
    feats = np.asarray(features, dtype=float)
    if feats.shape[-1] != stats.mean.shape[0]:
        raise DimensionMismatch(
            f"features have {feats.shape[-1]} columns, stats expect {stats.mean.shape[0]}"
        )
    return (feats - stats.mean) / stats.std


def invert_standardizer(stats: FeatureStats, standardized: np.ndarray) -> np.ndarray:
    z = np.asarray(standardized, dtype=float)
    if z.shape[-1] != stats.mean.shape[0]:
        raise DimensionMismatch(
            f"features have {z.shape[-1]} columns, stats expect {stats.mean.shape[0]}"
        )
    return z * stats.std + stats.mean


def _format_row(features, target, tail) -> str:
    left = ",".join(repr(float(v)) for v in features)
    right = ",".join(repr(float(v)) for v in target)
    return f"{left}|{right},{tail!r}"


def save(ds: Dataset, path) -> None:
    """Plain-text dataset file; floats use shortest round-trip repr."""
    with open(path, "w") as fh:
        fh.write(f"#mg1ds v1 n={ds.n_moments} l={ds.l} count={len(ds)} seed={ds.seed}\n")
        for i in range(len(ds)):
            fh.write(_format_row(ds.features[i], ds.targets[i], float(ds.tails[i])) + "\n")


def load(path) -> Dataset:
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        match = _HEADER_RE.match(header)
        if not match:
            raise ValueError(f"{path}: not a mg1ds v1 file (header {header!r})")
        n, l, count, seed = (int(g) for g in match.groups())
        features = np.empty((count, n))
        targets = np.empty((count, l))
        tails = np.empty(count)
        for i in range(count):
            line = fh.readline().rstrip("\n")
            left, right = line.split("|")
            row = np.array(left.split(","), dtype=float)
            if row.shape[0] != n:
                raise ValueError(f"{path}: row {i} has {row.shape[0]} features, expected {n}")
            values = np.array(right.split(","), dtype=float)
            if values.shape[0] != l + 1:
                raise ValueError(f"{path}: row {i} has {values.shape[0]} targets, expected {l + 1}")
            features[i] = row
            targets[i] = values[:l]
            tails[i] = values[l]
    return Dataset(
        features=features, targets=targets, tails=tails, n_moments=n, l=l, seed=seed
    )

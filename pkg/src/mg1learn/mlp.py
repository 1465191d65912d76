"""Feedforward surrogate model mapping queue features to the stationary law.

The network is fully connected with ReLU hidden layers (30-40-50-60-60) and a
softmax output over the truncated queue-length support, trained with Adam on
the composite loss: per-sample L1 distance plus per-sample maximum absolute
error, both averaged over the batch. Forward, backward, and the optimizer are
plain numpy; training is single-threaded over batches so runs are
reproducible.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, FeatureStats, apply_standardizer, feature_vector, fit_standardizer
from .errors import DatasetMismatch, DegenerateFeature, DimensionMismatch
from .metrics import metric1

_log = logging.getLogger(__name__)

HIDDEN_DIMS = (30, 40, 50, 60, 60)
OUTPUT_DIM = 70

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    batch_size: int = 128
    epochs: int = 300
    lr0: float = 0.01
    lr_decay: float = 0.97
    weight_decay: float = 1e-5
    seed: int = 42
    patience: int | None = None  # stop after this many epochs without val improvement
    min_delta: float = 0.0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0 or self.lr0 < 0:
            raise ValueError("batch_size >= 1, epochs >= 0, lr0 >= 0 required")
        if not 0.0 < self.lr_decay <= 1.0:
            raise ValueError("lr_decay must be in (0, 1]")


@dataclass
class MlpModel:
    layer_dims: tuple[int, ...]
    weights: list[np.ndarray]  # (fan_in, fan_out) per layer
    biases: list[np.ndarray]
    feature_stats: FeatureStats | None
    n_moments: int


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_metric1: float
    lr: float


@dataclass(frozen=True)
class SweepResult:
    n_moments: int
    val_metric1: float
    model: MlpModel


def init_model(
    input_dim: int,
    rng: np.random.Generator,
    hidden_dims=HIDDEN_DIMS,
    output_dim: int = OUTPUT_DIM,
    feature_stats: FeatureStats | None = None,
    n_moments: int | None = None,
) -> MlpModel:
    """Zero biases, He-scaled normal weights (ReLU-appropriate)."""
    dims = (input_dim, *hidden_dims, output_dim)
    weights = [
        rng.normal(0.0, np.sqrt(2.0 / dims[i]), size=(dims[i], dims[i + 1]))
        for i in range(len(dims) - 1)
    ]
    biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]
    return MlpModel(
        layer_dims=dims,
        weights=weights,
        biases=biases,
        feature_stats=feature_stats,
        n_moments=input_dim if n_moments is None else n_moments,
    )


def parameter_count(model: MlpModel) -> int:
    return sum(w.size for w in model.weights) + sum(b.size for b in model.biases)


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction for overflow safety."""
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_cached(model: MlpModel, X: np.ndarray):
    """Activations per layer (post-ReLU) plus the softmax output."""
    acts = [X]
    h = X
    for k in range(len(model.weights) - 1):
        h = np.maximum(h @ model.weights[k] + model.biases[k], 0.0)
        acts.append(h)
    out = softmax(h @ model.weights[-1] + model.biases[-1])
    return acts, out


def forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Probability vector(s) for standardized feature row(s)."""
    X = np.asarray(features, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.layer_dims[0]:
        raise DimensionMismatch(
            f"features have {X.shape[1]} columns, model expects {model.layer_dims[0]}"
        )
    _, out = _forward_cached(model, X)
    return out[0] if single else out


def loss(Y: np.ndarray, Yhat: np.ndarray) -> float:
    """Batch-mean L1 distance plus batch-mean maximum absolute error."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    Yhat = np.atleast_2d(np.asarray(Yhat, dtype=float))
    if Y.shape != Yhat.shape:
        raise DimensionMismatch(f"shape mismatch: {Y.shape} vs {Yhat.shape}")
    diff = np.abs(Y - Yhat)
    return float(diff.sum(axis=1).mean() + diff.max(axis=1).mean())


def _dloss_dyhat(Y: np.ndarray, Yhat: np.ndarray) -> np.ndarray:
    """Subgradient of the loss in the predictions.

    sign(0) is taken as 0; the max term's subgradient sits on the first
    (lowest-index) maximizing coordinate of each row.
    """
    B = Y.shape[0]
    diff = Yhat - Y
    g = np.sign(diff)
    rows = np.arange(B)
    arg = np.argmax(np.abs(diff), axis=1)
    g[rows, arg] += np.sign(diff[rows, arg])
    return g / B


def backward(model: MlpModel, X: np.ndarray, Y: np.ndarray):
    """Gradients of loss(Y, forward(X)) in every weight and bias."""
    acts, out = _forward_cached(model, X)
    g_out = _dloss_dyhat(Y, out)
    gz = out * (g_out - (g_out * out).sum(axis=1, keepdims=True))
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.biases)
    for k in range(len(model.weights) - 1, -1, -1):
        grads_w[k] = acts[k].T @ gz
        grads_b[k] = gz.sum(axis=0)
        if k > 0:
            gz = (gz @ model.weights[k].T) * (acts[k] > 0.0)
    return grads_w, grads_b


def _check_pair(train: Dataset, val: Dataset) -> None:
    if train.n_moments != val.n_moments:
        raise DatasetMismatch(
            f"train n={train.n_moments} but val n={val.n_moments}"
        )
    if train.l != val.l:
        raise DatasetMismatch(f"train l={train.l} but val l={val.l}")


def train(
    train_ds: Dataset, val_ds: Dataset, cfg: TrainConfig
) -> tuple[MlpModel, list[EpochRecord]]:
    """Adam training; returns the snapshot with the best validation metric1.

    The learning rate decays by cfg.lr_decay each epoch from cfg.lr0; weight
    decay enters the gradient (L2-coupled). Shuffling and initialization use
    streams derived from cfg.seed. With patience set, training stops once the
    validation metric1 has not improved by more than min_delta for that many
    epochs.
    """
    _check_pair(train_ds, val_ds)
    try:
        stats = fit_standardizer(train_ds)
    except DegenerateFeature:
        # degenerate splits (e.g. a single sample): rescale zero-variance
        # columns to O(1) without centering them away to zero
        _log.warning("zero-variance features; rescaling without centering")
        mean = train_ds.features.mean(axis=0)
        std = train_ds.features.std(axis=0)
        dead = std < 1e-12 * np.maximum(1.0, np.abs(mean))
        stats = FeatureStats(
            mean=np.where(dead, 0.0, mean),
            std=np.where(dead, np.maximum(1.0, np.abs(mean)), std),
        )
    X_train = apply_standardizer(stats, train_ds.features)
    Y_train = train_ds.targets
    X_val = apply_standardizer(stats, val_ds.features)
    Y_val = val_ds.targets

    init_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    shuffle_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    model = init_model(
        train_ds.n_moments,
        init_rng,
        output_dim=train_ds.l,
        feature_stats=stats,
        n_moments=train_ds.n_moments,
    )

    m_w = [np.zeros_like(w) for w in model.weights]
    v_w = [np.zeros_like(w) for w in model.weights]
    m_b = [np.zeros_like(b) for b in model.biases]
    v_b = [np.zeros_like(b) for b in model.biases]
    step = 0

    n = len(train_ds)
    best_val = np.inf
    best_weights = [w.copy() for w in model.weights]
    best_biases = [b.copy() for b in model.biases]
    since_best = 0
    log: list[EpochRecord] = []

    for epoch in range(cfg.epochs):
        lr = cfg.lr0 * cfg.lr_decay**epoch
        perm = shuffle_rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            Xb, Yb = X_train[idx], Y_train[idx]
            grads_w, grads_b = backward(model, Xb, Yb)
            step += 1
            bias_fix1 = 1.0 - _ADAM_BETA1**step
            bias_fix2 = 1.0 - _ADAM_BETA2**step
            for k in range(len(model.weights)):
                gw = grads_w[k] + cfg.weight_decay * model.weights[k]
                m_w[k] = _ADAM_BETA1 * m_w[k] + (1 - _ADAM_BETA1) * gw
                v_w[k] = _ADAM_BETA2 * v_w[k] + (1 - _ADAM_BETA2) * gw * gw
                model.weights[k] -= lr * (m_w[k] / bias_fix1) / (
                    np.sqrt(v_w[k] / bias_fix2) + _ADAM_EPS
                )
                gb = grads_b[k] + cfg.weight_decay * model.biases[k]
                m_b[k] = _ADAM_BETA1 * m_b[k] + (1 - _ADAM_BETA1) * gb
                v_b[k] = _ADAM_BETA2 * v_b[k] + (1 - _ADAM_BETA2) * gb * gb
                model.biases[k] -= lr * (m_b[k] / bias_fix1) / (
                    np.sqrt(v_b[k] / bias_fix2) + _ADAM_EPS
                )
            batch_losses.append(loss(Yb, forward(model, Xb)))
        val_m1 = metric1(Y_val, forward(model, X_val))
        log.append(
            EpochRecord(
                epoch=epoch,
                train_loss=float(np.mean(batch_losses)),
                val_metric1=val_m1,
                lr=lr,
            )
        )
        if val_m1 < best_val - cfg.min_delta:
            best_val = val_m1
            best_weights = [w.copy() for w in model.weights]
            best_biases = [b.copy() for b in model.biases]
            since_best = 0
        else:
            since_best += 1
        _log.info(
            "epoch %d: train loss %.6f, val metric1 %.6f, lr %.2e",
            epoch,
            log[-1].train_loss,
            val_m1,
            lr,
        )
        if cfg.patience is not None and since_best > cfg.patience:
            _log.info("early plateau stop at epoch %d (best %.6f)", epoch, best_val)
            break

    model.weights = best_weights
    model.biases = best_biases
    return model, log


def moment_sweep(
    pairs: dict[int, tuple[Dataset, Dataset]], cfg: TrainConfig
) -> list[SweepResult]:
    """Train once per moment count; returns (n, best validation metric1) rows."""
    results = []
    for n in sorted(pairs):
        train_ds, val_ds = pairs[n]
        model, log = train(train_ds, val_ds, cfg)
        best = min(rec.val_metric1 for rec in log)
        results.append(SweepResult(n_moments=n, val_metric1=best, model=model))
        _log.info("sweep n=%d: best val metric1 %.6f", n, best)
    return results


def evaluate_model(model: MlpModel, ds: Dataset) -> float:
    """metric1 of the model on a dataset's raw features and targets."""
    if ds.n_moments != model.n_moments:
        raise DatasetMismatch(
            f"dataset n={ds.n_moments} but model expects n={model.n_moments}"
        )
    X = apply_standardizer(model.feature_stats, ds.features)
    return metric1(ds.targets, forward(model, X))


def predict_from_moments(
    model: MlpModel, arrival_rate: float, raw_moments
) -> np.ndarray:
    """Predicted distribution from raw service moments m2..mn (unit mean).

    Applies the log transform and the model's stored standardization.
    """
    mom = np.asarray(raw_moments, dtype=float)
    if mom.ndim != 1 or mom.shape[0] != model.n_moments - 1:
        raise DimensionMismatch(
            f"expected {model.n_moments - 1} moments m2..m{model.n_moments}, got {mom.shape}"
        )
    feats = feature_vector(arrival_rate, np.concatenate([[1.0], mom]))
    return forward(model, apply_standardizer(model.feature_stats, feats))


def save_model(model: MlpModel, path) -> None:
    """JSON model record with row-major weight matrices."""
    record = {
        "version": 1,
        "n_moments": model.n_moments,
        "layer_dims": list(model.layer_dims),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "feature_mean": model.feature_stats.mean.tolist(),
        "feature_std": model.feature_stats.std.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(record, fh)
        fh.write("\n")


def load_model(path) -> MlpModel:
    with open(path) as fh:
        record = json.load(fh)
    if record.get("version") != 1:
        raise ValueError(f"{path}: unsupported model version {record.get('version')}")
    stats = FeatureStats(
        mean=np.array(record["feature_mean"], dtype=float),
        std=np.array(record["feature_std"], dtype=float),
    )
    return MlpModel(
        layer_dims=tuple(record["layer_dims"]),
        weights=[np.array(w, dtype=float) for w in record["weights"]],
        biases=[np.array(b, dtype=float) for b in record["biases"]],
        feature_stats=stats,
        n_moments=int(record["n_moments"]),
    )

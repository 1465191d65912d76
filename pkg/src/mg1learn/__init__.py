"""Learn M/G/1 stationary queue-length distributions from service moments.

The package bundles the full pipeline: phase-type service distributions
(phtype), a hierarchical sampler over them (sampler), the exact QBD solver
producing training targets (qbd), a discrete-event simulation oracle
(simulate), dataset generation and pre-processing (dataset), the feedforward
surrogate model (mlp), evaluation metrics (metrics), and a command-line
front end (cli).
"""

from . import errors
from .dataset import Dataset, FeatureStats, feature_vector, generate
from .mlp import MlpModel, TrainConfig, forward, load_model, save_model, train
from .phtype import PhaseType, moments, sample_variates, scale_to_unit_mean, validate
from .qbd import (
    QueueInstance,
    QueueLengthDistribution,
    mean_queue_length,
    pollaczek_khinchine_mean,
    solve,
)
from .sampler import SamplerConfig, sample_instance, sample_ph
from .simulate import SimConfig, draw_service_sample, simulate_queue

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FeatureStats",
    "MlpModel",
    "PhaseType",
    "QueueInstance",
    "QueueLengthDistribution",
    "SamplerConfig",
    "SimConfig",
    "TrainConfig",
    "draw_service_sample",
    "errors",
    "feature_vector",
    "forward",
    "generate",
    "load_model",
    "mean_queue_length",
    "moments",
    "pollaczek_khinchine_mean",
    "sample_instance",
    "sample_ph",
    "sample_variates",
    "save_model",
    "scale_to_unit_mean",
    "simulate_queue",
    "solve",
    "train",
    "validate",
]

"""Discrete-event M/PH/1 simulation, the independent check on the QBD solver.

The queue is FIFO with one server, so customer departure times follow
D_k = max(A_k, D_{k-1}) + X_k from the arrival times A and service times X;
the whole recursion vectorizes as D = C + running-max(A - C_shifted) with
C the cumulative service work. The number-in-system trajectory is rebuilt
from the merged arrival/departure event log and averaged time-weighted
after a warmup counted in events.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import phtype
from .phtype import PhaseType
from .qbd import QueueInstance, QueueLengthDistribution


@dataclass(frozen=True)
class SimConfig:
    warmup_events: int = 10_000
    horizon_events: int = 1_000_000
    seed: int = 42

    def __post_init__(self):
        if not 0 <= self.warmup_events < self.horizon_events:
            raise ValueError("need 0 <= warmup_events < horizon_events")


@dataclass(frozen=True)
class SimulationStats:
    """Window summary: time-averaged E[N], mean sojourn, window size."""

    mean_queue_length: float
    mean_sojourn_time: float
    customers_measured: int
    time_measured: float


def simulate_queue_with_stats(
    instance: QueueInstance, cfg: SimConfig, l: int = 70
) -> tuple[QueueLengthDistribution, SimulationStats]:
    """Empirical queue-length distribution plus window statistics."""
    rng = np.random.default_rng(cfg.seed)
    lam = instance.arrival_rate
    if lam == 0.0:
        probs = np.zeros(l)
        probs[0] = 1.0
        return (
            QueueLengthDistribution(probs=probs, tail_mass=0.0),
            SimulationStats(0.0, 0.0, 0, 0.0),
        )
    # one customer per horizon event guarantees the first horizon_events
    # merged events all precede the last generated arrival
    count = cfg.horizon_events
    arrivals = np.cumsum(rng.exponential(1.0 / lam, count))
    services = phtype.sample_variates(instance.service, count, rng)
    work = np.cumsum(services)
    shifted = np.empty(count)
    shifted[0] = 0.0
    shifted[1:] = work[:-1]
    departures = work + np.maximum.accumulate(arrivals - shifted)

    times = np.concatenate([arrivals, departures])
    steps = np.concatenate([np.ones(count, np.int64), -np.ones(count, np.int64)])
    order = np.argsort(times, kind="stable")
    times = times[order]
    levels = np.cumsum(steps[order])  # number in system after each event

    lo, hi = cfg.warmup_events, cfg.horizon_events
    spans = times[lo + 1 : hi] - times[lo : hi - 1]
    held = levels[lo : hi - 1]
    hist = np.zeros(l + 1)
    np.add.at(hist, np.minimum(held, l), spans)
    window = float(times[hi - 1] - times[lo])
    probs = hist[:l] / window
    tail = float(hist[l] / window)
    dist = QueueLengthDistribution(probs=probs, tail_mass=tail)

    start, end = times[lo], times[hi - 1]
    inside = (arrivals >= start) & (departures <= end)
    n_inside = int(inside.sum())
    sojourn = float((departures[inside] - arrivals[inside]).mean()) if n_inside else 0.0
    stats = SimulationStats(
        mean_queue_length=float((held * spans).sum() / window),
        mean_sojourn_time=sojourn,
        customers_measured=n_inside,
        time_measured=window,
    )
    return dist, stats


def simulate_queue(
    instance: QueueInstance, cfg: SimConfig, l: int = 70
) -> QueueLengthDistribution:
    """Empirical queue-length distribution in the same format as qbd.solve."""
    dist, _ = simulate_queue_with_stats(instance, cfg, l)
    return dist


def draw_service_sample(
    ph: PhaseType, count: int, rng: np.random.Generator
) -> np.ndarray:
    """``count`` independent service-time draws (the case-study raw data)."""
    if count < 0:
        raise ValueError("count must be >= 0")
    return phtype.sample_variates(ph, count, rng)

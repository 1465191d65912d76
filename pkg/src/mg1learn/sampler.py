"""Hierarchical random generation of diverse PH service-time distributions.

Service distributions are assembled from independently sampled "classes":
disjoint groups of phases that the chain cannot leave before absorption.
Within a class every state is typed fully-absorbing (exit always absorbs),
partially-absorbing (exit absorbs with probability p), or non-absorbing
(exit never absorbs), and transition rates are drawn uniformly and then
rescaled so each row meets its type's constraint. Draws whose chain can
dodge absorption forever (infinite mean) are rejected and retried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import phtype
from .errors import RejectionBudgetExceeded, SingularGenerator
from .phtype import PhaseType
from .qbd import QueueInstance


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs of the service-distribution sampler.

    max_ph bounds the total phase count, rate_lo/rate_hi bound the uniform
    rate draws, rho_max bounds the sampled utilization, and seed is the
    master seed used when deriving per-sample streams.
    """

    max_ph: int = 20
    rate_lo: float = 1.0
    rate_hi: float = 1000.0
    rho_max: float = 0.95
    seed: int = 42

    def __post_init__(self):
        if self.max_ph < 1:
            raise ValueError("max_ph must be >= 1")
        if not 0.0 < self.rate_lo < self.rate_hi:
            raise ValueError("need 0 < rate_lo < rate_hi")
        if not 0.0 < self.rho_max < 1.0:
            raise ValueError("rho_max must be in (0, 1)")


@dataclass(frozen=True)
class StateTyping:
    """Disjoint absorption-type index sets covering one class's states."""

    full_absorbing: tuple[int, ...]
    partial_absorbing: tuple[int, ...]
    non_absorbing: tuple[int, ...]


@dataclass(frozen=True)
class ClassDraft:
    """Transition structure of one class before rates are drawn.

    trans[j, k] == 1 marks a permitted direct jump; absorb_prob maps each
    partially-absorbing state to its absorption probability p_j. Rows absent
    from absorb_prob and without permitted jumps are fully absorbing.
    """

    size: int
    trans: np.ndarray
    absorb_prob: dict[int, float]


def _positive_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    """U(0,1) draws with exact zeros redrawn (they would break Dirichlet)."""
    u = rng.random(n)
    while True:
        zero = u == 0.0
        if not zero.any():
            return u
        u[zero] = rng.random(int(zero.sum()))


def sample_dirichlet(concentration, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet draw as normalized Gamma(a_i, 1) variates.

    Uses the shape-boost identity Gamma(a) = Gamma(a+1) * U^(1/a) in log
    space so tiny concentrations cannot underflow to an all-zero vector.
    """
    a = np.asarray(concentration, dtype=float)
    if a.ndim != 1 or a.size == 0 or np.any(a <= 0.0) or not np.all(np.isfinite(a)):
        raise ValueError("concentration weights must be positive finite reals")
    while True:
        log_g = np.log(rng.gamma(a + 1.0)) + np.log(rng.random(a.size)) / a
        if np.any(np.isfinite(log_g)):
            break
    x = np.exp(log_g - log_g.max())
    return x / x.sum()


def sample_state_types(size: int, rng: np.random.Generator) -> StateTyping:
    """Assign each of a class's states an absorption type.

    Type weights are Dirichlet with U(0,1) concentrations; the first state is
    restricted to {full, partial} so the class can always reach absorption.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    p = sample_dirichlet(_positive_uniform(rng, 3), rng)
    # if both absorbing weights underflowed, split them evenly
    first_split = p[0] / (p[0] + p[1]) if p[0] + p[1] > 0.0 else 0.5
    buckets = ([], [], [])
    for j in range(size):
        u = rng.random()
        if j == 0:
            cat = 0 if u < first_split else 1
        elif u < p[0]:
            cat = 0
        elif u < p[0] + p[1]:
            cat = 1
        else:
            cat = 2
        buckets[cat].append(j)
    return StateTyping(*(tuple(b) for b in buckets))


def sample_transitions(
    size: int, typing: StateTyping, rng: np.random.Generator
) -> ClassDraft:
    """Draw the permitted-jump structure and absorption probabilities.

    Partial and non-absorbing states get 1 + Binomial(size-2, U(0,1)) jump
    targets chosen uniformly without replacement. A single-state class has no
    valid target, so its state degenerates to fully absorbing.
    """
    trans = np.zeros((size, size), dtype=np.int8)
    absorb: dict[int, float] = {}
    if size == 1:
        return ClassDraft(size=size, trans=trans, absorb_prob=absorb)
    for j in sorted(typing.partial_absorbing + typing.non_absorbing):
        extra = size - 2
        n_targets = 1 + (int(rng.binomial(extra, rng.random())) if extra > 0 else 0)
        candidates = np.array([k for k in range(size) if k != j])
        trans[j, rng.choice(candidates, size=n_targets, replace=False)] = 1
    for j in typing.partial_absorbing:
        absorb[j] = float(rng.random())
    return ClassDraft(size=size, trans=trans, absorb_prob=absorb)


def realize_class(
    draft: ClassDraft, rng: np.random.Generator, rate_lo: float, rate_hi: float
) -> tuple[np.ndarray, np.ndarray]:
    """Draw rates for a drafted class and rescale rows to their targets.

    Off-diagonal rates of a non-absorbing row are rescaled to sum to |S[j,j]|
    (row sum 0); of a partially-absorbing row, to (1 - p_j) * |S[j,j]|.
    Returns (alpha_i, S_i) with alpha_i a Dirichlet draw.
    """
    size = draft.size
    S = np.zeros((size, size))
    diag = -rng.uniform(rate_lo, rate_hi, size)
    np.fill_diagonal(S, diag)
    mask = draft.trans.astype(bool)
    S[mask] = rng.uniform(rate_lo, rate_hi, int(mask.sum()))
    for j in range(size):
        row = mask[j]
        if not row.any():
            continue
        target = -diag[j]
        if j in draft.absorb_prob:
            target *= 1.0 - draft.absorb_prob[j]
        S[j, row] *= target / S[j, row].sum()
    alpha = sample_dirichlet(_positive_uniform(rng, size), rng)
    return alpha, S


def sample_class(
    size: int,
    rng: np.random.Generator,
    rate_lo: float = 1.0,
    rate_hi: float = 1000.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample one class: state types, jump structure, then rates."""
    typing = sample_state_types(size, rng)
    draft = sample_transitions(size, typing, rng)
    return realize_class(draft, rng, rate_lo, rate_hi)


def _sample_ph_once(
    config: SamplerConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, list[int]]:
    """One unvalidated draw: block-diagonal S, class-weighted alpha, sizes."""
    m = int(rng.integers(1, config.max_ph + 1))
    num_classes = int(rng.integers(1, m + 1))
    weights = sample_dirichlet(_positive_uniform(rng, num_classes), rng)
    sizes: list[int] = []
    assigned = 0
    for i in range(num_classes):
        # leave at least one state for every class still to be seated
        upper = m - assigned - (num_classes - i - 1)
        if i == num_classes - 1:
            size_i = upper  # last class takes every remaining state
        else:
            size_i = int(rng.integers(1, upper + 1))
        sizes.append(size_i)
        assigned += size_i
    alpha = np.zeros(m)
    S = np.zeros((m, m))
    lo = 0
    for weight, size_i in zip(weights, sizes):
        a_i, S_i = sample_class(size_i, rng, config.rate_lo, config.rate_hi)
        S[lo : lo + size_i, lo : lo + size_i] = S_i
        alpha[lo : lo + size_i] = a_i * weight
        lo += size_i
    return alpha, S, sizes


def sample_ph(
    config: SamplerConfig, rng: np.random.Generator, max_retries: int = 1000
) -> PhaseType:
    """Sample a service-time distribution, rejecting infinite-mean draws.

    A draw whose chain can loop forever without absorbing fails validation
    with SingularGenerator and is fully redrawn. Raises
    RejectionBudgetExceeded after max_retries consecutive rejections.
    """
    for _ in range(max_retries):
        alpha, S, _ = _sample_ph_once(config, rng)
        try:
            return phtype.validate(alpha, S)
        except SingularGenerator:
            continue
    raise RejectionBudgetExceeded(
        f"no draw with finite mean in {max_retries} attempts"
    )


def sample_instance(config: SamplerConfig, rng: np.random.Generator) -> QueueInstance:
    """Sample a stable M/PH/1 instance: unit-mean service, lambda ~ U(0, rho_max)."""
    ph = sample_ph(config, rng)
    unit = phtype.scale_to_unit_mean(ph)
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return QueueInstance(arrival_rate=config.rho_max * u, service=unit)

"""Continuous phase-type distributions.

A phase-type (PH) distribution is the law of the absorption time of a
continuous-time Markov chain with ``m`` transient phases and one absorbing
state. It is parameterized by the initial phase probabilities ``alpha`` and
the transient-to-transient rate block ``S``; the per-phase absorption rates
are ``s0 = -S @ 1``. This module covers validation, raw moments, mean
rescaling, random variate generation, and the JSON record format used by the
rest of the toolkit.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, lu_factor, lu_solve

from .errors import (
    BadDiagonal,
    DimensionMismatch,
    NegativeProbability,
    NegativeRate,
    PositiveRowSum,
    SingularGenerator,
)

# tolerance for probability-sum checks
PROB_TOL = 1e-12
# a pivot below this fraction of the largest rate marks S as singular
_PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class PhaseType:
    """A validated PH distribution; build instances through :func:`validate`.

    Arrays are read-only. ``s0`` is the cached exit-rate vector ``-S @ 1``.
    """

    m: int
    alpha: np.ndarray
    S: np.ndarray
    s0: np.ndarray


def _lu_or_singular(S: np.ndarray):
    """LU-factor S, raising SingularGenerator on a negligible pivot."""
    scale = np.max(np.abs(S))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy warns on exact zero pivots
        lu, piv = lu_factor(S)
    pivots = np.abs(np.diag(lu))
    if scale == 0.0 or np.min(pivots) < _PIVOT_TOL * scale:
        raise SingularGenerator(
            "sub-generator is singular: the chain can avoid absorption"
        )
    return lu, piv


def validate(alpha, S) -> PhaseType:
    """Check (alpha, S) against all PH constraints and freeze them.

    Raises DimensionMismatch, NegativeProbability, BadDiagonal, NegativeRate,
    PositiveRowSum, or SingularGenerator. SingularGenerator doubles as the
    rejection signal for sampled chains with infinite expected absorption
    time (livelock).
    """
    alpha = np.array(alpha, dtype=float)
    S = np.array(S, dtype=float)
    if alpha.ndim != 1 or S.ndim != 2:
        raise DimensionMismatch(
            f"alpha must be a vector and S a matrix, got shapes {alpha.shape} and {S.shape}"
        )
    m = alpha.shape[0]
    if S.shape != (m, m):
        raise DimensionMismatch(f"alpha has {m} entries but S has shape {S.shape}")
    if m < 1:
        raise DimensionMismatch("a PH distribution needs at least one phase")
    if np.any(alpha < 0.0):
        raise NegativeProbability(f"alpha has negative entries: {alpha}")
    total = float(alpha.sum())
    if abs(total - 1.0) > PROB_TOL:
        raise NegativeProbability(f"alpha sums to {total!r}, expected 1")
    diag = np.diag(S)
    if np.any(diag >= 0.0):
        raise BadDiagonal(f"diagonal entries must be < 0, got {diag}")
    off = S - np.diag(diag)
    if np.any(off < 0.0):
        raise NegativeRate("off-diagonal rates must be >= 0")
    # row-sum slack scales with the largest rate to absorb rescaling roundoff
    row_sums = S.sum(axis=1)
    row_tol = PROB_TOL * max(1.0, float(np.max(np.abs(S))))
    if np.any(row_sums > row_tol):
        raise PositiveRowSum(f"row sums must be <= 0, got {row_sums}")
    _lu_or_singular(S)
    s0 = np.maximum(-row_sums, 0.0)
    for arr in (alpha, S, s0):
        arr.setflags(write=False)
    return PhaseType(m=m, alpha=alpha, S=S, s0=s0)


def moments(ph: PhaseType, k_max: int) -> np.ndarray:
    """Raw moments E[X^1] .. E[X^k_max].

    Uses E[X^k] = k! * alpha @ (-S)^{-k} @ 1, evaluated by repeated linear
    solves against (-S) instead of forming matrix powers.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    lu = _lu_or_singular(-ph.S)
    out = np.empty(k_max)
    x = np.ones(ph.m)
    factorial = 1.0
    for k in range(1, k_max + 1):
        x = lu_solve(lu, x)
        factorial *= k
        out[k - 1] = factorial * float(ph.alpha @ x)
    return out


def mean(ph: PhaseType) -> float:
    """Expected absorption time."""
    return float(moments(ph, 1)[0])


def scale_to_unit_mean(ph: PhaseType) -> PhaseType:
    """Rescale time so the mean is 1; normalized moments are preserved."""
    mu = mean(ph)
    return validate(ph.alpha, mu * ph.S)


def sample_variate(ph: PhaseType, rng: np.random.Generator) -> float:
    """One absorption time, simulated along the CTMC phase path."""
    cum_alpha = np.cumsum(ph.alpha)
    i = min(int(np.searchsorted(cum_alpha, rng.random(), side="right")), ph.m - 1)
    total = 0.0
    while True:
        q = -ph.S[i, i]
        total += rng.exponential(1.0 / q)
        u = q * rng.random()
        acc = 0.0
        nxt = -1
        for j in range(ph.m):
            if j == i:
                continue
            acc += ph.S[i, j]
            if u < acc:
                nxt = j
                break
        if nxt < 0:  # exit mass beyond the off-diagonal rates: absorbed
            return total
        i = nxt


def sample_variates(ph: PhaseType, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` absorption times; all paths advanced in lockstep."""
    count = int(count)
    if count == 0:
        return np.empty(0)
    m = ph.m
    rates = -np.diag(ph.S).copy()
    # exit distribution per phase: columns 0..m-1 jump targets, column m absorbs
    exit_probs = np.empty((m, m + 1))
    exit_probs[:, :m] = ph.S / rates[:, None]
    np.fill_diagonal(exit_probs[:, :m], 0.0)
    exit_probs[:, m] = ph.s0 / rates
    cum_exit = np.cumsum(exit_probs, axis=1)
    cum_exit[:, m] = 1.0

    cum_alpha = np.cumsum(ph.alpha)
    phase = np.minimum(
        np.searchsorted(cum_alpha, rng.random(count), side="right"), m - 1
    )
    total = np.zeros(count)
    active = np.arange(count)
    while active.size:
        q = rates[phase]
        total[active] += rng.exponential(1.0, active.size) / q
        u = rng.random(active.size)
        nxt = (cum_exit[phase] <= u[:, None]).sum(axis=1)
        alive = nxt < m
        phase = nxt[alive]
        active = active[alive]
    return total


def _cdf_grid(ph: PhaseType, t_max: float, points: int) -> tuple[np.ndarray, np.ndarray]:
    """CDF on a uniform grid over [0, t_max].

    F(t) = 1 - alpha @ expm(S t) @ 1, advanced by one matrix exponential of
    the grid step. Internal helper for verification code.
    """
    ts = np.linspace(0.0, t_max, points)
    step = expm(ph.S * (ts[1] - ts[0]))
    F = np.empty(points)
    v = np.ones(ph.m)
    F[0] = 0.0
    for k in range(1, points):
        v = step @ v
        F[k] = 1.0 - float(ph.alpha @ v)
    return ts, F


def to_dict(ph: PhaseType) -> dict:
    """JSON-ready record ``{"m": ..., "alpha": [...], "S": [[...]]}``."""
    return {"m": ph.m, "alpha": ph.alpha.tolist(), "S": ph.S.tolist()}


def from_dict(record: dict) -> PhaseType:
    ph = validate(record["alpha"], record["S"])
    if ph.m != int(record["m"]):
        raise DimensionMismatch(
            f"record says m={record['m']} but alpha has {ph.m} entries"
        )
    return ph


def to_json(ph: PhaseType) -> str:
    return json.dumps(to_dict(ph))


def from_json(text: str) -> PhaseType:
    return from_dict(json.loads(text))

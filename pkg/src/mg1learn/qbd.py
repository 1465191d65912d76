"""Exact stationary queue-length distribution of the M/PH/1 queue.

The queue is a quasi-birth-and-death process over levels n = number in
system, with phase of the in-service customer as the within-level state.
Level blocks are A0 = lambda*I (arrival), A1 = S - lambda*I (local),
A2 = s0 alpha (departure + restart); the boundary couples the empty state to
level 1 through lambda*alpha and s0. The stationary level vectors are
matrix-geometric: pi_{n+1} = pi_n R with R the minimal nonnegative solution
of A0 + R A1 + R^2 A2 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import phtype
from .errors import NoConvergence, TailTooHeavy, Unstable
from .phtype import PhaseType

DEFAULT_L = 70
DEFAULT_EPSILON = 1e-9

_R_TOL = 1e-13
_R_MAX_ITER = 10**6
# probabilities this far below zero are roundoff; anything worse is a failure
_CLAMP_TOL = 1e-14
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class QueueInstance:
    """An arrival rate paired with a PH service distribution."""

    arrival_rate: float
    service: PhaseType
    rho: float = field(init=False)

    def __post_init__(self):
        if self.arrival_rate < 0.0:
            raise ValueError("arrival_rate must be >= 0")
        object.__setattr__(
            self, "rho", self.arrival_rate * phtype.mean(self.service)
        )


@dataclass(frozen=True)
class MatrixGeometricContext:
    """Solver internals retained for closed-form post-processing."""

    pi0: float
    pi1: np.ndarray
    R: np.ndarray


@dataclass(frozen=True)
class QueueLengthDistribution:
    """P(N=0) .. P(N=l-1) plus the exact probability mass beyond l-1."""

    probs: np.ndarray
    tail_mass: float
    context: MatrixGeometricContext | None = None

    @property
    def l(self) -> int:
        return int(self.probs.shape[0])


def _solve_rate_matrix(A0, A1, A2) -> np.ndarray:
    """Minimal nonnegative R with A0 + R A1 + R^2 A2 = 0.

    Successive substitution R <- -(A0 + R^2 A2) A1^{-1} from R = 0 increases
    monotonically to the minimal solution; stops on max-abs change < 1e-13.
    A1 is strictly diagonally dominant, so inverting it once is safe.
    """
    A1_inv = np.linalg.inv(A1)
    B0 = -A0 @ A1_inv
    B2 = -A2 @ A1_inv
    R = np.zeros_like(A0)
    for _ in range(_R_MAX_ITER):
        Rn = B0 + R @ R @ B2
        if float(np.max(np.abs(Rn - R))) < _R_TOL:
            return Rn
        R = Rn
    raise NoConvergence(f"rate-matrix iteration exceeded {_R_MAX_ITER} steps")


def spectral_radius(M: np.ndarray, tol: float = 1e-10, max_iter: int = 100000) -> float:
    """Largest |eigenvalue| by power iteration on a strictly positive start."""
    v = np.ones(M.shape[0]) / M.shape[0]
    lam = 0.0
    for _ in range(max_iter):
        w = M @ v
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return 0.0
        w /= nrm
        lam_new = float(w @ (M @ w))
        if abs(lam_new - lam) < tol:
            return abs(lam_new)
        v, lam = w, lam_new
    return abs(lam)


def solve(
    instance: QueueInstance,
    l: int = DEFAULT_L,
    epsilon: float = DEFAULT_EPSILON,
) -> QueueLengthDistribution:
    """Stationary queue-length probabilities P(N=0) .. P(N=l-1).

    The boundary system in (pi0, pi1) is solved by LU with the normalization
    pi0 + pi1 (I-R)^{-1} 1 = 1 replacing one balance equation; the dropped
    equation's residual is checked. tail_mass is the closed-form
    pi1 R^{l-1} (I-R)^{-1} 1; raises TailTooHeavy when it exceeds epsilon.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if instance.rho >= 1.0:
        raise Unstable(f"utilization {instance.rho:.6g} >= 1")
    lam = instance.arrival_rate
    ph = instance.service
    m = ph.m
    eye = np.eye(m)
    A0 = lam * eye
    A1 = ph.S - lam * eye
    A2 = np.outer(ph.s0, ph.alpha)
    R = _solve_rate_matrix(A0, A1, A2)

    ones = np.ones(m)
    geo_weight = np.linalg.solve(eye - R, ones)  # (I-R)^{-1} 1
    # boundary balance: columns [B00; B10] and [B01; A1 + R A2]
    M = np.empty((m + 1, m + 1))
    M[0, 0] = -lam
    M[1:, 0] = ph.s0
    M[0, 1:] = lam * ph.alpha
    M[1:, 1:] = A1 + R @ A2
    Mt = M.copy()
    Mt[0, 0] = 1.0
    Mt[1:, 0] = geo_weight  # normalization replaces the level-0 equation
    rhs = np.zeros(m + 1)
    rhs[0] = 1.0
    try:
        x = np.linalg.solve(Mt.T, rhs)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"boundary system is singular: {exc}") from exc
    # residual of the dropped balance equation, relative to the rate scale
    residual = abs(float(x @ M[:, 0])) / max(1.0, float(np.max(np.abs(M))))
    if residual > _RESIDUAL_TOL:
        raise NoConvergence(f"boundary residual {residual:.3e} above tolerance")

    pi0 = float(x[0])
    pi1 = x[1:]
    probs = np.empty(l)
    probs[0] = pi0
    w = pi1.copy()
    for n in range(1, l):
        probs[n] = float(w.sum())
        w = w @ R
    tail = float(w @ geo_weight)  # w = pi1 R^{l-1} here

    bad = probs < -_CLAMP_TOL
    if bad.any() or tail < -_CLAMP_TOL:
        raise NoConvergence(
            f"negative probabilities beyond roundoff: min {min(probs.min(), tail):.3e}"
        )
    probs = np.maximum(probs, 0.0)
    tail = max(tail, 0.0)
    total = float(probs.sum() + tail)
    if abs(total - 1.0) > 1e-9:
        raise NoConvergence(f"probabilities sum to {total!r}")
    if tail > epsilon:
        raise TailTooHeavy(
            f"tail mass {tail:.3e} beyond level {l - 1} exceeds epsilon={epsilon:.3e}"
        )
    probs.setflags(write=False)
    return QueueLengthDistribution(
        probs=probs,
        tail_mass=tail,
        context=MatrixGeometricContext(pi0=pi0, pi1=pi1, R=R),
    )


def mean_queue_length(dist: QueueLengthDistribution) -> float:
    """Exact E[N] including the geometric tail: pi1 (I-R)^{-2} 1."""
    if dist.context is None:
        raise ValueError("distribution lacks its matrix-geometric context")
    ctx = dist.context
    eye = np.eye(ctx.R.shape[0])
    ones = np.ones(ctx.R.shape[0])
    return float(ctx.pi1 @ np.linalg.solve(eye - ctx.R, np.linalg.solve(eye - ctx.R, ones)))


def pollaczek_khinchine_mean(instance: QueueInstance) -> float:
    """M/G/1 mean queue length from the first two service moments."""
    m1, m2 = phtype.moments(instance.service, 2)
    rho = instance.arrival_rate * m1
    if rho >= 1.0:
        raise Unstable(f"utilization {rho:.6g} >= 1")
    cv2 = (m2 - m1 * m1) / (m1 * m1)
    return rho + rho * rho * (1.0 + cv2) / (2.0 * (1.0 - rho))

"""Emergent kinematics: rates, mass, momentum, energy, and frame changes.

Conventions.  A walk segment spanning dp right-observer steps and dq
left-observer steps while emitting n_total influences has per-observer rates
rate_right = n/(2 dp) and rate_left = n/(2 dq) (the factor 1/2 makes each rate
a property of a single observer chain, which receives half the influences).
Mass is the geometric mean of the rates, momentum their half difference,
energy their average, so mass^2 = energy^2 - momentum^2 identically.

Frame changes are parameterized by the step-length ratio k = sqrt(m/n) of a
linearly related observer pair (Bondi's k-calculus): dp' = k dp, dq' = dq/k,
with frame velocity v = (m - n)/(m + n), i.e. k = sqrt((1+v)/(1-v)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DegenerateWalkError, DomainError


def gamma_of_beta(beta: float) -> float:
    """Time-dilation factor (1 - beta^2)^(-1/2); DomainError for |beta| >= 1."""
    if abs(beta) >= 1.0:
        raise DomainError(f"|beta| must be < 1, got {beta}")
    return 1.0 / math.sqrt((1.0 - beta) * (1.0 + beta))


@dataclass(frozen=True)
class EmergentState:
    """Rates, mass, momentum and energy of a walk segment."""

    n_total: int
    dp: float
    dq: float
    rate_right: float  # n_total / (2 dp), the right observer's rate
    rate_left: float   # n_total / (2 dq)
    mass: float
    momentum: float
    energy: float
    tau: float         # proper time sqrt(dp * dq)

    @property
    def beta(self) -> float:
        return (self.dp - self.dq) / (self.dp + self.dq)

    @property
    def gamma(self) -> float:
        return self.energy / self.mass


def emergent_state(n_total: int, dp: float, dq: float) -> EmergentState:
    """Emergent state of a segment with n_total emissions spanning (dp, dq)."""
    if n_total <= 0:
        raise DomainError(f"n_total must be positive, got {n_total}")
    if dp <= 0 or dq <= 0:
        raise DomainError(f"dp and dq must be positive, got ({dp}, {dq})")
    rate_right = n_total / (2.0 * dp)
    rate_left = n_total / (2.0 * dq)
    tau = math.sqrt(dp * dq)
    return EmergentState(
        n_total=n_total,
        dp=float(dp),
        dq=float(dq),
        rate_right=rate_right,
        rate_left=rate_left,
        mass=n_total / (2.0 * tau),
        momentum=(rate_left - rate_right) / 2.0,
        energy=(rate_right + rate_left) / 2.0,
        tau=tau,
    )


@dataclass(frozen=True)
class FrameRelation:
    """Relation between two coordinated pairs: one reference step of the first
    frame forward-projects to length m and back-projects to length n on the
    second."""

    m: float
    n: float

    def __post_init__(self) -> None:
        if self.m <= 0 or self.n <= 0:
            raise DomainError(f"projected lengths must be positive, got ({self.m}, {self.n})")

    @property
    def k(self) -> float:
        return math.sqrt(self.m / self.n)

    @property
    def velocity(self) -> float:
        return (self.m - self.n) / (self.m + self.n)

    @classmethod
    def from_k(cls, k: float) -> "FrameRelation":
        if k <= 0:
            raise DomainError(f"k must be positive, got {k}")
        return cls(m=k, n=1.0 / k)

    @classmethod
    def from_velocity(cls, v: float) -> "FrameRelation":
        if abs(v) >= 1.0:
            raise DomainError(f"|velocity| must be < 1, got {v}")
        return cls(m=1.0 + v, n=1.0 - v)

    @classmethod
    def identity(cls) -> "FrameRelation":
        return cls(m=1.0, n=1.0)


def transform_interval(rel: FrameRelation, dp: float, dq: float) -> tuple[float, float]:
    """Re-express a (dp, dq) interval in the frame related by ``rel``.

    dp' = k dp and dq' = dq / k, so ds^2 = dp*dq is invariant.
    """
    k = rel.k
    return (k * dp, dq / k)


def lorentz_boost(dt: float, dx: float, v: float) -> tuple[float, float]:
    """Standard boost into the frame moving at velocity v.

    Equivalent to ``transform_interval`` with k = sqrt((1-v)/(1+v)) conjugated
    through the (dt, dx) <-> (dp, dq) change of variables.
    """
    g = gamma_of_beta(v)
    return (g * (dt - v * dx), g * (dx - v * dt))


@dataclass(frozen=True)
class StepStats:
    """Step statistics of a finite walk plus the frame-scaled spans."""

    n_right: int
    n_total: int
    pr_right: float
    pr_left: float
    m_rel: float     # 1 / (2 sqrt(pr_right * pr_left)), relativistic mass
    gamma: float     # from the aggregate walk velocity 2 pr_right - 1
    dp_prime: float  # n_total * pr_right * k
    dq_prime: float  # n_total * pr_left / k


def step_stats(
    n_right: int, n_total: int, frame: Optional[FrameRelation] = None
) -> StepStats:
    """Statistics of a walk with n_right right-steps out of n_total.

    Lightlike walks (n_right in {0, n_total}) are rejected: the relativistic
    mass diverges there.  In the unit-step frame the walk's rest mass is 1, so
    m_rel equals gamma.
    """
    if n_total <= 0:
        raise DomainError(f"n_total must be positive, got {n_total}")
    if n_right <= 0 or n_right >= n_total:
        raise DegenerateWalkError(
            f"walk with n_right={n_right} of {n_total} is lightlike; "
            "relativistic mass is undefined"
        )
    if frame is None:
        frame = FrameRelation.identity()
    pr_right = n_right / n_total
    pr_left = 1.0 - pr_right
    beta = 2.0 * pr_right - 1.0
    k = frame.k
    return StepStats(
        n_right=n_right,
        n_total=n_total,
        pr_right=pr_right,
        pr_left=pr_left,
        m_rel=1.0 / (2.0 * math.sqrt(pr_right * pr_left)),
        gamma=gamma_of_beta(beta),
        dp_prime=n_total * pr_right * k,
        dq_prime=n_total * pr_left / k,
    )

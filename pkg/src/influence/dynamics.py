"""Effect of received influence on a walker's quantified spans.

A receipt from the right lengthens the right span by one increment k while
leaving proper time tau = sqrt(dp*dq) unchanged, so the left span contracts by
the matching factor; a receipt from the left is the exact mirror.  In the
continuum limit the spans obey

    d(dp)/dtau = (+r + 1/tau) dp
    d(dq)/dtau = (-r + 1/tau) dq

with net receipt rate r, whose solutions are dp = e^{phi0} tau e^{r tau} and
dq = e^{-phi0} tau e^{-r tau}, giving beta(tau) = tanh(r tau + phi0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, SingularTimeError


class DynamicState(NamedTuple):
    """Current (dp, dq) spans plus the per-receipt increment length."""

    dp: float
    dq: float
    k_step: float = 1.0

    @property
    def tau(self) -> float:
        return math.sqrt(self.dp * self.dq)

    @property
    def beta(self) -> float:
        return (self.dp - self.dq) / (self.dp + self.dq)

    @property
    def rapidity(self) -> float:
        return 0.5 * math.log(self.dp / self.dq)


def dynamic_state(dp: float, dq: float, k_step: float = 1.0) -> DynamicState:
    """Validated constructor: spans must be positive, k_step non-negative."""
    if dp <= 0 or dq <= 0:
        raise DomainError(f"spans must be positive, got ({dp}, {dq})")
    if k_step < 0:
        raise DomainError(f"k_step must be non-negative, got {k_step}")
    return DynamicState(float(dp), float(dq), float(k_step))


def receive_right(state: DynamicState) -> DynamicState:
    """One receipt from the right: dp grows by k_step, dp*dq is preserved."""
    dp, dq, k = state
    dp_new = dp + k
    return DynamicState(dp_new, dq * dp / dp_new, k)


def receive_left(state: DynamicState) -> DynamicState:
    """Mirror receipt: dq grows by k_step, dp*dq is preserved."""
    dp, dq, k = state
    dq_new = dq + k
    return DynamicState(dp * dq / dq_new, dq_new, k)


def influence_rate(n_received, n_sent, dtau: float) -> float:
    """Receipts per sent-influence per unit proper time: n_r / (n_sent * dtau).

    ``n_sent`` may be a real-valued effective count (continuum limit).
    """
    if n_sent <= 0:
        raise DomainError(f"n_sent must be positive, got {n_sent}")
    if dtau <= 0:
        raise DomainError(f"dtau must be positive, got {dtau}")
    if n_received < 0:
        raise DomainError(f"n_received must be non-negative, got {n_received}")
    return n_received / (n_sent * dtau)


@dataclass(frozen=True)
class InfluenceRates:
    """Receipt rates from each side; the net rate drives the dynamics."""

    r_right: float = 0.0
    r_left: float = 0.0

    @property
    def r_net(self) -> float:
        return self.r_right - self.r_left

    @classmethod
    def net(cls, r: float) -> "InfluenceRates":
        """Rates realizing a signed net rate from one side only."""
        return cls(r_right=r, r_left=0.0) if r >= 0 else cls(r_right=0.0, r_left=-r)

    @classmethod
    def from_counts(
        cls,
        n_received_right,
        n_received_left,
        n_sent_right,
        n_sent_left,
        dtau: float,
    ) -> "InfluenceRates":
        """Rates from counted events over a proper-time window."""
        return cls(
            r_right=influence_rate(n_received_right, n_sent_right, dtau),
            r_left=influence_rate(n_received_left, n_sent_left, dtau),
        )


RateFunction = Callable[[float, float], InfluenceRates]


def constant_rates(r: float) -> RateFunction:
    """Rate function for a constant net receipt rate."""
    rates = InfluenceRates.net(r)
    return lambda tau, x: rates


@dataclass(frozen=True)
class AnalyticAccel:
    """Closed-form constant-acceleration solution, parameterized by the net
    receipt rate and the rapidity intercept at tau = 0."""

    rate: float
    rapidity0: float

    @property
    def amp_plus(self) -> float:
        return math.exp(self.rapidity0)

    @property
    def amp_minus(self) -> float:
        return math.exp(-self.rapidity0)

    def deltas(self, tau: float) -> tuple[float, float]:
        """(dp, dq) = (e^{phi0} tau e^{r tau}, e^{-phi0} tau e^{-r tau})."""
        return (
            self.amp_plus * tau * math.exp(self.rate * tau),
            self.amp_minus * tau * math.exp(-self.rate * tau),
        )

    def beta(self, tau: float) -> float:
        return math.tanh(self.rate * tau + self.rapidity0)

    def rapidity(self, tau: float) -> float:
        return self.rate * tau + self.rapidity0

    def state(self, tau: float, k_step: float = 1.0) -> DynamicState:
        """Dynamic state on the solution at proper time tau > 0."""
        if tau <= 0:
            raise SingularTimeError(f"tau must be positive, got {tau}")
        dp, dq = self.deltas(tau)
        return DynamicState(dp, dq, k_step)


def analytic_beta(tau: float, accel: AnalyticAccel) -> float:
    """Velocity on the constant-acceleration solution: tanh(r tau + phi0)."""
    return accel.beta(tau)


def force(mass: float, gamma: float, r: float) -> float:
    """Rate of momentum change dP/dtau = mass * gamma * r."""
    if mass <= 0:
        raise DomainError(f"mass must be positive, got {mass}")
    if gamma < 1.0:
        raise DomainError(f"gamma must be >= 1, got {gamma}")
    return mass * gamma * r

def power(force_value: float, beta: float) -> float:
    """Rate of energy change dE/dtau = F * beta."""
    if abs(beta) > 1.0:
        raise DomainError(f"|beta| must be <= 1, got {beta}")
    return force_value * beta


@dataclass(frozen=True)
class Trajectory:
    """Sampled continuum evolution of a walker under received influence.

    All arrays share one length; ``mass`` is the constant rest mass used for
    the emergent momentum/energy columns.
    """

    tau: np.ndarray
    dp: np.ndarray
    dq: np.ndarray
    x: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    momentum: np.ndarray
    energy: np.ndarray
    force: np.ndarray
    power: np.ndarray
    mass: float
    dtau: float

    def __len__(self) -> int:
        return len(self.tau)

    CSV_HEADER = "tau,dp,dq,beta,gamma,mass,momentum,energy,force,power"

    def to_csv(self) -> str:
        lines = [self.CSV_HEADER]
        for i in range(len(self.tau)):
            lines.append(
                f"{float(self.tau[i])!r},{float(self.dp[i])!r},{float(self.dq[i])!r},"
                f"{float(self.beta[i])!r},{float(self.gamma[i])!r},{float(self.mass)!r},"
                f"{float(self.momentum[i])!r},{float(self.energy[i])!r},"
                f"{float(self.force[i])!r},{float(self.power[i])!r}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def evolve_ode(
    initial: DynamicState,
    rates: RateFunction,
    tau_span: float,
    dtau: float = 1e-3,
    mass: float = 1.0,
    x0: float = 0.0,
) -> Trajectory:
    """Integrate the span equations with a fixed-step classical 4th-order scheme.

    ``rates`` is called as rates(tau, x) and must vary slowly over one step.
    Integration runs from the initial state's tau over tau_span, sampling every
    step (the spatial coordinate advances as dx/dtau = (dp - dq)/(2 tau)).
    """
    tau0 = initial.tau
    if tau0 <= 0:
        raise SingularTimeError(f"integration must start at tau > 0, got {tau0}")
    if tau_span <= 0:
        raise DomainError(f"tau_span must be positive, got {tau_span}")
    if dtau <= 0:
        raise DomainError(f"dtau must be positive, got {dtau}")
    n_steps = max(1, round(tau_span / dtau))

    def deriv(tau: float, dp: float, dq: float, x: float):
        r = rates(tau, x).r_net
        inv = 1.0 / tau
        return ((r + inv) * dp, (-r + inv) * dq, (dp - dq) * 0.5 * inv)

    taus = np.empty(n_steps + 1)
    dps = np.empty(n_steps + 1)
    dqs = np.empty(n_steps + 1)
    xs = np.empty(n_steps + 1)
    rs = np.empty(n_steps + 1)

    dp, dq, x = initial.dp, initial.dq, x0
    for i in range(n_steps + 1):
        tau = tau0 + i * dtau
        taus[i], dps[i], dqs[i], xs[i] = tau, dp, dq, x
        rs[i] = rates(tau, x).r_net
        if i == n_steps:
            break
        h = dtau
        k1 = deriv(tau, dp, dq, x)
        k2 = deriv(tau + h / 2, dp + h / 2 * k1[0], dq + h / 2 * k1[1], x + h / 2 * k1[2])
        k3 = deriv(tau + h / 2, dp + h / 2 * k2[0], dq + h / 2 * k2[1], x + h / 2 * k2[2])
        k4 = deriv(tau + h, dp + h * k3[0], dq + h * k3[1], x + h * k3[2])
        dp += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        dq += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        x += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])

    beta = (dps - dqs) / (dps + dqs)
    gamma = (dps + dqs) / (2.0 * np.sqrt(dps * dqs))
    force_arr = mass * gamma * rs
    return Trajectory(
        tau=taus,
        dp=dps,
        dq=dqs,
        x=xs,
        beta=beta,
        gamma=gamma,
        momentum=mass * gamma * beta,
        energy=mass * gamma,
        force=force_arr,
        power=force_arr * beta,
        mass=mass,
        dtau=dtau,
    )

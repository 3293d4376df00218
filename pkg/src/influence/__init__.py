"""Discrete causal-influence simulator.

Builds partially ordered sets of influence events, quantifies them with
coordinated observer chains to recover emergent spacetime and kinematics, and
verifies by simulation that a walker receiving influence at a constant rate
moves exactly like a relativistically accelerated particle.
"""

__version__ = "0.1.0"

from .dynamics import (
    AnalyticAccel,
    DynamicState,
    InfluenceRates,
    Trajectory,
    analytic_beta,
    constant_rates,
    dynamic_state,
    evolve_ode,
    force,
    influence_rate,
    power,
    receive_left,
    receive_right,
)
from .errors import (
    ConfigError,
    CoordinationError,
    CycleError,
    DegenerateWalkError,
    DomainError,
    InfluenceError,
    ProjectionIncompleteError,
    ResolutionError,
    SingularTimeError,
    UnknownEventError,
)
from .kinematics import (
    EmergentState,
    FrameRelation,
    StepStats,
    emergent_state,
    gamma_of_beta,
    lorentz_boost,
    step_stats,
    transform_interval,
)
from .poset import Chain, ChainInterval, EventId, Poset, PosetBuilder, from_text, read_text
from .quantify import (
    CoordinatedPair,
    IntervalQuant,
    check_coordination,
    distance,
    quantify_generalized,
    quantify_interval,
    quantify_length,
)
from .simulation import (
    MeasuredTrajectory,
    ScenarioConfig,
    ZitterPath,
    build_poset,
    coarse_grain,
    derive_rng,
    oracle_backward_project,
    oracle_leq,
    oracle_project,
    random_poset,
    read_scenario_config,
    realized_receipt_rates,
    simulate,
    simulate_accelerated,
    simulate_free,
    write_scenario_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]

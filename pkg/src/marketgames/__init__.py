"""Repeated market games with social-weight dynamics and inverse inference.

Two stage games -- a proportional-allocation bidding market and a linear
quantity-setting market -- played over a finite horizon by agents whose
objective adds trust-weighted opponent payoffs and a stability penalty to
the private payoff.  The package simulates matches, persists trajectory
logs, and recovers the social weights and their update-law constants from
the logs alone.
"""

from .agents import (
    AGGREGATE,
    OPEN,
    Agent,
    DynamicsConstants,
    MyopicAgent,
    Observation,
    ScriptedAgent,
    SignalPair,
    SocialSnapshot,
    SocialState,
    SyntheticSocialAgent,
    compute_signals,
    cost_of_parity,
    mirror_nash_action,
    mirror_parity_action,
    update_gamma,
    update_theta,
)
from .engine import (
    MatchAbortError,
    MatchConfig,
    Perturbation,
    RoundRecord,
    TrajectoryLog,
    build_observation,
    run_match,
)
from .games import (
    COURNOT,
    KELLY,
    DegenerateMarketError,
    GameSpec,
    MarketOutcome,
    cross_gradient,
    generalized_gradient,
    generalized_payoff,
    market_outcome,
    mirrored_cross_gradient,
    mirrored_payoff_estimate,
    own_gradient,
    payoff,
    payoffs,
    welfare,
)
from .inference import (
    ExtractionResult,
    FitResult,
    WindowEstimate,
    cost_of_parity_series,
    extract_round,
    extract_trajectory,
    extract_window,
    extraction_to_csv,
    fit_dynamics,
)
from .protocol import (
    PROTOCOL_VERSION,
    ExternalProcessAgent,
    ProtocolViolation,
    build_request,
    build_response,
    parse_request,
    parse_response,
)
from .scenarios import SCENARIOS, CheckResult, ScenarioResult, run_scenario
from .solvers import (
    BracketError,
    ConvergenceError,
    ParetoSample,
    SolverConfig,
    best_response,
    generalized_best_response,
    nash_equilibrium,
    pareto_sample,
    social_optimum,
)

__version__ = "0.1.0"

"""Synthetic market agents with dynamic trust and stability weights.

The social stage objective ``G_i`` weighs opponent payoffs by a trust weight
``theta_i`` and penalizes action disparity by a stability weight ``gamma_i``.
This module provides:

* the observation record agents act on (never the current round, never
  private opponent parameters);
* the deviation/accommodation signal pair measured against a cooperative
  expectation, and the update laws

      theta' = max(eps, I) * (tau / T) * exp(-lambda * E)
      gamma' = 1[cost_of_parity <= omega_max] * 1[tau > 0]
                 * max(0, rho * gamma + E - alpha * A)

  with ``I`` the information indicator (1 open, 0 aggregate-only) and
  ``tau = T - t`` the remaining horizon;
* three agent behaviors: a myopic best responder, a scripted agent, and the
  synthetic social agent.

The synthetic agent has two policies.  ``"model"`` applies the update laws
verbatim each round.  ``"protocol"`` (default) plays the reciprocal
concession protocol observed in open-information runs -- signal a concession,
deepen it, match the opponent's demonstrated level, revert to the Nash action
while a betrayal persists, forgive on correction, and defect in the endgame.
Either way every action is a generalized best response at the ``(theta,
gamma)`` the agent records for that round, so the weights can be recovered
from the trajectory afterwards.

Agents are deliberately stateless between calls: each action is recomputed
by folding the observation, so an externally forced (perturbed) action feeds
back into later behavior exactly as the market recorded it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .games import (
    COURNOT,
    GameSpec,
    own_gradient,
    mirrored_cross_gradient,
    payoff,
)
from .solvers import best_response, generalized_best_response, nash_equilibrium

OPEN = "open"
AGGREGATE = "aggregate"

TRUST = "trust"
PUNISHMENT = "punishment"


# --------------------------------------------------------------------------
# Records exchanged with the engine
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Observation:
    """Everything agent ``i`` may see when choosing its round-``t`` action.

    All sequences cover completed rounds ``1..t-1`` only.  Under
    ``aggregate`` observability the per-opponent breakdown and the opponent
    count are withheld; only the opponent total survives.
    """

    round: int
    horizon: int
    mode: str
    own_index: int
    own_actions: tuple[float, ...]
    own_payoffs: tuple[float, ...]
    opponent_totals: tuple[float, ...]
    prices: tuple[float, ...]
    opponent_actions: Optional[tuple[tuple[float, ...], ...]] = None
    n_agents: Optional[int] = None

    def __post_init__(self) -> None:
        if self.mode not in (OPEN, AGGREGATE):
            raise ValueError(f"unknown observability mode {self.mode!r}")
        if not (1 <= self.round <= self.horizon):
            raise ValueError("round must lie in 1..horizon")
        past = self.round - 1
        for name in ("own_actions", "own_payoffs", "opponent_totals", "prices"):
            if len(getattr(self, name)) != past:
                raise ValueError(f"{name} must cover exactly rounds 1..{past}")
        if self.mode == AGGREGATE:
            if self.opponent_actions is not None or self.n_agents is not None:
                raise ValueError(
                    "aggregate-only observations must not reveal opponents"
                )
        else:
            if self.opponent_actions is None or len(self.opponent_actions) != past:
                raise ValueError("open observations need per-round opponent actions")


@dataclass(frozen=True)
class SignalPair:
    """Mutually exclusive deviation/accommodation signals.

    ``deviation`` (E) is how far the latest opponent total sits above the
    cooperative expectation; ``accommodation`` (A) how far below.
    """

    deviation: float
    accommodation: float


def compute_signals(observation: Observation, coop_reference: float) -> SignalPair:
    """Signals of the latest completed round against a cooperative reference.

    ``coop_reference`` is expressed in opponent-total units, so the same
    formula serves open and aggregate-only observability.
    """
    if not observation.opponent_totals:
        raise ValueError("signals need at least one completed round")
    observed = observation.opponent_totals[-1]
    return SignalPair(
        deviation=max(0.0, observed - coop_reference),
        accommodation=max(0.0, coop_reference - observed),
    )


# --------------------------------------------------------------------------
# Dynamics constants and state
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicsConstants:
    """Constants of the trust/stability update laws."""

    epsilon: float = 0.05        # residual trust under aggregate-only info
    decay: float = 2.0           # lambda: deviation penalty rate
    retention: float = 0.9       # rho: stability memory
    forgiveness: float = 0.5     # alpha: accommodation discount
    omega_max: float = 6.25      # parity-cost tolerance
    deviation_gain: float = 1.0  # fixed gain on E in the gamma law

    def __post_init__(self) -> None:
        positive = ("epsilon", "decay", "retention", "forgiveness",
                    "omega_max", "deviation_gain")
        for name in positive:
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.retention >= 1.0:
            raise ValueError("retention (rho) must be < 1")
        if self.epsilon >= 1.0:
            raise ValueError("epsilon must be < 1")

    @classmethod
    def for_game(cls, spec: GameSpec, omega_multiplier: float = 0.25,
                 **overrides) -> "DynamicsConstants":
        """Defaults with ``omega_max`` scaled to the game's Nash payoffs."""
        nash = nash_equilibrium(spec)
        pay = [abs(payoff(spec, i, nash)) for i in range(spec.n_agents)]
        omega = omega_multiplier * float(np.mean(pay))
        return cls(omega_max=omega, **overrides)


@dataclass(frozen=True)
class SocialState:
    """Trust/stability state in force for one agent at one round."""

    theta: float
    gamma: float
    round: int
    horizon: int
    observability: str = OPEN
    coop_reference: float = 0.0   # opponent-total units

    def __post_init__(self) -> None:
        if not (0.0 <= self.theta <= 1.0):
            raise ValueError("theta must lie in [0, 1]")
        if self.gamma < 0.0:
            raise ValueError("gamma must be non-negative")
        if not (1 <= self.round <= self.horizon):
            raise ValueError("round must lie in 1..horizon")
        if self.observability not in (OPEN, AGGREGATE):
            raise ValueError(f"unknown observability {self.observability!r}")

    @property
    def tau(self) -> int:
        """Remaining horizon after the current round."""
        return self.horizon - self.round


def update_theta(state: SocialState, signals: SignalPair,
                 constants: DynamicsConstants) -> float:
    """Next trust weight: information cap, horizon discount, deviation decay."""
    info = 1.0 if state.observability == OPEN else 0.0
    horizon_factor = state.tau / state.horizon
    return (max(constants.epsilon, info) * horizon_factor
            * math.exp(-constants.decay * signals.deviation))


def update_gamma(state: SocialState, signals: SignalPair,
                 constants: DynamicsConstants, parity_cost: float) -> float:
    """Next stability weight; zero when parity is unaffordable or at the end."""
    if parity_cost > constants.omega_max or state.tau <= 0:
        return 0.0
    return max(0.0, constants.retention * state.gamma
               + constants.deviation_gain * signals.deviation
               - constants.forgiveness * signals.accommodation)


def cost_of_parity(spec: GameSpec, i: int, opponents: Sequence[float]) -> float:
    """Payoff forgone by matching the mean opponent action instead of the BR."""
    opp = [float(w) for w in opponents]
    parity = float(np.mean(opp))
    br = best_response(spec, i, opp)
    profile_br = list(opp)
    profile_br.insert(i, br)
    profile_par = list(opp)
    profile_par.insert(i, parity)
    return payoff(spec, i, profile_br) - payoff(spec, i, profile_par)


# --------------------------------------------------------------------------
# Mirrored anchors (computed from the agent's own parameter only)
# --------------------------------------------------------------------------

def mirror_nash_action(spec: GameSpec, i: int) -> float:
    """Nash action of the symmetric game the agent imagines (all params = own)."""
    n = spec.n_agents
    v = spec.valuations[i]
    if spec.kind == COURNOT:
        return v / (n + 1)
    return v * spec.capacity * (n - 1) / n**2


def mirror_parity_action(spec: GameSpec, i: int, bid_floor: float = 1e-3) -> float:
    """Per-agent cooperative action under the symmetry assumption.

    Cournot: the symmetric welfare optimum ``b_i / (2N)``.  Kelly welfare
    falls with the total bid, so the cooperative anchor is the bid floor.
    """
    if spec.kind == COURNOT:
        return spec.valuations[i] / (2 * spec.n_agents)
    return bid_floor


# --------------------------------------------------------------------------
# Agents
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SocialSnapshot:
    """(theta, gamma) in force for one recorded action, with its regime."""

    theta: float
    gamma: float
    regime: str


class Agent:
    """Round-by-round action source; see subclasses."""

    def act(self, spec: GameSpec, i: int, observation: Observation) -> float:
        raise NotImplementedError

    def social_snapshot(self) -> Optional[SocialSnapshot]:
        """Weights used for the most recent action, if the agent has any."""
        return None


def _effective_view(spec: GameSpec, i: int, observation: Observation):
    """Reduce the game to what the agent can respond to.

    Open information: the true spec and the opponents' latest individual
    actions.  Aggregate-only: a mirrored two-agent view in which the whole
    rest of the market is one pseudo-opponent holding the observed total.
    """
    if observation.mode == OPEN:
        opp = list(observation.opponent_actions[-1]) if observation.opponent_actions else None
        return spec, i, opp
    pseudo = GameSpec(spec.kind, (spec.valuations[i], spec.valuations[i]),
                      spec.capacity)
    opp = [observation.opponent_totals[-1]] if observation.opponent_totals else None
    return pseudo, 0, opp


class MyopicAgent(Agent):
    """Best response to the latest observed opponents; Nash action first."""

    def act(self, spec: GameSpec, i: int, observation: Observation) -> float:
        eff_spec, eff_i, opp = _effective_view(spec, i, observation)
        if opp is None:
            return mirror_nash_action(spec, i)
        return best_response(eff_spec, eff_i, opp)

    def social_snapshot(self) -> Optional[SocialSnapshot]:
        return SocialSnapshot(0.0, 0.0, TRUST)


class ScriptedAgent(Agent):
    """Plays a fixed per-round script, delegating unlisted rounds."""

    def __init__(self, script: dict[int, float], fallback: Optional[Agent] = None):
        self.script = {int(r): float(a) for r, a in script.items()}
        self.fallback = fallback if fallback is not None else MyopicAgent()

    def act(self, spec: GameSpec, i: int, observation: Observation) -> float:
        if observation.round in self.script:
            return self.script[observation.round]
        return self.fallback.act(spec, i, observation)

    def social_snapshot(self) -> Optional[SocialSnapshot]:
        # Scripted rounds have no interpretable weights.
        return None


class SyntheticSocialAgent(Agent):
    """Trust/stability-driven agent; see the module docstring for policies.

    Args:
        policy: ``"protocol"`` (reciprocal concession) or ``"model"``
            (verbatim update laws).
        role: ``"initiator"`` concedes first, ``"reciprocator"`` matches
            demonstrated concessions; ``"auto"`` makes agent 0 the initiator.
        constants: dynamics constants; derived from the game when omitted.
        signal_fraction: share of the Nash-to-cooperative gap covered by the
            initiator's first concession.
        endgame_trust: trust ceiling per remaining horizon ``tau`` for the
            final rounds (default ``{1: 0.6}``; ``tau = 0`` always forces 0).
        coop_target / bid_floor: override the cooperative anchor.
    """

    def __init__(self, policy: str = "protocol", role: str = "auto",
                 constants: Optional[DynamicsConstants] = None,
                 signal_fraction: float = 0.8,
                 endgame_trust: Optional[dict[int, float]] = None,
                 coop_target: Optional[float] = None,
                 bid_floor: float = 1e-3,
                 detector_slack: float = 0.05):
        if policy not in ("protocol", "model"):
            raise ValueError(f"unknown policy {policy!r}")
        if role not in ("auto", "initiator", "reciprocator"):
            raise ValueError(f"unknown role {role!r}")
        if not (0.0 < signal_fraction <= 1.0):
            raise ValueError("signal_fraction must lie in (0, 1]")
        self.policy = policy
        self.role = role
        self.constants = constants
        self.signal_fraction = signal_fraction
        self.endgame_trust = {1: 0.6} if endgame_trust is None else dict(endgame_trust)
        self.coop_target = coop_target
        self.bid_floor = bid_floor
        self.detector_slack = detector_slack
        self._snapshot: Optional[SocialSnapshot] = None

    # -- plumbing ----------------------------------------------------------

    def social_snapshot(self) -> Optional[SocialSnapshot]:
        return self._snapshot

    def _constants_for(self, spec: GameSpec) -> DynamicsConstants:
        if self.constants is None:
            self.constants = DynamicsConstants.for_game(spec)
        return self.constants

    def _anchors(self, spec: GameSpec, i: int) -> tuple[float, float]:
        nash_own = mirror_nash_action(spec, i)
        target = (self.coop_target if self.coop_target is not None
                  else mirror_parity_action(spec, i, self.bid_floor))
        return nash_own, min(target, nash_own)

    def _record(self, eff_spec: GameSpec, eff_i: int, action: float,
                opponents: Optional[Sequence[float]],
                default: tuple[float, float, str] = (0.0, 0.0, TRUST)) -> None:
        """Derive and store the (theta, gamma) the action realizes.

        The weights are read off the stationarity condition against the
        opponents the agent responded to, preferring the trust regime; this
        is exactly the computation inverse inference performs later.
        """
        if opponents is None:
            self._snapshot = SocialSnapshot(*default)
            return
        profile = [float(w) for w in opponents]
        profile.insert(eff_i, float(action))
        try:
            own = own_gradient(eff_spec, eff_i, profile)
            cross = sum(
                mirrored_cross_gradient(eff_spec, eff_i, j, profile)
                for j in range(eff_spec.n_agents) if j != eff_i
            )
        except (ValueError, ZeroDivisionError):
            self._snapshot = SocialSnapshot(*default)
            return
        spread = sum(float(action) - w for w in opponents)
        tol = 1e-9
        if cross != 0.0:
            theta = own / (-cross)
            if -tol <= theta <= 1.0 + tol:
                self._snapshot = SocialSnapshot(min(1.0, max(0.0, theta)), 0.0, TRUST)
                return
        if abs(spread) > tol:
            gamma = own / spread
            if gamma >= -tol:
                self._snapshot = SocialSnapshot(0.0, max(0.0, gamma), PUNISHMENT)
                return
        self._snapshot = SocialSnapshot(*default)

    # -- entry point -------------------------------------------------------

    def act(self, spec: GameSpec, i: int, observation: Observation) -> float:
        constants = self._constants_for(spec)
        eff_spec, eff_i, opp = _effective_view(spec, i, observation)
        nash_own, target = self._anchors(spec, i)

        if observation.round == 1 or opp is None:
            action = nash_own
            self._snapshot = SocialSnapshot(0.0, 0.0, TRUST)
            return action

        tau = observation.horizon - observation.round
        if tau == 0:
            action = best_response(eff_spec, eff_i, opp)
            self._record(eff_spec, eff_i, action, opp)
            return action

        if self.policy == "model" or observation.mode == AGGREGATE:
            theta, gamma = self._fold_model(eff_spec, eff_i, observation, constants)
            if gamma > 0.0:
                action = generalized_best_response(eff_spec, eff_i, opp, 0.0, gamma)
                self._snapshot = SocialSnapshot(0.0, gamma, PUNISHMENT)
            else:
                action = generalized_best_response(eff_spec, eff_i, opp, theta, 0.0)
                self._snapshot = SocialSnapshot(theta, 0.0, TRUST)
            return action

        action = self._protocol_action(eff_spec, eff_i, observation, constants,
                                       nash_own, target, opp, tau)
        self._record(eff_spec, eff_i, action, opp)
        return action

    # -- verbatim update laws ---------------------------------------------

    def _fold_model(self, eff_spec: GameSpec, eff_i: int,
                    observation: Observation,
                    constants: DynamicsConstants) -> tuple[float, float]:
        """Fold the update laws over the observed history."""
        n_opp = eff_spec.n_agents - 1
        _, target = self._anchors(eff_spec, eff_i)
        reference = n_opp * target
        gamma = 0.0
        theta = 0.0
        totals = observation.opponent_totals
        per_round = (observation.opponent_actions
                     if observation.mode == OPEN else
                     tuple((w,) for w in totals))
        for idx, total in enumerate(totals):
            rnd = idx + 2  # action round the update applies to
            if rnd > observation.round:
                break
            state = SocialState(theta=0.0, gamma=gamma, round=min(rnd, observation.horizon),
                                horizon=observation.horizon,
                                observability=observation.mode,
                                coop_reference=reference)
            partial = replace(observation, round=rnd,
                              own_actions=observation.own_actions[:idx + 1],
                              own_payoffs=observation.own_payoffs[:idx + 1],
                              opponent_totals=totals[:idx + 1],
                              prices=observation.prices[:idx + 1],
                              opponent_actions=(observation.opponent_actions[:idx + 1]
                                                if observation.mode == OPEN else None))
            signals = compute_signals(partial, reference)
            parity = cost_of_parity(eff_spec, eff_i, per_round[idx])
            theta = update_theta(state, signals, constants)
            gamma = update_gamma(state, signals, constants, parity)
        return theta, gamma

    # -- reciprocal concession protocol -----------------------------------

    def _protocol_action(self, eff_spec: GameSpec, eff_i: int,
                         observation: Observation,
                         constants: DynamicsConstants,
                         nash_own: float, target: float,
                         opp: Sequence[float], tau: int) -> float:
        s = observation.round
        n_opp = eff_spec.n_agents - 1
        means = [w / n_opp for w in observation.opponent_totals]
        mine = list(observation.own_actions)
        initiator = (self.role == "initiator"
                     or (self.role == "auto" and observation.own_index == 0))
        tol = 1e-9 + 1e-6 * nash_own
        slack = self.detector_slack * nash_own + 1e-9

        # Established cooperative level: the best the opponents have shown,
        # floored at the own cooperative anchor.  Mirroring can settle above
        # the own mirrored Nash action; fairness beats the private optimum
        # while the parity cost stays tolerable.
        def reference(upto: int) -> float:
            window = means[:upto]
            level = min(window) if window else means[0]
            return max(target, level)

        # Has the opponent ever signaled cooperation (a material descent
        # from its opening level, or opening at the cooperative anchor)?
        signaled = bool(means) and (min(means) < means[0] - slack
                                    or min(means) <= target + tol)

        ref = reference(s - 2)
        latest = means[s - 2]

        # Parity viability, latched: once matching the opponents has ever
        # been too dear, cooperation is off for the rest of the match.
        # Pricing uses the opponents' demonstrated level; a dip below the
        # established norm is an accommodation, not a settlement level.
        for r in range(2, s + 1):
            level_ref = reference(r - 2)
            level_latest = means[r - 2]
            gate_level = (level_latest if level_latest >= level_ref - tol
                          else level_ref)
            if cost_of_parity(eff_spec, eff_i,
                              [gate_level] * n_opp) > constants.omega_max:
                return best_response(eff_spec, eff_i, opp)

        # No-reciprocation detector: a partner that, by the time a response
        # is due (round 4 onward, allowing for reaction lags), has neither
        # descended from its own opening level nor matched mine is not
        # mirroring -- the symmetry assumption is dead for good.
        for t in range(4, s + 1):
            if reference(t - 1) <= target + tol:
                break  # cooperation reached; deviation handling takes over
            window = means[:t - 1]
            descended = min(window) < window[0] - slack
            matched_me = window[-1] <= max(mine[t - 3], target) + slack
            opened_low = window[0] <= target + tol
            if not (descended or matched_me or opened_low):
                return best_response(eff_spec, eff_i, opp)
        deviation = max(0.0, latest - ref)
        if deviation > tol:
            provoked = len(mine) >= 2 and mine[-2] > ref + tol
            if not provoked:
                return nash_own          # tit-for-tat reversion
            return ref                   # own fault: return to the norm
        was_punishing = (len(mine) >= 2 and mine[-1] >= nash_own - tol
                         and ref < nash_own - tol)
        if was_punishing:
            return ref                   # opponent complied again: forgive

        # Endgame taper, once a cooperative norm actually exists.
        established = ref <= target + tol or (signaled and abs(latest - ref) <= tol)
        ceiling = self.endgame_trust.get(tau)
        if ceiling is not None and established:
            theta = max(0.0, min(1.0, ceiling))
            return generalized_best_response(eff_spec, eff_i, opp, theta, 0.0)

        if initiator:
            if s == 2:
                return nash_own - self.signal_fraction * (nash_own - target)
            return target
        # Reciprocator: mirror the best level the opponent has demonstrated.
        return reference(s - 1) if signaled else nash_own

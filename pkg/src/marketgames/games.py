"""Stage payoffs and gradients for the two repeated market games.

Two mechanisms share one interface:

* ``kelly`` -- proportional allocation of a fixed capacity ``C``.  Agent ``i``
  bids ``x_i >= 0``, receives ``d_i = C * x_i / X`` where ``X = sum(x)``, pays
  its bid, and values the allocation linearly:  ``pi_i = V_i * d_i - x_i``.
  The clearing price is ``X / C`` per unit of capacity.
* ``cournot`` -- linear quantity competition.  Agent ``i`` supplies ``x_i``
  and earns ``pi_i = b_i * x_i - x_i * X``.

On top of the private payoff sits a social stage objective

    G_i = pi_i + theta_i * sum_{j != i} pihat_ij
              - (gamma_i / 2) * sum_{j != i} (x_i - x_j)^2

where ``pihat_ij`` estimates opponent j's payoff by *mirroring*: agent i
substitutes its own private parameter (``b_i`` or ``V_i``) for j's unknown
one.  Actions are public (or aggregated); parameters are never shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

KELLY = "kelly"
COURNOT = "cournot"


class DegenerateMarketError(ValueError):
    """Raised when a Kelly market clears at zero total bids."""


@dataclass(frozen=True)
class GameSpec:
    """Immutable description of one stage game.

    Attributes:
        kind: ``"kelly"`` or ``"cournot"``.
        valuations: per-agent private parameter -- marginal valuation ``V_i``
            for Kelly, demand slope ``b_i`` for Cournot.
        capacity: divisible capacity ``C`` (Kelly only; ignored for Cournot).
    """

    kind: str
    valuations: tuple[float, ...]
    capacity: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (KELLY, COURNOT):
            raise ValueError(f"unknown game kind {self.kind!r}")
        vals = tuple(float(v) for v in self.valuations)
        if len(vals) < 2:
            raise ValueError("a market needs at least two agents")
        if not all(np.isfinite(v) and v > 0 for v in vals):
            raise ValueError("valuations must be positive and finite")
        if self.kind == KELLY and not (np.isfinite(self.capacity) and self.capacity > 0):
            raise ValueError("kelly capacity must be positive and finite")
        object.__setattr__(self, "valuations", vals)
        object.__setattr__(self, "capacity", float(self.capacity))

    @property
    def n_agents(self) -> int:
        return len(self.valuations)


@dataclass(frozen=True)
class MarketOutcome:
    """Cleared market state for one action profile."""

    total: float
    price: float
    allocations: tuple[float, ...]
    payoffs: tuple[float, ...]


def _as_actions(spec: GameSpec, actions: Sequence[float]) -> np.ndarray:
    x = np.asarray(actions, dtype=float)
    if x.shape != (spec.n_agents,):
        raise ValueError(
            f"expected {spec.n_agents} actions, got shape {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ValueError("actions must be finite")
    if np.any(x < 0):
        raise ValueError("actions must be non-negative")
    return x


def payoffs(spec: GameSpec, actions: Sequence[float]) -> np.ndarray:
    """Vector of private stage payoffs for the full profile."""
    x = _as_actions(spec, actions)
    total = float(x.sum())
    v = np.asarray(spec.valuations)
    if spec.kind == KELLY:
        if total <= 0.0:
            raise DegenerateMarketError("kelly market is degenerate at X = 0")
        shares = x * (spec.capacity / total)
        return v * shares - x
    return v * x - x * total


def payoff(spec: GameSpec, i: int, actions: Sequence[float]) -> float:
    """Private stage payoff of agent ``i``."""
    return float(payoffs(spec, actions)[i])


def welfare(spec: GameSpec, actions: Sequence[float]) -> float:
    """Total realized payoff (social welfare) of the profile."""
    return float(payoffs(spec, actions).sum())


def market_outcome(spec: GameSpec, actions: Sequence[float]) -> MarketOutcome:
    """Clear the market: total action, price, allocations, payoffs."""
    x = _as_actions(spec, actions)
    total = float(x.sum())
    pi = payoffs(spec, actions)
    if spec.kind == KELLY:
        price = total / spec.capacity
        alloc = tuple(float(a) for a in x * (spec.capacity / total))
    else:
        # Linear Cournot clears at p = sum(x); supply is allocated as bid.
        price = total
        alloc = tuple(float(a) for a in x)
    return MarketOutcome(total=total, price=price, allocations=alloc,
                         payoffs=tuple(float(p) for p in pi))


# --------------------------------------------------------------------------
# Analytic gradients
# --------------------------------------------------------------------------

def own_gradient(spec: GameSpec, i: int, actions: Sequence[float]) -> float:
    """``d pi_i / d x_i`` at the profile."""
    x = _as_actions(spec, actions)
    total = float(x.sum())
    v = spec.valuations[i]
    if spec.kind == KELLY:
        if total <= 0.0:
            raise DegenerateMarketError("kelly gradient undefined at X = 0")
        rest = total - x[i]
        return float(v * spec.capacity * rest / total**2 - 1.0)
    rest = total - x[i]
    return float(v - 2.0 * x[i] - rest)


def cross_gradient(spec: GameSpec, i: int, j: int, actions: Sequence[float]) -> float:
    """``d pi_j / d x_i`` for ``j != i`` (true parameters)."""
    return _cross(spec, i, j, actions, spec.valuations[j])


def mirrored_cross_gradient(spec: GameSpec, i: int, j: int,
                            actions: Sequence[float]) -> float:
    """``d pihat_ij / d x_i``: cross gradient with ``j``'s parameter mirrored.

    Agent ``i`` cannot observe ``V_j``/``b_j`` and substitutes its own value.
    For Cournot the cross gradient does not involve ``b_j`` so mirroring is a
    no-op; for Kelly it rescales by ``V_i / V_j``.
    """
    return _cross(spec, i, j, actions, spec.valuations[i])


def _cross(spec: GameSpec, i: int, j: int, actions: Sequence[float],
           valuation_j: float) -> float:
    if i == j:
        raise ValueError("cross gradient requires two distinct agents")
    x = _as_actions(spec, actions)
    total = float(x.sum())
    if spec.kind == KELLY:
        if total <= 0.0:
            raise DegenerateMarketError("kelly gradient undefined at X = 0")
        return float(-valuation_j * spec.capacity * x[j] / total**2)
    return float(-x[j])


def mirrored_payoff_estimate(spec: GameSpec, i: int, j: int,
                             actions: Sequence[float]) -> float:
    """Agent ``i``'s estimate of ``pi_j`` with ``j``'s parameter mirrored."""
    if i == j:
        raise ValueError("mirroring requires two distinct agents")
    x = _as_actions(spec, actions)
    total = float(x.sum())
    v = spec.valuations[i]
    if spec.kind == KELLY:
        if total <= 0.0:
            raise DegenerateMarketError("kelly market is degenerate at X = 0")
        return float(v * spec.capacity * x[j] / total - x[j])
    return float(v * x[j] - x[j] * total)


# --------------------------------------------------------------------------
# Social stage objective
# --------------------------------------------------------------------------

def generalized_payoff(spec: GameSpec, i: int, actions: Sequence[float],
                       theta: float, gamma: float) -> float:
    """Social stage objective ``G_i`` (private + mirrored altruism - disparity).

    Reduces bit-for-bit to ``payoff`` at ``theta = gamma = 0``.
    """
    x = _as_actions(spec, actions)
    base = payoff(spec, i, actions)
    others = [j for j in range(spec.n_agents) if j != i]
    altruism = sum(mirrored_payoff_estimate(spec, i, j, actions) for j in others)
    disparity = sum((x[i] - x[j]) ** 2 for j in others)
    return float(base + theta * altruism - 0.5 * gamma * disparity)


def generalized_gradient(spec: GameSpec, i: int, actions: Sequence[float],
                         theta: float, gamma: float) -> float:
    """``d G_i / d x_i``: the stationarity residual of the social objective.

    An interior social best response satisfies
    ``own_gradient + theta * sum_j mirrored_cross - gamma * sum_j (x_i - x_j) = 0``.
    """
    x = _as_actions(spec, actions)
    others = [j for j in range(spec.n_agents) if j != i]
    cross = sum(mirrored_cross_gradient(spec, i, j, actions) for j in others)
    spread = sum(x[i] - x[j] for j in others)
    return float(own_gradient(spec, i, actions) + theta * cross - gamma * spread)

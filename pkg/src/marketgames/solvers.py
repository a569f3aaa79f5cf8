"""Equilibrium, optimum, and response solvers for the market games.

Contents
--------
* ``best_response`` -- private payoff maximizer against fixed opponents
  (closed form for both games).
* ``nash_equilibrium`` -- closed form where available (Cournot interior),
  damped best-response iteration otherwise.
* ``social_optimum`` -- welfare-maximizing profile (Cournot closed form;
  Kelly optimum sits at the bid floor).
* ``generalized_best_response`` -- maximizer of the social objective ``G_i``
  at given ``(theta, gamma)``: closed form for Cournot, monotone bisection
  on the stationarity residual for Kelly.
* ``pareto_sample`` -- payoff-space grid sweep with its non-dominated front.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .games import (
    COURNOT,
    KELLY,
    GameSpec,
    generalized_gradient,
    payoffs,
    welfare,
)


class ConvergenceError(RuntimeError):
    """Iterative solver failed to reach tolerance within the budget."""


class BracketError(RuntimeError):
    """Root bracket does not contain a sign change."""


@dataclass(frozen=True)
class SolverConfig:
    """Shared numeric knobs for the iterative solvers."""

    tol: float = 1e-12
    max_iter: int = 20_000
    damping: float = 0.5
    bracket_upper: Optional[float] = None

    def __post_init__(self) -> None:
        if not (0.0 < self.damping <= 1.0):
            raise ValueError("damping must lie in (0, 1]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter >= 1")


DEFAULT_CONFIG = SolverConfig()


def _opponent_sum(spec: GameSpec, opponents: Sequence[float]) -> float:
    w = np.asarray(opponents, dtype=float)
    if w.shape != (spec.n_agents - 1,):
        raise ValueError(
            f"expected {spec.n_agents - 1} opponent actions, got shape {w.shape}"
        )
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("opponent actions must be non-negative and finite")
    return float(w.sum())


def _insert(i: int, own: float, opponents: Sequence[float]) -> np.ndarray:
    profile = list(map(float, opponents))
    profile.insert(i, float(own))
    return np.asarray(profile)


def best_response(spec: GameSpec, i: int, opponents: Sequence[float]) -> float:
    """Payoff-maximizing action of agent ``i`` against fixed opponents.

    Cournot: ``max(0, (b_i - W) / 2)``.  Kelly: ``max(0, sqrt(V_i C W) - W)``
    where ``W`` is the opponent total.  A Kelly market with ``W = 0`` has no
    interior maximizer (payoff decreases in the own bid), so the infimum 0 is
    returned and the engine's bid floor applies.
    """
    w = _opponent_sum(spec, opponents)
    v = spec.valuations[i]
    if spec.kind == COURNOT:
        return max(0.0, (v - w) / 2.0)
    if w == 0.0:
        return 0.0
    return max(0.0, float(np.sqrt(v * spec.capacity * w)) - w)


def nash_equilibrium(spec: GameSpec,
                     config: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Static Nash profile of the private-payoff game.

    Interior Cournot has the closed form ``x_i = b_i - sum(b) / (N + 1)``;
    corner cases and Kelly fall back to damped simultaneous best-response
    iteration, which is a contraction for these payoffs.
    """
    n = spec.n_agents
    if spec.kind == COURNOT:
        b = np.asarray(spec.valuations)
        x = b - b.sum() / (n + 1)
        if np.all(x > 0):
            return x
    return _iterate_nash(spec, config)


def _iterate_nash(spec: GameSpec, config: SolverConfig) -> np.ndarray:
    n = spec.n_agents
    v = np.asarray(spec.valuations)
    if spec.kind == KELLY:
        x = np.full(n, float(v.mean()) * spec.capacity / (n + 1))
    else:
        x = v / (n + 1)
    for _ in range(config.max_iter):
        br = np.array([
            best_response(spec, i, np.delete(x, i)) for i in range(n)
        ])
        new = (1.0 - config.damping) * x + config.damping * br
        if float(np.max(np.abs(new - x))) < config.tol:
            return new
        x = new
    raise ConvergenceError(
        f"nash iteration did not reach tol={config.tol} in {config.max_iter} steps"
    )


def social_optimum(spec: GameSpec, bid_floor: float = 1e-3) -> tuple[np.ndarray, float]:
    """Welfare-maximizing profile and its welfare.

    Cournot: total ``X* = max(b) / 2`` concentrated on the argmax-slope
    agents (ties split equally).  Kelly with linear utility wants the total
    bid as low as possible: with identical valuations every agent sits at the
    bid floor; with heterogeneous valuations the top-valuation agent bids the
    constrained interior optimum against the others' floor bids.
    """
    n = spec.n_agents
    v = np.asarray(spec.valuations)
    if spec.kind == COURNOT:
        top = np.isclose(v, v.max(), rtol=1e-12, atol=0.0)
        x = np.zeros(n)
        x[top] = (v.max() / 2.0) / top.sum()
        return x, welfare(spec, x)
    if bid_floor <= 0:
        raise ValueError("kelly social optimum requires a positive bid floor")
    x = np.full(n, float(bid_floor))
    if not np.allclose(v, v.max(), rtol=1e-12, atol=0.0):
        winner = int(np.argmax(v))
        rest = bid_floor * (n - 1)
        x[winner] = max(
            bid_floor, float(np.sqrt(v[winner] * spec.capacity * rest)) - rest
        )
    return x, welfare(spec, x)


# --------------------------------------------------------------------------
# Social best response
# --------------------------------------------------------------------------

def generalized_best_response(spec: GameSpec, i: int, opponents: Sequence[float],
                              theta: float, gamma: float,
                              config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Maximizer of the social objective ``G_i`` against fixed opponents.

    Cournot admits the closed form

        x_i = max(0, (b_i - (1 + theta) W + gamma W) / (2 + gamma (N - 1)))

    with ``W`` the opponent total.  For Kelly the stationarity residual is
    strictly decreasing in the own bid, so the unique root is bisected; when
    the residual is negative already at 0 the optimum is the lower boundary
    (e.g. full trust, where every extra unit of bid is a social loss).
    """
    if theta < 0 or gamma < 0:
        raise ValueError("theta and gamma must be non-negative")
    w = _opponent_sum(spec, opponents)
    n = spec.n_agents
    if spec.kind == COURNOT:
        num = spec.valuations[i] - (1.0 + theta) * w + gamma * w
        return max(0.0, num / (2.0 + gamma * (n - 1)))
    if w == 0.0:
        return 0.0

    def residual(x: float) -> float:
        return generalized_gradient(spec, i, _insert(i, x, opponents), theta, gamma)

    upper = config.bracket_upper
    if upper is None:
        upper = max(spec.valuations) * spec.capacity
    lo, hi = 0.0, float(upper)
    f_lo = residual(lo) if w > 0 else -1.0
    if f_lo <= 0.0:
        return 0.0
    f_hi = residual(hi)
    if f_hi > 0.0:
        raise BracketError(
            f"no sign change in [0, {hi}]: residual({hi}) = {f_hi:.3g} > 0; "
            "increase bracket_upper"
        )
    for _ in range(config.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < config.tol:
            return mid
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError("bisection stalled before reaching tolerance")


# --------------------------------------------------------------------------
# Pareto frontier sampling (two-agent figure)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParetoSample:
    """Grid sweep of a two-agent payoff space.

    ``actions`` has one row per grid point; ``front_mask`` marks the points
    not weakly dominated (with strict improvement in one coordinate) by any
    other grid point.  ``references`` carries the Nash payoff point and the
    bid-floor cooperative point for plotting.
    """

    actions: np.ndarray
    payoffs: np.ndarray
    front_mask: np.ndarray
    references: dict = field(default_factory=dict)

    @property
    def front_payoffs(self) -> np.ndarray:
        return self.payoffs[self.front_mask]

    def audit_front(self) -> int:
        """Brute-force domination check; returns the number of violations.

        A violation is a front point dominated by some grid point, or a
        non-front point dominated by nothing.  Domination is transitive, so
        every dominated point is dominated by a front member in particular;
        checking against the front keeps the audit quadratic only in the
        (small) front size.
        """
        p = self.payoffs
        front = p[self.front_mask]
        dominated = np.zeros(p.shape[0], dtype=bool)
        for q in front:
            geq = (q[0] >= p[:, 0]) & (q[1] >= p[:, 1])
            strict = (q[0] > p[:, 0]) | (q[1] > p[:, 1])
            dominated |= geq & strict
        return int(np.sum(dominated == self.front_mask))


def _non_dominated(p: np.ndarray) -> np.ndarray:
    """Boolean mask of non-dominated rows of an (n, 2) payoff array."""
    n = p.shape[0]
    order = np.lexsort((-p[:, 1], -p[:, 0]))
    p1, p2 = p[order, 0], p[order, 1]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = p1[1:] != p1[:-1]
    group_id = np.cumsum(new_group) - 1
    group_max_p2 = p2[new_group]            # p2 sorts descending within a group
    running = np.maximum.accumulate(group_max_p2)
    strict_max = np.concatenate(([-np.inf], running[:-1]))[group_id]
    dominated = (strict_max >= p2) | (group_max_p2[group_id] > p2)
    mask = np.zeros(n, dtype=bool)
    mask[order] = ~dominated
    return mask


def pareto_sample(spec: GameSpec, action_range: tuple[float, float],
                  resolution: int = 400, bid_floor: float = 1e-3) -> ParetoSample:
    """Sweep a square action grid and mark its Pareto-efficient payoffs.

    Only the two-agent figure is supported; the sweep is vectorized and the
    frontier is computed by an ``n log n`` sort-and-scan.
    """
    if spec.n_agents != 2:
        raise ValueError("pareto_sample draws a two-agent payoff plane")
    lo, hi = map(float, action_range)
    if not (0.0 <= lo < hi):
        raise ValueError("action_range must satisfy 0 <= lo < hi")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    axis = np.linspace(lo, hi, resolution)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    total = x1 + x2
    v1, v2 = spec.valuations
    if spec.kind == KELLY:
        with np.errstate(invalid="ignore", divide="ignore"):
            p1 = v1 * spec.capacity * x1 / total - x1
            p2 = v2 * spec.capacity * x2 / total - x2
        degenerate = total <= 0.0
        p1 = np.where(degenerate, -np.inf, p1)
        p2 = np.where(degenerate, -np.inf, p2)
    else:
        p1 = v1 * x1 - x1 * total
        p2 = v2 * x2 - x2 * total
    actions = np.column_stack([x1.ravel(), x2.ravel()])
    pay = np.column_stack([p1.ravel(), p2.ravel()])
    keep = np.isfinite(pay).all(axis=1)
    actions, pay = actions[keep], pay[keep]

    nash = nash_equilibrium(spec)
    # The sampled cooperative anchor sits at the grid's own lower bound for
    # bidding markets (the global anchor is the market bid floor, which may
    # lie below the sampled range).
    coop = (np.full(2, max(bid_floor, lo)) if spec.kind == KELLY
            else social_optimum(spec)[0])
    references = {
        "nash": {"actions": nash.tolist(),
                 "payoffs": payoffs(spec, nash).tolist()},
        "cooperative_floor": {"actions": coop.tolist(),
                              "payoffs": payoffs(spec, coop).tolist()},
    }
    return ParetoSample(actions=actions, payoffs=pay,
                        front_mask=_non_dominated(pay), references=references)

"""Repeated-game engine: runs matches and persists trajectory logs.

A match plays ``horizon`` simultaneous rounds of one market game.  Each
round the engine shows every agent an :class:`~marketgames.agents.Observation`
of completed rounds only, queries the agents serially, applies any forced
(perturbed) actions, clears the market, and appends a round record.

Logs serialize to JSON Lines -- a header with the full configuration echo,
one line per round, and a status footer -- using ``repr``-exact floats, so a
round trip through disk is lossless and byte-identical across re-runs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .agents import AGGREGATE, OPEN, Agent, Observation, SocialSnapshot
from .games import KELLY, GameSpec, market_outcome


class MatchAbortError(RuntimeError):
    """An agent (usually external) violated the match contract."""


@dataclass(frozen=True)
class Perturbation:
    """Forced action override applied after the agent is queried."""

    round: int
    agent: int
    action: float


@dataclass(frozen=True)
class MatchConfig:
    spec: GameSpec
    horizon: int
    mode: str = OPEN
    seed: int = 0
    bid_floor: float = 1e-3
    match_id: str = ""
    perturbations: tuple[Perturbation, ...] = ()

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.mode not in (OPEN, AGGREGATE):
            raise ValueError(f"unknown observability mode {self.mode!r}")
        if self.bid_floor <= 0.0:
            raise ValueError("bid_floor must be positive")
        object.__setattr__(self, "perturbations",
                           tuple(self.perturbations))
        for p in self.perturbations:
            if not (1 <= p.round <= self.horizon):
                raise ValueError(f"perturbation round {p.round} outside horizon")
            if not (0 <= p.agent < self.spec.n_agents):
                raise ValueError(f"perturbation agent {p.agent} out of range")
            if not np.isfinite(p.action) or p.action < 0.0:
                raise ValueError("perturbation action must be finite and >= 0")

    def to_dict(self) -> dict:
        return {
            "game": {
                "kind": self.spec.kind,
                "valuations": list(self.spec.valuations),
                "capacity": self.spec.capacity,
            },
            "horizon": self.horizon,
            "mode": self.mode,
            "seed": self.seed,
            "bid_floor": self.bid_floor,
            "match_id": self.match_id,
            "perturbations": [
                {"round": p.round, "agent": p.agent, "action": p.action}
                for p in self.perturbations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MatchConfig":
        game = data["game"]
        spec = GameSpec(game["kind"], tuple(game["valuations"]),
                        game.get("capacity", 1.0))
        return cls(
            spec=spec,
            horizon=data["horizon"],
            mode=data.get("mode", OPEN),
            seed=data.get("seed", 0),
            bid_floor=data.get("bid_floor", 1e-3),
            match_id=data.get("match_id", ""),
            perturbations=tuple(
                Perturbation(p["round"], p["agent"], p["action"])
                for p in data.get("perturbations", ())
            ),
        )


@dataclass(frozen=True)
class RoundRecord:
    round: int
    actions: tuple[float, ...]
    payoffs: tuple[float, ...]
    price: float
    perturbed: tuple[bool, ...]
    social: tuple[Optional[SocialSnapshot], ...]

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "actions": list(self.actions),
            "payoffs": list(self.payoffs),
            "price": self.price,
            "perturbed": list(self.perturbed),
            "social": [
                None if s is None else
                {"theta": s.theta, "gamma": s.gamma, "regime": s.regime}
                for s in self.social
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RoundRecord":
        return cls(
            round=data["round"],
            actions=tuple(data["actions"]),
            payoffs=tuple(data["payoffs"]),
            price=data["price"],
            perturbed=tuple(bool(b) for b in data["perturbed"]),
            social=tuple(
                None if s is None else
                SocialSnapshot(s["theta"], s["gamma"], s["regime"])
                for s in data["social"]
            ),
        )


@dataclass
class TrajectoryLog:
    """A completed (or aborted) match: config echo plus round records."""

    config: MatchConfig
    records: list[RoundRecord] = field(default_factory=list)
    status: str = "completed"
    error: Optional[str] = None

    @property
    def n_rounds(self) -> int:
        return len(self.records)

    def actions(self) -> np.ndarray:
        """Rounds x agents action matrix."""
        return np.array([r.actions for r in self.records], dtype=float)

    def payoffs(self) -> np.ndarray:
        return np.array([r.payoffs for r in self.records], dtype=float)

    def welfare_series(self) -> np.ndarray:
        return self.payoffs().sum(axis=1)

    def cumulative_payoffs(self) -> np.ndarray:
        return self.payoffs().sum(axis=0)

    # -- persistence -------------------------------------------------------

    def dumps(self) -> str:
        lines = [json.dumps({"kind": "header", "config": self.config.to_dict()})]
        for record in self.records:
            lines.append(json.dumps({"kind": "round", **record.to_dict()}))
        footer = {"kind": "status", "status": self.status}
        if self.error is not None:
            footer["error"] = self.error
        lines.append(json.dumps(footer))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "TrajectoryLog":
        header = None
        records: list[RoundRecord] = []
        status, error = "incomplete", None
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            kind = data.get("kind")
            if kind == "header":
                header = MatchConfig.from_dict(data["config"])
            elif kind == "round":
                records.append(RoundRecord.from_dict(data))
            elif kind == "status":
                status = data["status"]
                error = data.get("error")
        if header is None:
            raise ValueError("trajectory log has no header line")
        return cls(config=header, records=records, status=status, error=error)

    @classmethod
    def load(cls, path) -> "TrajectoryLog":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.loads(fh.read())

    def to_csv(self, path) -> None:
        """Flat per-agent round table (empty weight cells where unrecorded)."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "agent", "action", "payoff",
                             "theta", "gamma", "perturbed"])
            for record in self.records:
                for i in range(len(record.actions)):
                    snap = record.social[i]
                    writer.writerow([
                        record.round, i,
                        repr(record.actions[i]), repr(record.payoffs[i]),
                        "" if snap is None else repr(snap.theta),
                        "" if snap is None else repr(snap.gamma),
                        int(record.perturbed[i]),
                    ])


def build_observation(config: MatchConfig, i: int,
                      records: Sequence[RoundRecord],
                      round_index: Optional[int] = None) -> Observation:
    """Observation for agent ``i`` before acting in round ``round_index``.

    ``round_index`` defaults to the round after the last record.  Open
    observability exposes per-opponent actions and the agent count;
    aggregate-only observability exposes opponent totals alone.
    """
    rnd = (len(records) + 1) if round_index is None else round_index
    past = records[: rnd - 1]
    own_actions = tuple(r.actions[i] for r in past)
    own_payoffs = tuple(r.payoffs[i] for r in past)
    opp_totals = tuple(sum(r.actions) - r.actions[i] for r in past)
    prices = tuple(r.price for r in past)
    if config.mode == OPEN:
        opp_actions = tuple(
            tuple(a for j, a in enumerate(r.actions) if j != i) for r in past
        )
        return Observation(
            round=rnd, horizon=config.horizon, mode=OPEN, own_index=i,
            own_actions=own_actions, own_payoffs=own_payoffs,
            opponent_totals=opp_totals, prices=prices,
            opponent_actions=opp_actions, n_agents=config.spec.n_agents,
        )
    return Observation(
        round=rnd, horizon=config.horizon, mode=AGGREGATE, own_index=i,
        own_actions=own_actions, own_payoffs=own_payoffs,
        opponent_totals=opp_totals, prices=prices,
    )


def _clamp_action(spec: GameSpec, bid_floor: float, action: float) -> float:
    action = float(action)
    if not np.isfinite(action):
        raise MatchAbortError(f"non-finite action {action!r}")
    if spec.kind == KELLY:
        return max(bid_floor, action)
    return max(0.0, action)


def run_match(config: MatchConfig, agents: Sequence[Agent],
              log_path=None) -> TrajectoryLog:
    """Play a full match and return (optionally persist) its log.

    Agents are queried serially in index order.  A forced perturbation
    replaces the agent's answer after it is queried; the record flags the
    override and drops the agent's social snapshot for that round, and the
    agent simply sees the forced action in its own history afterwards.

    On :class:`MatchAbortError` the partial log is persisted with an
    ``aborted`` status before the error is re-raised.
    """
    if len(agents) != config.spec.n_agents:
        raise ValueError("need exactly one agent per market participant")
    forced = {(p.round, p.agent): p.action for p in config.perturbations}
    log = TrajectoryLog(config=config)
    try:
        for rnd in range(1, config.horizon + 1):
            actions: list[float] = []
            snaps: list[Optional[SocialSnapshot]] = []
            flags: list[bool] = []
            for i, agent in enumerate(agents):
                obs = build_observation(config, i, log.records, rnd)
                action = _clamp_action(config.spec, config.bid_floor,
                                       agent.act(config.spec, i, obs))
                snap = agent.social_snapshot()
                if (rnd, i) in forced:
                    action = _clamp_action(config.spec, config.bid_floor,
                                           forced[(rnd, i)])
                    snap = None
                    flags.append(True)
                else:
                    flags.append(False)
                actions.append(action)
                snaps.append(snap)
            outcome = market_outcome(config.spec, actions)
            log.records.append(RoundRecord(
                round=rnd,
                actions=tuple(actions),
                payoffs=tuple(float(p) for p in outcome.payoffs),
                price=float(outcome.price),
                perturbed=tuple(flags),
                social=tuple(snaps),
            ))
    except MatchAbortError as exc:
        log.status = "aborted"
        log.error = str(exc)
        if log_path is not None:
            log.save(log_path)
        raise
    log.status = "completed"
    if log_path is not None:
        log.save(log_path)
    return log

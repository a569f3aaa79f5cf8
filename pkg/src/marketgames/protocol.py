"""Newline-delimited JSON wire protocol for out-of-process agents.

One engine-side request per round, one agent-side response per request,
each a single JSON object on one line over the agent process's stdio.
Requests disclose the agent's own market parameter only -- never the
opponents'.  Any malformed, invalid, or late response aborts the match.

Request::

    {"protocol_version": "1", "match_id": "...", "agent_index": 0,
     "round": 3, "horizon": 10,
     "game": {"kind": "cournot", "valuation": 15.0, "capacity": 1.0},
     "observation": {"mode": "open", "own_actions": [...], ...}}

Response::

    {"action": 3.75, "rationale": "optional free text"}
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
from typing import Optional, Sequence

import numpy as np

from .agents import OPEN, Agent, Observation
from .engine import MatchAbortError
from .games import GameSpec

PROTOCOL_VERSION = "1"
DEFAULT_TIMEOUT = 30.0


class ProtocolViolation(MatchAbortError):
    """The remote agent broke the wire contract."""


def observation_payload(observation: Observation) -> dict:
    payload = {
        "mode": observation.mode,
        "own_actions": list(observation.own_actions),
        "own_payoffs": list(observation.own_payoffs),
        "opponent_totals": list(observation.opponent_totals),
        "prices": list(observation.prices),
    }
    if observation.mode == OPEN:
        payload["opponent_actions"] = [list(a) for a in observation.opponent_actions]
        payload["n_agents"] = observation.n_agents
    return payload


def build_request(spec: GameSpec, i: int, observation: Observation,
                  match_id: str = "") -> str:
    """One request line; the game block carries the agent's own parameter."""
    body = {
        "protocol_version": PROTOCOL_VERSION,
        "match_id": match_id,
        "agent_index": i,
        "round": observation.round,
        "horizon": observation.horizon,
        "game": {
            "kind": spec.kind,
            "valuation": spec.valuations[i],
            "capacity": spec.capacity,
        },
        "observation": observation_payload(observation),
    }
    return json.dumps(body)


def parse_request(line: str) -> dict:
    """Validate an inbound request line (the agent-side half)."""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolViolation(f"request is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolViolation("request must be a JSON object")
    if data.get("protocol_version") != PROTOCOL_VERSION:
        raise ProtocolViolation(
            f"unsupported protocol version {data.get('protocol_version')!r}")
    for key in ("agent_index", "round", "horizon", "game", "observation"):
        if key not in data:
            raise ProtocolViolation(f"request missing {key!r}")
    return data


def build_response(action: float, rationale: Optional[str] = None) -> str:
    body: dict = {"action": float(action)}
    if rationale is not None:
        body["rationale"] = rationale
    return json.dumps(body)


def parse_response(line: str) -> tuple[float, Optional[str]]:
    """Validate an agent's response line, returning (action, rationale)."""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolViolation(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProtocolViolation("response must be a JSON object")
    if "action" not in data:
        raise ProtocolViolation("response missing 'action'")
    action = data["action"]
    if isinstance(action, bool) or not isinstance(action, (int, float)):
        raise ProtocolViolation(f"action must be a number, got {action!r}")
    if not np.isfinite(action) or action < 0:
        raise ProtocolViolation(f"action must be finite and >= 0, got {action!r}")
    rationale = data.get("rationale")
    if rationale is not None and not isinstance(rationale, str):
        raise ProtocolViolation("rationale must be a string when present")
    return float(action), rationale


class ExternalProcessAgent(Agent):
    """Engine-side proxy that speaks the wire protocol to a subprocess.

    The process is spawned on first use and queried once per round; a
    response that is late, malformed, or absent aborts the match.  Use as a
    context manager (or call :meth:`close`) to reap the process.
    """

    def __init__(self, command: Sequence[str], match_id: str = "",
                 timeout: float = DEFAULT_TIMEOUT):
        self.command = list(command)
        self.match_id = match_id
        self.timeout = timeout
        self.last_rationale: Optional[str] = None
        self._proc: Optional[subprocess.Popen] = None
        self._lines: "queue.Queue[Optional[str]]" = queue.Queue()

    def _ensure_process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1,
            )
            thread = threading.Thread(target=self._pump, args=(self._proc,),
                                      daemon=True)
            thread.start()
        return self._proc

    def _pump(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF marker

    def act(self, spec: GameSpec, i: int, observation: Observation) -> float:
        proc = self._ensure_process()
        request = build_request(spec, i, observation, self.match_id)
        try:
            assert proc.stdin is not None
            proc.stdin.write(request + "\n")
            proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolViolation(f"agent process unreachable: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise ProtocolViolation(
                f"agent did not answer within {self.timeout:.0f}s")
        if line is None:
            raise ProtocolViolation("agent process closed its output")
        action, rationale = parse_response(line)
        self.last_rationale = rationale
        return action

    def close(self) -> None:
        proc, self._proc = self._proc, None
        if proc is None:
            return
        if proc.stdin is not None:
            try:
                proc.stdin.close()
            except OSError:
                pass
        # Terminate before touching stdout: the reader thread holds the
        # stream lock while blocked, and only process exit releases it.
        proc.terminate()
        try:
            proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()
        if proc.stdout is not None:
            try:
                proc.stdout.close()
            except OSError:
                pass

    def __enter__(self) -> "ExternalProcessAgent":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

"""Match engine: round loop, perturbations, and lossless persistence."""

import csv
import json

import numpy as np
import pytest

from marketgames import (
    AGGREGATE,
    KELLY,
    OPEN,
    Agent,
    GameSpec,
    MatchAbortError,
    MatchConfig,
    MyopicAgent,
    Perturbation,
    RoundRecord,
    ScriptedAgent,
    SyntheticSocialAgent,
    TrajectoryLog,
    build_observation,
    run_match,
)

from conftest import make_cournot, make_kelly


class SpyAgent(Agent):
    """Plays a constant and keeps every observation it was shown."""

    def __init__(self, action=5.0):
        self.action = action
        self.seen = []

    def act(self, spec, i, observation):
        self.seen.append(observation)
        return self.action


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------

def test_match_config_validation(flagship):
    with pytest.raises(ValueError, match="horizon"):
        MatchConfig(flagship, 0)
    with pytest.raises(ValueError, match="mode"):
        MatchConfig(flagship, 5, mode="telepathic")
    with pytest.raises(ValueError, match="bid_floor"):
        MatchConfig(flagship, 5, bid_floor=0.0)
    with pytest.raises(ValueError, match="outside horizon"):
        MatchConfig(flagship, 5, perturbations=(Perturbation(6, 0, 1.0),))
    with pytest.raises(ValueError, match="out of range"):
        MatchConfig(flagship, 5, perturbations=(Perturbation(2, 7, 1.0),))
    with pytest.raises(ValueError, match="finite"):
        MatchConfig(flagship, 5, perturbations=(Perturbation(2, 0, -1.0),))


def test_match_config_dict_round_trip(flagship):
    config = MatchConfig(flagship, 8, AGGREGATE, seed=7, bid_floor=0.01,
                         match_id="m-1",
                         perturbations=(Perturbation(3, 1, 5.625),))
    assert MatchConfig.from_dict(config.to_dict()) == config


def test_match_config_from_dict_defaults():
    config = MatchConfig.from_dict({
        "game": {"kind": "cournot", "valuations": [15, 15]},
        "horizon": 4,
    })
    assert config.mode == OPEN and config.bid_floor == 1e-3
    assert config.perturbations == ()


# --------------------------------------------------------------------------
# Round loop
# --------------------------------------------------------------------------

def test_myopic_duo_stays_at_equilibrium(flagship):
    log = run_match(MatchConfig(flagship, 5), [MyopicAgent(), MyopicAgent()])
    assert np.allclose(log.actions(), 5.0)
    assert np.allclose(log.payoffs(), 25.0)
    assert all(r.price == 10.0 for r in log.records)
    assert log.status == "completed"


def test_agent_count_must_match(flagship):
    with pytest.raises(ValueError, match="one agent per"):
        run_match(MatchConfig(flagship, 3), [MyopicAgent()])


def test_observations_cover_completed_rounds_only(flagship):
    spy = SpyAgent()
    run_match(MatchConfig(flagship, 4), [spy, ScriptedAgent({}, MyopicAgent())])
    rounds = [obs.round for obs in spy.seen]
    assert rounds == [1, 2, 3, 4]
    for obs in spy.seen:
        assert len(obs.own_actions) == obs.round - 1
        assert len(obs.opponent_actions) == obs.round - 1
        assert obs.n_agents == 2


def test_blind_observations_hide_the_board(flagship):
    spy = SpyAgent()
    run_match(MatchConfig(flagship, 3, AGGREGATE), [spy, MyopicAgent()])
    for obs in spy.seen:
        assert obs.mode == AGGREGATE
        assert obs.opponent_actions is None and obs.n_agents is None
    assert spy.seen[-1].opponent_totals == (5.0, 5.0)


def test_build_observation_defaults_to_next_round(flagship):
    config = MatchConfig(flagship, 5)
    records = [RoundRecord(1, (5.0, 5.0), (25.0, 25.0), 10.0,
                           (False, False), (None, None))]
    obs = build_observation(config, 0, records)
    assert obs.round == 2
    assert obs.own_actions == (5.0,)
    assert obs.opponent_actions == ((5.0,),)


def test_scripted_deviation_draws_best_response(flagship):
    log = run_match(MatchConfig(flagship, 3),
                    [ScriptedAgent({1: 5.0, 2: 3.0}), MyopicAgent()])
    acts = log.actions()
    assert acts[1, 1] == 5.0           # responds to round-1 board
    assert acts[2, 1] == 6.0           # best response to the scripted 3.0


def test_kelly_actions_respect_the_bid_floor():
    spec = make_kelly()
    log = run_match(MatchConfig(spec, 3, bid_floor=0.01),
                    [ScriptedAgent({1: 0.0, 2: 0.0, 3: 0.0}),
                     ScriptedAgent({1: 0.5, 2: 0.5, 3: 0.5})])
    assert np.allclose(log.actions()[:, 0], 0.01)


def test_nonfinite_action_aborts(flagship, tmp_path):
    class BrokenAgent(Agent):
        def act(self, spec, i, observation):
            return float("nan")

    path = tmp_path / "broken.jsonl"
    with pytest.raises(MatchAbortError, match="non-finite"):
        run_match(MatchConfig(flagship, 3), [BrokenAgent(), MyopicAgent()],
                  log_path=path)
    saved = TrajectoryLog.load(path)
    assert saved.status == "aborted"
    assert "non-finite" in saved.error
    assert saved.n_rounds == 0


def test_abort_preserves_partial_rounds(flagship, tmp_path):
    class LateFailure(Agent):
        def act(self, spec, i, observation):
            if observation.round == 3:
                raise MatchAbortError("gave up")
            return 5.0

    path = tmp_path / "partial.jsonl"
    with pytest.raises(MatchAbortError, match="gave up"):
        run_match(MatchConfig(flagship, 5), [LateFailure(), MyopicAgent()],
                  log_path=path)
    saved = TrajectoryLog.load(path)
    assert saved.status == "aborted" and saved.n_rounds == 2


# --------------------------------------------------------------------------
# Perturbations
# --------------------------------------------------------------------------

def test_perturbation_overrides_after_query(flagship):
    spy = SpyAgent(action=5.0)
    config = MatchConfig(flagship, 4,
                         perturbations=(Perturbation(2, 0, 8.0),))
    log = run_match(config, [spy, MyopicAgent()])
    record = log.records[1]
    assert record.actions[0] == 8.0
    assert record.perturbed == (True, False)
    assert record.social[0] is None            # snapshot dropped
    assert record.social[1] is not None
    # The agent was still queried that round and saw the forced action later.
    assert len(spy.seen) == 4
    assert spy.seen[2].own_actions[1] == 8.0


def test_perturbation_payoffs_use_the_forced_action(flagship):
    config = MatchConfig(flagship, 2,
                         perturbations=(Perturbation(2, 1, 5.625),))
    log = run_match(config, [MyopicAgent(), MyopicAgent()])
    assert log.records[1].actions == (5.0, 5.625)
    assert log.records[1].payoffs[1] == pytest.approx(24.609375)


def test_perturbation_clamped_to_kelly_floor():
    spec = make_kelly()
    config = MatchConfig(spec, 2, bid_floor=0.05,
                         perturbations=(Perturbation(2, 0, 0.0),))
    log = run_match(config, [MyopicAgent(), MyopicAgent()])
    assert log.records[1].actions[0] == 0.05


# --------------------------------------------------------------------------
# Persistence
# --------------------------------------------------------------------------

def test_log_round_trip_is_byte_identical(flagship, tmp_path):
    config = MatchConfig(flagship, 6, match_id="roundtrip",
                         perturbations=(Perturbation(3, 1, 5.625),))
    constants = None
    log = run_match(config, [SyntheticSocialAgent(constants=constants),
                             SyntheticSocialAgent(constants=constants)])
    text = log.dumps()
    again = TrajectoryLog.loads(text)
    assert again.dumps() == text
    path = tmp_path / "match.jsonl"
    log.save(path)
    assert TrajectoryLog.load(path).dumps() == text


def test_log_lines_are_json_with_kinds(flagship):
    log = run_match(MatchConfig(flagship, 2), [MyopicAgent(), MyopicAgent()])
    lines = [json.loads(l) for l in log.dumps().splitlines()]
    assert lines[0]["kind"] == "header"
    assert lines[0]["config"]["game"]["kind"] == "cournot"
    assert [l["kind"] for l in lines[1:-1]] == ["round", "round"]
    assert lines[-1] == {"kind": "status", "status": "completed"}


def test_loads_requires_a_header():
    with pytest.raises(ValueError, match="no header"):
        TrajectoryLog.loads('{"kind": "status", "status": "completed"}\n')


def test_repeat_runs_are_deterministic(flagship):
    def one():
        return run_match(MatchConfig(flagship, 10),
                         [SyntheticSocialAgent(), SyntheticSocialAgent()])
    assert one().dumps() == one().dumps()


def test_csv_export(flagship, tmp_path):
    config = MatchConfig(flagship, 3,
                         perturbations=(Perturbation(2, 1, 5.625),))
    log = run_match(config, [SyntheticSocialAgent(), SyntheticSocialAgent()])
    path = tmp_path / "match.csv"
    log.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6                       # 3 rounds x 2 agents
    assert rows[0]["action"] == repr(5.0)
    forced = [r for r in rows if r["perturbed"] == "1"]
    assert len(forced) == 1
    assert forced[0]["theta"] == "" and forced[0]["gamma"] == ""
    clean = [r for r in rows if r["perturbed"] == "0"]
    assert all(r["theta"] != "" for r in clean)


def test_welfare_and_cumulative_helpers(flagship):
    log = run_match(MatchConfig(flagship, 4), [MyopicAgent(), MyopicAgent()])
    assert np.allclose(log.welfare_series(), 50.0)
    assert np.allclose(log.cumulative_payoffs(), 100.0)

"""Inverse inference: round extraction, windows, and constant recovery."""

import csv

import numpy as np
import pytest

from marketgames import (
    COURNOT,
    OPEN,
    DynamicsConstants,
    GameSpec,
    MatchConfig,
    RoundRecord,
    ScriptedAgent,
    SocialSnapshot,
    SyntheticSocialAgent,
    TrajectoryLog,
    cost_of_parity_series,
    extract_round,
    extract_trajectory,
    extract_window,
    extraction_to_csv,
    fit_dynamics,
    run_match,
)

from conftest import make_cournot, play_synthetic

FLAGSHIP = make_cournot()


# --------------------------------------------------------------------------
# Single-round extraction
# --------------------------------------------------------------------------

@pytest.mark.parametrize("action, w, theta", [
    (4.0, 5.0, 0.40),
    (3.75, 5.0, 0.50),
    (4.0, 4.0, 0.75),
    (3.75, 4.0, 0.875),
    (3.75, 3.75, 1.0),
    (4.5, 3.75, 0.60),
    (5.0, 5.0, 0.0),
])
def test_trust_ladder_frozen(action, w, theta):
    got = extract_round(FLAGSHIP, 0, action, [w])
    assert not got.gap and got.regime == "trust"
    assert got.theta == pytest.approx(theta, abs=1e-9)
    assert got.gamma == 0.0


def test_reversion_extracts_unit_stability():
    got = extract_round(FLAGSHIP, 0, 5.0, [5.625])
    assert got.regime == "punishment" and not got.gap
    assert got.gamma == pytest.approx(1.0, abs=1e-9)
    assert got.theta == 0.0


def test_forgiveness_round_extracts_large_stability():
    # Holding the norm while the partner over-corrects: theta would need 2.
    got = extract_round(FLAGSHIP, 0, 3.75, [2.5])
    assert got.regime == "punishment"
    assert got.gamma == pytest.approx(4.0, abs=1e-9)


def test_reversion_level_is_scale_free():
    # Playing one's own mirrored Nash action always inverts to gamma = 1,
    # whatever the opponent did -- the tit-for-tat signature.
    for w in (4.0, 5.625, 7.0, 9.9):
        got = extract_round(FLAGSHIP, 0, 5.0, [w], regime="punishment")
        assert got.gamma == pytest.approx(1.0, abs=1e-9)


def test_corner_exit_reads_as_punishment():
    got = extract_round(FLAGSHIP, 0, 0.0, [20.0])
    assert got.regime == "punishment"
    assert got.gamma == pytest.approx(0.25)


def test_regime_preference_is_trust_first():
    # The same action admits both readings; auto keeps the trust one.
    auto = extract_round(FLAGSHIP, 0, 5.0, [3.75])
    assert auto.regime == "trust"
    assert auto.theta == pytest.approx(1.25 / 3.75)
    forced = extract_round(FLAGSHIP, 0, 5.0, [3.75], regime="punishment")
    assert forced.gamma == pytest.approx(1.0)


def test_degenerate_rounds_are_flagged_not_guessed():
    # Action ties the opponent while the private gradient is nonzero:
    # no trust reading in [0, 1], no spread for a punishment reading.
    got = extract_round(FLAGSHIP, 0, 5.625, [5.625])
    assert got.gap and got.theta is None and got.gamma is None
    assert "no regime" in got.note
    forced = extract_round(FLAGSHIP, 0, 5.625, [5.625], regime="trust")
    assert forced.gap and "outside" in forced.note


def test_unknown_regime_rejected():
    with pytest.raises(ValueError, match="regime"):
        extract_round(FLAGSHIP, 0, 5.0, [5.0], regime="both")


# --------------------------------------------------------------------------
# Trajectory extraction and pairing
# --------------------------------------------------------------------------

def _scripted_log(script0, script1, horizon=None, spec=FLAGSHIP):
    horizon = horizon or max(len(script0), len(script1))
    config = MatchConfig(spec, horizon, OPEN)
    return run_match(config, [
        ScriptedAgent({r + 1: a for r, a in enumerate(script0)}),
        ScriptedAgent({r + 1: a for r, a in enumerate(script1)}),
    ])


def test_pairing_conventions_differ():
    log = _scripted_log([5.0, 4.0], [5.0, 3.0])
    reactive = {(r.round, r.agent): r
                for r in extract_trajectory(log, pairing="reactive")}
    simultaneous = {(r.round, r.agent): r
                    for r in extract_trajectory(log, pairing="simultaneous")}
    # Round 2, agent 0 answered last round's 5 -- a 0.40 trust reading; the
    # same-round pairing against 3.0 rationalizes only a punishment.
    assert reactive[(2, 0)].regime == "trust"
    assert reactive[(2, 0)].theta == pytest.approx(0.40)
    assert simultaneous[(2, 0)].regime == "punishment"
    assert simultaneous[(2, 0)].gamma == pytest.approx(4.0)


def test_first_round_pairs_within_the_round():
    log = _scripted_log([5.0], [5.0], horizon=1)
    rows = extract_trajectory(log)
    assert all(r.opponents == (5.0,) for r in rows)
    assert all(r.theta == pytest.approx(0.0) for r in rows)


def test_recorded_regime_policy_overrides_auto():
    records = [
        RoundRecord(1, (5.0, 3.75), (31.25, 23.4375), 8.75, (False, False),
                    (None, None)),
        RoundRecord(2, (5.0, 3.75), (31.25, 23.4375), 8.75, (False, False),
                    (SocialSnapshot(0.0, 1.0, "punishment"), None)),
    ]
    log = TrajectoryLog(MatchConfig(FLAGSHIP, 2, OPEN), records)
    auto = {(r.round, r.agent): r for r in extract_trajectory(log)}
    recorded = {(r.round, r.agent): r
                for r in extract_trajectory(log, regime_policy="recorded")}
    assert auto[(2, 0)].regime == "trust"
    assert recorded[(2, 0)].regime == "punishment"
    assert recorded[(2, 0)].gamma == pytest.approx(1.0)
    # Agents without a recorded snapshot still fall back to auto.
    assert recorded[(2, 1)].regime == "trust"


def test_extract_trajectory_rejects_unknown_options(trust_log):
    with pytest.raises(ValueError, match="pairing"):
        extract_trajectory(trust_log, pairing="psychic")
    with pytest.raises(ValueError, match="regime policy"):
        extract_trajectory(trust_log, regime_policy="vibes")


def test_canonical_run_full_ladder(trust_log):
    ex = {(r.round, r.agent): r for r in extract_trajectory(trust_log)}
    ladder = {(2, 0): 0.40, (3, 0): 0.50, (3, 1): 0.75,
              (4, 0): 0.875, (4, 1): 1.0, (9, 0): 0.6, (9, 1): 0.6}
    for key, want in ladder.items():
        assert ex[key].theta == pytest.approx(want, abs=1e-9), key


# --------------------------------------------------------------------------
# Window estimates
# --------------------------------------------------------------------------

def test_window_recovers_a_joint_weight_pair():
    theta, gamma = 0.5, 0.25
    b = 15.0

    def stationary_action(w):
        return (b - (1.0 + theta) * w + gamma * w) / (2.0 + gamma)

    # Agent 0 answers last round's opponent action with the exact
    # stationary point of G at (0.5, 0.25); two rounds pin both weights.
    log = _scripted_log(
        [5.0, stationary_action(4.0), stationary_action(6.0)],
        [4.0, 6.0, 5.0],
    )
    est = extract_window(log, 0, 2, 3)
    assert est.theta == pytest.approx(theta, abs=1e-9)
    assert est.gamma == pytest.approx(gamma, abs=1e-9)
    assert est.residual == pytest.approx(0.0, abs=1e-9)


def test_window_bounds_checked(trust_log):
    with pytest.raises(ValueError, match="window"):
        extract_window(trust_log, 0, 0, 3)
    with pytest.raises(ValueError, match="window"):
        extract_window(trust_log, 0, 5, 99)


def test_window_on_the_cooperative_plateau(trust_log):
    # Identical plateau rounds leave the system rank deficient; the
    # minimum-norm answer is full trust with no stability term.
    est = extract_window(trust_log, 0, 5, 8)
    assert est.theta == pytest.approx(1.0, abs=1e-6)
    assert abs(est.gamma) <= 1e-6
    assert est.residual <= 1e-9


# --------------------------------------------------------------------------
# Parity series and CSV export
# --------------------------------------------------------------------------

def test_cost_of_parity_series(trust_log):
    series = cost_of_parity_series(trust_log)
    assert series.shape == (10, 2)
    assert series[0, 0] == 0.0                       # both at the Nash action
    assert series[2, 1] == pytest.approx(2.25)       # matching the 4.0 signal
    assert series[4, 0] == pytest.approx(3.515625)   # holding the 3.75 norm


def test_extraction_csv(trust_log, tmp_path):
    path = tmp_path / "extraction.csv"
    rows = extract_trajectory(trust_log)
    extraction_to_csv(rows, path)
    with open(path, newline="") as fh:
        table = list(csv.DictReader(fh))
    assert len(table) == 20
    assert table[2]["theta"] == repr(0.4)
    assert set(table[0]) == {"round", "agent", "action", "theta", "gamma",
                             "regime", "gap", "note"}


def test_extraction_csv_gap_rows_left_blank(tmp_path):
    gap = extract_round(FLAGSHIP, 0, 5.625, [5.625])
    path = tmp_path / "gaps.csv"
    extraction_to_csv([gap], path)
    with open(path, newline="") as fh:
        row = next(csv.DictReader(fh))
    assert row["theta"] == "" and row["gamma"] == "" and row["gap"] == "1"


# --------------------------------------------------------------------------
# Dynamics-constant recovery
# --------------------------------------------------------------------------

TRUTH = DynamicsConstants(decay=1.0, retention=0.8, forgiveness=0.25,
                          epsilon=0.05, omega_max=6.25)

# Opponent script mixing deviations, accommodations (kept inside the
# parity-affordable band so the tolerance gate does not zero the state and
# erase the forgiveness fingerprint), calm rounds, and one spike past the
# tolerance so the gate itself is exercised.
DEVIATOR = [5.0, 5.625, 3.5, 7.5, 3.75, 3.5, 5.0, 3.75, 3.75, 3.75]


def _model_log(constants):
    config = MatchConfig(FLAGSHIP, 10, OPEN)
    return run_match(config, [
        SyntheticSocialAgent(policy="model", constants=constants),
        ScriptedAgent({r + 1: a for r, a in enumerate(DEVIATOR)}),
    ])


def test_fit_recovers_planted_constants():
    log = _model_log(TRUTH)
    grids = {
        "decay": [0.5, 1.0, 2.0, 4.0],
        "retention": [0.7, 0.8, 0.9],
        "forgiveness": [0.25, 0.5, 1.0],
        "epsilon": [0.05],
        "omega_max": [6.25, 20.0],
    }
    result = fit_dynamics([log], grids=grids, agents_of_interest=[0],
                          passes=3)
    assert result.constants.decay == 1.0
    assert result.constants.retention == 0.8
    assert result.constants.forgiveness == 0.25
    assert result.constants.omega_max == 6.25
    assert result.score == pytest.approx(0.0, abs=1e-16)
    assert result.diagnostics["deviation_events"] > 0
    assert result.diagnostics["decay_identifiable"]


def test_fit_flags_unidentifiable_decay():
    # A partner that never deviates leaves the decay rate unconstrained.
    log = _scripted_log([3.75] * 6, [3.75] * 6)
    result = fit_dynamics([log])
    assert result.diagnostics["deviation_events"] == 0
    assert not result.diagnostics["decay_identifiable"]
    assert "unidentified" in result.diagnostics["note"]


def test_fit_requires_logs():
    with pytest.raises(ValueError, match="at least one"):
        fit_dynamics([])

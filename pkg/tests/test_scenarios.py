"""Canonical scenario suite: every checkpoint holds, artifacts land on disk."""

import json

import pytest

from marketgames import SCENARIOS, run_scenario
from marketgames.scenarios import (
    asymmetry_sweep,
    betrayal_forgiveness,
    information_modes,
    pareto_figure,
    trust_buildup,
)


def _assert_all_checks(result):
    failed = [c for c in result.checks if not c.passed]
    assert not failed, "; ".join(f"{c.name}: {c.detail}" for c in failed)
    assert result.passed


@pytest.mark.parametrize("name", sorted(SCENARIOS))
def test_scenario_passes(name):
    _assert_all_checks(run_scenario(name))


def test_trust_buildup_summary_payload():
    result = trust_buildup()
    assert result.summary["extracted_theta"]["r4a1"] == pytest.approx(1.0)
    assert result.summary["welfare"][4] == pytest.approx(56.25)


def test_betrayal_round_is_flagged():
    result = betrayal_forgiveness()
    log = result.logs["betrayal_forgiveness"]
    assert log.records[5].perturbed == (False, True)
    assert log.records[6].perturbed == (False, True)
    assert sum(f for r in log.records for f in r.perturbed) == 2


def test_information_gap_is_material():
    result = information_modes()
    open_w = result.summary["welfare_open"]
    blind_w = result.summary["welfare_blind"]
    assert blind_w == pytest.approx(500.0, abs=1e-6)   # parked at equilibrium
    assert open_w > blind_w + 20.0                     # not a rounding fluke


def test_sweep_switch_points_ordered():
    result = asymmetry_sweep()
    points = result.summary["switch_points"]
    assert points == {"0.2": 4.25, "0.25": 5.0, "0.35": 6.25}


def test_pareto_summary_references():
    result = pareto_figure()
    refs = result.summary["references"]
    assert refs["nash"]["payoffs"] == pytest.approx([0.5, 0.5])
    assert refs["cooperative_floor"]["payoffs"] == pytest.approx([0.9, 0.9])
    assert result.summary["front_size"] > 100


def test_unknown_scenario_rejected():
    with pytest.raises(KeyError, match="unknown scenario"):
        run_scenario("moon-landing")


def test_scenario_writes_artifacts(tmp_path):
    outdir = tmp_path / "trust"
    run_scenario("trust-buildup", outdir=outdir)
    names = {p.name for p in outdir.iterdir()}
    assert {"trust_buildup.jsonl", "trust_buildup.csv",
            "trust_buildup_extraction.csv", "summary.json"} <= names
    payload = json.loads((outdir / "summary.json").read_text())
    assert payload["scenario"] == "trust-buildup"
    assert all(c["passed"] for c in payload["checks"])
    assert payload["params"]["constants"]["omega_max"] == pytest.approx(6.25)


def test_sweep_writes_a_table(tmp_path):
    outdir = tmp_path / "sweep"
    run_scenario("asymmetry-sweep", outdir=outdir)
    table = (outdir / "sweep.csv").read_text().splitlines()
    assert table[0] == "multiplier,valuation_gap,action_0,action_1,relative_gap,label"
    assert len(table) == 1 + 3 * 41


def test_scenario_horizon_override():
    result = run_scenario("trust-buildup", horizon=12)
    assert result.params["horizon"] == 12
    _assert_all_checks(result)

#!/usr/bin/env python3
"""Betrayal, proportionate retaliation, and a negotiated return.

Same cooperative pair as the trust demo, but over 12 rounds with two
forced overrides: agent 2 is pushed to 1.5x the optimum (5.625) in round
6 -- a betrayal its partner did not provoke -- and to a conceding 2.5 in
round 7.  Agent 1 answers the betrayal with a one-round reversion to its
Nash quantity, accepts the concession, and cooperation resumes.

The extraction columns tell the story in weights: agent 1's round-7 move
rationalizes as pure punishment (theta 0, gamma 1), and by round 9 it is
back to full trust (theta 1, gamma 0).
"""

from pathlib import Path

from marketgames import (
    COURNOT,
    DynamicsConstants,
    GameSpec,
    MatchConfig,
    Perturbation,
    SyntheticSocialAgent,
    extract_trajectory,
    run_match,
)

OUT = Path(__file__).parent / "out"


def fmt(value):
    return "  --  " if value is None else f"{value:>6.3f}"


def main():
    spec = GameSpec(COURNOT, (15.0, 15.0))
    constants = DynamicsConstants.for_game(spec)
    config = MatchConfig(
        spec, horizon=12, match_id="betrayal",
        perturbations=(Perturbation(6, 1, 5.625), Perturbation(7, 1, 2.5)))
    OUT.mkdir(exist_ok=True)
    log = run_match(
        config,
        [SyntheticSocialAgent(constants=constants),
         SyntheticSocialAgent(constants=constants)],
        log_path=OUT / "betrayal.jsonl")

    rows = {(r.round, r.agent): r for r in extract_trajectory(log)}
    print(f"{'round':>5} {'x1':>6} {'x2':>6}  {'theta1':>6} {'gamma1':>6}"
          f"  {'regime1':<10} note")
    for t, record in enumerate(log.records, start=1):
        r = rows[(t, 0)]
        note = ""
        if record.perturbed[1]:
            note = "agent 2 forced"
        print(f"{t:>5} {record.actions[0]:>6.2f} {record.actions[1]:>6.2f}  "
              f"{fmt(r.theta)} {fmt(r.gamma)}  {r.regime or '?':<10} {note}")

    retaliation = rows[(7, 0)]
    restored = rows[(9, 0)]
    print(f"\nRetaliation round 7: agent 1 plays "
          f"{log.records[6].actions[0]:g} -> (theta, gamma) = "
          f"({retaliation.theta:g}, {retaliation.gamma:g})")
    print(f"Restored round 9:    (theta, gamma) = "
          f"({restored.theta:g}, {restored.gamma:g})")


if __name__ == "__main__":
    main()

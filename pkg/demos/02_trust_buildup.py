#!/usr/bin/env python3
"""A symmetric pair talks itself from Nash down to the social optimum.

Two synthetic social agents play the 10-round Cournot flagship with full
observability.  One concedes first, the other reciprocates, and within
four rounds both sit at the welfare-optimal 3.75.  The right-hand columns
show the inverse-inference view: the cooperation weight theta recovered
from each action, climbing to 1.0 and letting go again as the end nears.

Writes the trajectory log and extraction table under demos/out/.
"""

from pathlib import Path

from marketgames import (
    COURNOT,
    DynamicsConstants,
    GameSpec,
    MatchConfig,
    SyntheticSocialAgent,
    extract_trajectory,
    extraction_to_csv,
    run_match,
)

OUT = Path(__file__).parent / "out"


def main():
    spec = GameSpec(COURNOT, (15.0, 15.0))
    constants = DynamicsConstants.for_game(spec)
    config = MatchConfig(spec, horizon=10, match_id="trust-buildup")
    OUT.mkdir(exist_ok=True)
    log = run_match(
        config,
        [SyntheticSocialAgent(constants=constants),
         SyntheticSocialAgent(constants=constants)],
        log_path=OUT / "trust_buildup.jsonl")

    rows = {(r.round, r.agent): r for r in extract_trajectory(log)}
    extraction_to_csv(sorted(rows.values(), key=lambda r: (r.round, r.agent)),
                      OUT / "trust_buildup_extraction.csv")

    print(f"{'round':>5} {'x1':>6} {'x2':>6} {'welfare':>8}   "
          f"{'theta1':>6} {'theta2':>6}")
    for t, record in enumerate(log.records, start=1):
        w = sum(record.payoffs)
        th = [rows[(t, i)].theta for i in (0, 1)]
        print(f"{t:>5} {record.actions[0]:>6.2f} {record.actions[1]:>6.2f} "
              f"{w:>8.4f}   {th[0]:>6.3f} {th[1]:>6.3f}")

    print("\nRound 1 opens at the Nash quantity (5, 5); the concession at "
          "round 2 reads as\ntheta = 0.40, reciprocation pushes both to 1.0 "
          "by round 5, and the taper/endgame\nrounds walk back out "
          "(0.6, then pure best response).")
    print(f"\nArtifacts: {OUT / 'trust_buildup.jsonl'} and "
          f"{OUT / 'trust_buildup_extraction.csv'}")


if __name__ == "__main__":
    main()

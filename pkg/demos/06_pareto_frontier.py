#!/usr/bin/env python3
"""The feasible payoff plane of the bidding game, and where Nash sits in it.

Sweeps a 400x400 grid of bid pairs for the Kelly game (V = 2 each,
capacity 1), marks the Pareto-efficient payoffs, and audits the frontier
by brute force.  The Nash payoff (0.5, 0.5) is strictly dominated; the
low-bid cooperation point (0.1, 0.1) pays (0.9, 0.9) and lies on the
frontier.  Front points go to demos/out/pareto_front.csv.
"""

import csv
import time
from pathlib import Path

import numpy as np

from marketgames import KELLY, GameSpec, pareto_sample

OUT = Path(__file__).parent / "out"


def main():
    spec = GameSpec(KELLY, (2.0, 2.0))
    start = time.perf_counter()
    sample = pareto_sample(spec, (0.1, 1.5), resolution=400)
    elapsed = time.perf_counter() - start

    front_actions = sample.actions[sample.front_mask]
    front_payoffs = sample.payoffs[sample.front_mask]
    OUT.mkdir(exist_ok=True)
    with open(OUT / "pareto_front.csv", "w", newline="",
              encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["action_0", "action_1", "payoff_0", "payoff_1"])
        for a, p in zip(front_actions, front_payoffs):
            writer.writerow([repr(float(a[0])), repr(float(a[1])),
                             repr(float(p[0])), repr(float(p[1]))])

    nash = np.asarray(sample.references["nash"]["payoffs"])
    coop = np.asarray(sample.references["cooperative_floor"]["payoffs"])
    dominating = front_payoffs[np.all(front_payoffs > nash + 1e-9, axis=1)]

    print(f"grid: {sample.payoffs.shape[0]} samples in {elapsed:.2f}s; "
          f"front size {front_payoffs.shape[0]}")
    print(f"audit mismatches: {sample.audit_front()}")
    print(f"Nash payoffs        : {nash.round(6).tolist()}")
    on_front = bool(np.min(np.linalg.norm(front_payoffs - coop, axis=1)) < 1e-9)
    print(f"low-bid cooperation : {coop.round(6).tolist()} "
          f"(on front: {on_front})")
    print(f"front points strictly dominating Nash: {dominating.shape[0]}")
    print(f"front CSV: {OUT / 'pareto_front.csv'}")


if __name__ == "__main__":
    main()

"""Command-line front end.

Subcommands::

    marketgames simulate --config cfg.json [--log out.jsonl] [--csv out.csv]
    marketgames extract --log match.jsonl [--out table.csv] [options]
    marketgames fit --logs 'runs/*.jsonl' [--out fit.json]
    marketgames pareto [--resolution N] [--range LO:HI] [--out front.csv]
    marketgames scenario NAME [--out DIR] [--horizon N]

Exit codes: 0 success, 1 failed checkpoint or aborted match, 2 usage error,
3 runtime failure.

The simulate config is one JSON object: the match configuration (as echoed
in log headers) plus an ``agents`` list.  Agent entries::

    {"type": "synthetic", "policy": "protocol", "role": "auto"}
    {"type": "myopic"}
    {"type": "scripted", "script": {"3": 5.625}}
    {"type": "external", "command": ["node", "bridge/dist/serve.js"]}

Optional ``constants`` (update-law constants) apply to synthetic agents.
"""

from __future__ import annotations

import argparse
import glob as globlib
import json
import sys
from contextlib import ExitStack

from .agents import (
    Agent,
    DynamicsConstants,
    MyopicAgent,
    ScriptedAgent,
    SyntheticSocialAgent,
)
from .engine import MatchAbortError, MatchConfig, TrajectoryLog, run_match
from .games import GameSpec, KELLY
from .inference import (
    extract_trajectory,
    extract_window,
    extraction_to_csv,
    fit_dynamics,
)
from .protocol import ExternalProcessAgent
from .scenarios import SCENARIOS, run_scenario
from .solvers import pareto_sample


def _build_agent(entry: dict, config: MatchConfig,
                 constants: DynamicsConstants | None,
                 stack: ExitStack) -> Agent:
    kind = entry.get("type", "synthetic")
    if kind == "myopic":
        return MyopicAgent()
    if kind == "scripted":
        script = {int(r): float(a) for r, a in entry.get("script", {}).items()}
        return ScriptedAgent(script)
    if kind == "synthetic":
        kwargs = {k: entry[k] for k in
                  ("policy", "role", "signal_fraction", "coop_target",
                   "bid_floor", "detector_slack") if k in entry}
        if "endgame_trust" in entry:
            kwargs["endgame_trust"] = {int(t): float(v) for t, v
                                       in entry["endgame_trust"].items()}
        return SyntheticSocialAgent(constants=constants, **kwargs)
    if kind == "external":
        agent = ExternalProcessAgent(entry["command"],
                                     match_id=config.match_id,
                                     timeout=float(entry.get("timeout", 30.0)))
        stack.enter_context(agent)
        return agent
    raise ValueError(f"unknown agent type {kind!r}")


def _cmd_simulate(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    config = MatchConfig.from_dict(cfg)
    constants = None
    if cfg.get("constants"):
        constants = DynamicsConstants(**cfg["constants"])
    entries = cfg.get("agents")
    if not entries:
        entries = [{"type": "synthetic"}] * config.spec.n_agents
    if len(entries) != config.spec.n_agents:
        raise ValueError("agents list must match the number of participants")
    with ExitStack() as stack:
        agents = [_build_agent(e, config, constants, stack) for e in entries]
        try:
            log = run_match(config, agents, log_path=args.log)
        except MatchAbortError as exc:
            print(f"match aborted: {exc}", file=sys.stderr)
            return 1
    if args.csv:
        log.to_csv(args.csv)
    welfare = float(log.welfare_series().sum())
    print(f"{config.match_id or 'match'}: {log.n_rounds} rounds, "
          f"status={log.status}, total welfare={welfare:.6g}")
    return 0


def _cmd_extract(args) -> int:
    log = TrajectoryLog.load(args.log)
    results = extract_trajectory(log, pairing=args.pairing,
                                 regime_policy=args.regime)
    if args.out:
        extraction_to_csv(results, args.out)
    for r in results:
        if r.gap:
            print(f"round {r.round} agent {r.agent}: gap ({r.note})")
        else:
            print(f"round {r.round} agent {r.agent}: "
                  f"theta={r.theta:.6f} gamma={r.gamma:.6f} [{r.regime}]")
    if args.window:
        start, end = (int(x) for x in args.window.split(":"))
        for i in range(log.config.spec.n_agents):
            est = extract_window(log, i, start, end, pairing=args.pairing)
            print(f"window {start}:{end} agent {i}: theta={est.theta:.6f} "
                  f"gamma={est.gamma:.6f} residual={est.residual:.3g}")
    return 0


def _cmd_fit(args) -> int:
    paths = sorted(globlib.glob(args.logs))
    if not paths:
        raise FileNotFoundError(f"no logs match {args.logs!r}")
    logs = [TrajectoryLog.load(p) for p in paths]
    result = fit_dynamics(logs)
    payload = {
        "constants": {k: getattr(result.constants, k) for k in
                      ("epsilon", "decay", "retention", "forgiveness",
                       "omega_max", "deviation_gain")},
        "score": result.score,
        "diagnostics": result.diagnostics,
        "logs": paths,
    }
    print(json.dumps(payload, indent=2))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    return 0


def _cmd_pareto(args) -> int:
    lo, hi = (float(x) for x in args.range.split(":"))
    valuations = tuple(float(v) for v in args.valuations.split(","))
    spec = GameSpec(KELLY, valuations, capacity=args.capacity)
    sample = pareto_sample(spec, (lo, hi), args.resolution)
    if args.out:
        import csv as csvlib
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csvlib.writer(fh)
            writer.writerow(["action_0", "action_1", "payoff_0", "payoff_1"])
            for a, p in zip(sample.actions[sample.front_mask],
                            sample.payoffs[sample.front_mask]):
                writer.writerow([repr(float(a[0])), repr(float(a[1])),
                                 repr(float(p[0])), repr(float(p[1]))])
    audit = sample.audit_front()
    print(f"front size {int(sample.front_mask.sum())} of "
          f"{sample.payoffs.shape[0]} samples; audit mismatches {audit}")
    return 0 if audit == 0 else 1


def _cmd_scenario(args) -> int:
    kwargs = {}
    if args.horizon is not None:
        kwargs["horizon"] = args.horizon
    result = run_scenario(args.name, outdir=args.out, **kwargs)
    for check in result.checks:
        mark = "PASS" if check.passed else "FAIL"
        print(f"[{mark}] {result.name}/{check.name}: {check.detail}")
    return 0 if result.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="marketgames",
        description="Repeated market games with social-weight inference.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a match from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--log", help="write the trajectory log (JSONL)")
    p.add_argument("--csv", help="write the flat per-agent CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("extract", help="recover (theta, gamma) from a log")
    p.add_argument("--log", required=True)
    p.add_argument("--pairing", choices=["reactive", "simultaneous"],
                   default="reactive")
    p.add_argument("--regime", choices=["auto", "recorded"], default="auto")
    p.add_argument("--out", help="write the extraction table (CSV)")
    p.add_argument("--window", help="joint estimate over rounds START:END")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("fit", help="recover update-law constants from logs")
    p.add_argument("--logs", required=True, help="glob of trajectory logs")
    p.add_argument("--out", help="write the fit result (JSON)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("pareto", help="sample a two-bidder Pareto frontier")
    p.add_argument("--resolution", type=int, default=400)
    p.add_argument("--range", default="0.1:1.5")
    p.add_argument("--valuations", default="2,2")
    p.add_argument("--capacity", type=float, default=1.0)
    p.add_argument("--out", help="write front points (CSV)")
    p.set_defaults(func=_cmd_pareto)

    p = sub.add_parser("scenario", help="run a canonical scenario")
    p.add_argument("name", choices=sorted(SCENARIOS))
    p.add_argument("--out", help="directory for scenario artifacts")
    p.add_argument("--horizon", type=int)
    p.set_defaults(func=_cmd_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BrokenPipeError, KeyboardInterrupt):
        return 3
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

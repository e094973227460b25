"""Command-line entry point: ``catalyst-towers <command> ...``.

Exit codes: 0 success, 1 gadget verification failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import costmodel, gadgets, planner, rusdepth, scenarios
from .scenarios import ConfigError


def _scenario(args) -> scenarios.ScenarioConfig:
    if args.config:
        return scenarios.load_config(args.config, args.scenario)
    return scenarios.scenario_defaults(args.scenario)


def cmd_verify(args) -> int:
    reports = gadgets.verify_all(seed=args.seed, trials=args.trials)
    ok = all(r.passed for r in reports)
    print(json.dumps({"passed": ok, "reports": [r.to_dict() for r in reports]}, indent=2))
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    cfg = _scenario(args)
    rows = scenarios.sweep(cfg, args.d_min, args.d_max)
    if args.format == "csv":
        sys.stdout.write(scenarios.rows_to_csv(rows))
    else:
        print(scenarios.rows_to_json(rows, cfg))
    return 0


def cmd_plan(args) -> int:
    plan = planner.plan_towers(args.copies, args.scheme)
    r_t = costmodel.rt_fallback(args.epsilon)
    if args.json:
        print(plan.to_json(r_t=r_t, reps=args.reps, angles=args.angles))
        return 0
    towers = ", ".join(f"{L}:{c}" for L, c in plan.towers.items())
    print(f"towers: {{{towers}}}")
    print(f"demand: {list(plan.demand)}")
    print(f"yields: {list(plan.yields)}")
    print(f"excess: {plan.excess}")
    t = planner.expected_tcount_per_repetition(plan, r_t, args.reps, args.angles)
    print(f"tcount_per_repetition: {t}")
    return 0


def cmd_rus_depth(args) -> int:
    mc = rusdepth.mc_expected_max(args.parallel, args.layers, args.copies, args.samples,
                                  args.seed)
    exact = rusdepth.exact_expected_max(args.parallel, args.layers, args.copies)
    print(mc.to_json(exact))
    return 0


def cmd_crossover(args) -> int:
    cfg = _scenario(args)
    res = scenarios.crossover(cfg, args.a, args.b, args.metric, args.d_min, args.d_max)
    print(json.dumps({"d": res.d, "monotone": res.monotone, "a": res.method_a,
                      "b": res.method_b, "metric": res.metric, "scenario": cfg.name}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catalyst-towers", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run every gadget verification")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="cost rows over a range of code distances")
    p.add_argument("--scenario", choices=sorted(scenarios.SCENARIOS), required=True)
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=25)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plan", help="independent-tower plan for N identical rotations")
    p.add_argument("--copies", type=int, required=True)
    p.add_argument("--scheme", choices=planner.SCHEMES, default="control")
    p.add_argument("--angles", type=int, default=1)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=2e-6)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("rus-depth", help="expected depth of parallel RUS rotations")
    p.add_argument("--parallel", type=int, default=5)
    p.add_argument("--layers", type=int, default=7)
    p.add_argument("--copies", type=int, default=60)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_rus_depth)

    p = sub.add_parser("crossover", help="first distance where method a costs >= method b")
    p.add_argument("--scenario", choices=sorted(scenarios.SCENARIOS), required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--metric", choices=scenarios.METRICS, default="volume")
    p.add_argument("--d-min", type=int, default=3)
    p.add_argument("--d-max", type=int, default=51)
    p.add_argument("--config")
    p.set_defaults(func=cmd_crossover)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

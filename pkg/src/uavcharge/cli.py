"""Command line entry point: ``uavcharge {train,compare,sweep,validate-config}``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import harness
from .agent import QLearningParams, QTableFormatError


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--scenario",
        action="append",
        metavar="PATH",
        help="scenario JSON file or bundled scenario name; repeatable (default: scenario-1)",
    )
    common.add_argument("--episodes", type=int, default=50_000, metavar="N", help="training episodes (default: 50000)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    common.add_argument("--out", type=Path, default=Path("results"), metavar="DIR", help="output directory")
    common.add_argument(
        "--tx-power", type=float, action="append", metavar="WATTS", help="transmit power override; repeatable for sweep"
    )
    common.add_argument("-v", "--verbose", action="store_true")

    evaluation = argparse.ArgumentParser(add_help=False)
    evaluation.add_argument(
        "--eval-episodes", type=int, default=2000, metavar="N", help="paired evaluation episodes (default: 2000)"
    )

    p = argparse.ArgumentParser(prog="uavcharge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", parents=[common], help="train a Q-table and write the learning curve")
    t.add_argument("--qtable", type=Path, metavar="PATH", help="where to save the Q-table")

    c = sub.add_parser("compare", parents=[common, evaluation], help="evaluate learned, random and static policies")
    c.add_argument("--qtable", type=Path, metavar="PATH", help="use this trained Q-table instead of training")

    sub.add_parser("sweep", parents=[common, evaluation], help="compare policies across transmit powers")

    v = sub.add_parser("validate-config", help="check scenario files")
    v.add_argument("paths", nargs="+", metavar="PATH")
    return p


def _single_power(args) -> float | None:
    if not args.tx_power:
        return None
    if len(args.tx_power) > 1:
        raise ValueError(f"{args.command} takes a single --tx-power, got {len(args.tx_power)}")
    return args.tx_power[0]


def _plan(args) -> harness.ExperimentPlan:
    if args.episodes < 0:
        raise ValueError(f"--episodes must be non-negative, got {args.episodes}")
    kwargs = dict(
        scenarios=args.scenario or ["scenario-1"],
        params=QLearningParams.for_episodes(args.episodes),
        seed=args.seed,
        out_dir=args.out,
        qtable=getattr(args, "qtable", None),
    )
    if hasattr(args, "eval_episodes"):
        kwargs["eval_episodes"] = args.eval_episodes
    if args.command == "sweep" and args.tx_power:
        kwargs["power_levels"] = tuple(args.tx_power)
    return harness.ExperimentPlan(**kwargs)


def _print_summaries(summaries) -> None:
    print(f"{'scenario':<12} {'policy':<8} {'P_t (W)':>8} {'mean (min)':>12} {'s.e.':>9}")
    for s in summaries:
        print(f"{s.scenario:<12} {s.policy:<8} {s.tx_power:>8g} {s.mean_flight_time:>12.5f} {s.std_error:>9.5f}")


def _print_paired(plan, out_dir) -> None:
    for ref in plan.scenarios:
        name, _ = harness.resolve_scenario(ref)
        path = out_dir / f"eval_{name}.csv"
        if not path.is_file():
            continue
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
        if "learned" not in rows[0]:
            continue
        learned = [float(r["learned"]) for r in rows]
        for other in ("random", "static"):
            if other in rows[0]:
                m, se = harness.paired_difference(learned, [float(r[other]) for r in rows])
                z = m / se if se > 0 else float("inf") if m > 0 else 0.0
                print(f"{name}: learned - {other} = {m:+.5f} min (s.e. {se:.5f}, {z:+.1f} s.e.)")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(message)s")
    try:
        if args.command == "validate-config":
            for path in args.paths:
                name, config = harness.resolve_scenario(path)
                print(f"{path}: ok ({config.n_ruavs} rUAVs on {config.grid.rows}x{config.grid.cols} grid)")
            return 0

        plan = _plan(args)
        if args.command == "train":
            written = harness.run_training(plan, tx_power=_single_power(args))
            for name, path in written.items():
                print(f"{name}: wrote {path}")
        elif args.command == "compare":
            summaries = harness.run_comparison(plan, tx_power=_single_power(args))
            _print_summaries(summaries)
            _print_paired(plan, plan.out_dir)
        elif args.command == "sweep":
            _print_summaries(harness.run_power_sweep(plan))
    except (ValueError, OSError, QTableFormatError) as exc:
        print(f"uavcharge: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Seeded training, paired policy evaluation and transmit-power sweeps with CSV/SVG output.

Seed derivation
---------------
* Training for (scenario, tx_power) uses ``derive_seed(master, scenario, "train", tx_power)``.
* Evaluation episode ``i`` of a scenario resets from ``derive_seed(master, scenario, i)``,
  whatever the policy or transmit power, so all policies start every episode from the
  same tUAV cell and batteries. A random-walk policy draws its moves from a second
  stream, ``derive_seed(episode_seed, "policy")``.
"""

from __future__ import annotations

import csv
import logging
import math
import random
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import plots
from .agent import (
    EpisodeRecord,
    Learned,
    Policy,
    QLearningParams,
    QTable,
    RandomWalk,
    StaticHover,
    load_qtable,
    save_qtable,
    select_action,
    train,
)
from .env import ChargingEnv, ScenarioConfig, load_scenario
from .seeding import derive_seed
from .wpt import CellIndex

log = logging.getLogger(__name__)

POLICIES = ("learned", "random", "static")
DEFAULT_POWERS = (25.0, 35.0, 45.0, 55.0)
LEARNING_CURVE_WINDOW = 500


@dataclass
class RunSummary:
    policy: str
    scenario: str
    tx_power: float
    episodes: int
    mean_flight_time: float  # minutes
    std_error: float  # minutes
    seed: int


@dataclass
class ExperimentPlan:
    scenarios: Sequence = ("scenario-1",)
    policies: Sequence[str] = POLICIES
    power_levels: Sequence[float] = DEFAULT_POWERS
    params: QLearningParams = field(default_factory=QLearningParams)
    eval_episodes: int = 2000
    seed: int = 0
    out_dir: Path = Path("results")
    # pre-trained table for `compare`; when set, no training happens there
    qtable: Path | None = None

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("plan needs at least one scenario")
        if not self.policies:
            raise ValueError("plan needs at least one policy")
        unknown = [p for p in self.policies if p not in POLICIES]
        if unknown:
            raise ValueError(f"unknown policies {unknown}; choose from {list(POLICIES)}")
        if self.eval_episodes < 1:
            raise ValueError(f"eval_episodes must be at least 1, got {self.eval_episodes}")
        self.out_dir = Path(self.out_dir)


# -- scenarios ---------------------------------------------------------------

def bundled_scenarios() -> list[str]:
    files = resources.files("uavcharge") / "scenarios"
    return sorted(p.name[: -len(".json")] for p in files.iterdir() if p.name.endswith(".json"))


def resolve_scenario(ref) -> tuple[str, ScenarioConfig]:
    """Load a scenario from a file path, or by the name of a bundled scenario."""
    path = Path(ref)
    if path.is_file():
        return path.stem, load_scenario(path)
    bundled = resources.files("uavcharge") / "scenarios" / f"{ref}.json"
    if bundled.is_file():
        with resources.as_file(bundled) as p:
            return str(ref), load_scenario(p)
    raise FileNotFoundError(f"no scenario file {ref!r} (bundled: {', '.join(bundled_scenarios())})")


# -- statistics --------------------------------------------------------------

def mean_and_se(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and standard error of the mean (zero for a single value)."""
    if not values:
        raise ValueError("need at least one value")
    m = math.fsum(values) / len(values)
    if len(values) < 2:
        return m, 0.0
    return m, statistics.stdev(values) / math.sqrt(len(values))


def paired_difference(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error of the per-episode differences a - b."""
    if len(a) != len(b):
        raise ValueError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    return mean_and_se([x - y for x, y in zip(a, b)])


# -- evaluation --------------------------------------------------------------

def episode_seed(master: int, scenario: str, index: int) -> int:
    return derive_seed(master, scenario, index)


def make_policy(name: str, config: ScenarioConfig, q: QTable | None = None) -> Policy:
    if name == "learned":
        if q is None:
            raise ValueError("the learned policy needs a Q-table")
        return Learned(q)
    if name == "random":
        return RandomWalk()
    if name == "static":
        g = config.grid
        return StaticHover(CellIndex(g.rows // 2, g.cols // 2))
    raise ValueError(f"unknown policy {name!r}")


def evaluate(config: ScenarioConfig, policy: Policy, episodes: int, master_seed: int, scenario: str) -> list[float]:
    """Greedy (epsilon = 0) rollouts; returns the mean rUAV flying time in minutes per episode."""
    env = ChargingEnv(config)
    out = []
    for i in range(episodes):
        s = episode_seed(master_seed, scenario, i)
        obs = env.reset(random.Random(s))
        prng = random.Random(derive_seed(s, "policy"))
        while not env.terminal:
            action = select_action(policy, obs, env.legal_actions(), 0.0, prng)
            obs = env.step(action).observation
        out.append(env.mean_flight_minutes())
    return out


# -- CSV ---------------------------------------------------------------------

def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


TRAIN_HEADER = ("episode", "mean_flight_time_min", "total_revenue", "epsilon")
SUMMARY_HEADER = ("scenario", "policy", "tx_power", "episodes", "mean_flight_time_min", "std_error_min", "seed")
SWEEP_HEADER = ("tx_power", "policy", "mean_flight_time_min", "std_error_min")


def write_training_csv(path, records: Sequence[EpisodeRecord]) -> None:
    _write_csv(
        Path(path),
        TRAIN_HEADER,
        ((r.episode, repr(r.mean_flight_time), repr(r.total_revenue), repr(r.epsilon)) for r in records),
    )


def _summary_row(s: RunSummary):
    return (s.scenario, s.policy, repr(s.tx_power), s.episodes, repr(s.mean_flight_time), repr(s.std_error), s.seed)


def read_summaries(path) -> list[RunSummary]:
    with open(path, newline="", encoding="utf-8") as f:
        return [
            RunSummary(
                policy=r["policy"],
                scenario=r["scenario"],
                tx_power=float(r["tx_power"]),
                episodes=int(r["episodes"]),
                mean_flight_time=float(r["mean_flight_time_min"]),
                std_error=float(r["std_error_min"]),
                seed=int(r["seed"]),
            )
            for r in csv.DictReader(f)
        ]


# -- experiments -------------------------------------------------------------

def _out(plan: ExperimentPlan) -> Path:
    try:
        plan.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {plan.out_dir}: {exc}") from None
    return plan.out_dir


def _train(name: str, config: ScenarioConfig, plan: ExperimentPlan) -> tuple[QTable, list[EpisodeRecord]]:
    seed = derive_seed(plan.seed, name, "train", config.link.tx_power)
    log.info("training %s at %g W for %d episodes", name, config.link.tx_power, plan.params.training_episodes)
    return train(config, plan.params, seed)


def run_training(plan: ExperimentPlan, tx_power: float | None = None) -> dict[str, Path]:
    """Train one table per scenario; writes train_<s>.csv, train_<s>.svg and qtable_<s>.tsv.

    When ``plan.qtable`` is set and there is a single scenario, the table is saved
    there instead of the output directory.
    """
    out = _out(plan)
    written = {}
    for ref in plan.scenarios:
        name, config = resolve_scenario(ref)
        if tx_power is not None:
            config = config.with_tx_power(tx_power)
        q, records = _train(name, config, plan)

        csv_path = out / f"train_{name}.csv"
        write_training_csv(csv_path, records)
        if records:
            plots.learning_curve(
                csv_path, out / f"train_{name}.svg", LEARNING_CURVE_WINDOW, title=f"{name}, {config.link.tx_power:g} W"
            )
        q_path = Path(plan.qtable) if plan.qtable is not None and len(plan.scenarios) == 1 else out / f"qtable_{name}.tsv"
        save_qtable(q, q_path)
        written[name] = csv_path
    return written


def _compare_one(name: str, config: ScenarioConfig, plan: ExperimentPlan, q: QTable | None):
    """Evaluate every policy in the plan on shared episode seeds."""
    if "learned" in plan.policies and q is None:
        q, _ = _train(name, config, plan)
    logs = {}
    for pname in plan.policies:
        policy = make_policy(pname, config, q)
        logs[pname] = evaluate(config, policy, plan.eval_episodes, plan.seed, name)
    summaries = []
    for pname, values in logs.items():
        m, se = mean_and_se(values)
        summaries.append(RunSummary(pname, name, config.link.tx_power, len(values), m, se, plan.seed))
    return summaries, logs


def run_comparison(plan: ExperimentPlan, tx_power: float | None = None) -> list[RunSummary]:
    """Per scenario: compare_<s>.csv (mean and standard error per policy), eval_<s>.csv
    (per-episode flying times) and compare_<s>.svg."""
    out = _out(plan)
    if plan.qtable is not None and not Path(plan.qtable).is_file():
        raise FileNotFoundError(f"Q-table {plan.qtable} not found")
    all_summaries = []
    for ref in plan.scenarios:
        name, config = resolve_scenario(ref)
        if tx_power is not None:
            config = config.with_tx_power(tx_power)
        q = load_qtable(plan.qtable) if plan.qtable is not None else None
        summaries, logs = _compare_one(name, config, plan, q)

        _write_csv(
            out / f"eval_{name}.csv",
            ("episode",) + tuple(logs),
            ((i,) + tuple(repr(logs[p][i]) for p in logs) for i in range(plan.eval_episodes)),
        )
        csv_path = out / f"compare_{name}.csv"
        _write_csv(csv_path, SUMMARY_HEADER, (_summary_row(s) for s in summaries))
        plots.comparison_bars(csv_path, out / f"compare_{name}.svg", title=f"{name}, {config.link.tx_power:g} W")
        all_summaries.extend(summaries)
    return all_summaries


def run_power_sweep(plan: ExperimentPlan) -> list[RunSummary]:
    """Train and evaluate every policy at each transmit power; writes sweep_<s>.csv/.svg."""
    if not plan.power_levels:
        raise ValueError("power sweep needs at least one power level")
    out = _out(plan)
    all_summaries = []
    for ref in plan.scenarios:
        name, base = resolve_scenario(ref)
        summaries = []
        for p in plan.power_levels:
            config = base.with_tx_power(p)
            s, _ = _compare_one(name, config, plan, None)
            summaries.extend(s)
        csv_path = out / f"sweep_{name}.csv"
        _write_csv(
            csv_path,
            SWEEP_HEADER,
            ((repr(s.tx_power), s.policy, repr(s.mean_flight_time), repr(s.std_error)) for s in summaries),
        )
        plots.sweep_bars(csv_path, out / f"sweep_{name}.svg", title=name)
        all_summaries.extend(summaries)
    return all_summaries

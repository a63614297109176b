"""Tabular Q-learning for the charger trajectory, plus the two fixed baselines."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Union

from .env import N_ACTIONS, Action, ChargingEnv, Observation, ScenarioConfig
from .seeding import derive_seed
from .wpt import CellIndex


@dataclass(frozen=True)
class QLearningParams:
    learning_rate: float = 0.4
    discount: float = 0.95
    epsilon_initial: float = 1.0
    epsilon_decay_episodes: int = 40_000
    training_episodes: int = 50_000

    def __post_init__(self):
        if not 0 < self.learning_rate <= 1:
            raise ValueError(f"learning_rate must lie in (0, 1], got {self.learning_rate}")
        if not 0 <= self.discount < 1:
            raise ValueError(f"discount must lie in [0, 1), got {self.discount}")
        if not 0 <= self.epsilon_initial <= 1:
            raise ValueError(f"epsilon_initial must lie in [0, 1], got {self.epsilon_initial}")
        if self.training_episodes < 0:
            raise ValueError(f"training_episodes must be non-negative, got {self.training_episodes}")
        if not 0 <= self.epsilon_decay_episodes <= self.training_episodes:
            raise ValueError(
                f"epsilon_decay_episodes must lie in [0, training_episodes={self.training_episodes}], "
                f"got {self.epsilon_decay_episodes}"
            )

    @classmethod
    def for_episodes(cls, episodes: int, **kwargs) -> QLearningParams:
        """Defaults rescaled to `episodes`, keeping exploration over the first 80% of training."""
        decay = min(episodes, max(1, round(0.8 * episodes))) if episodes else 0
        return cls(training_episodes=episodes, epsilon_decay_episodes=decay, **kwargs)


class QTable:
    """Observation -> list of one value per `Action`; unseen observations read as all zeros."""

    def __init__(self, values: dict | None = None):
        self.values: dict[Observation, list[float]] = {} if values is None else values

    def row(self, obs) -> list[float]:
        return self.values.get(obs) or [0.0] * N_ACTIONS

    def __getitem__(self, key) -> float:
        obs, action = key
        row = self.values.get(obs)
        return 0.0 if row is None else row[action]

    def __setitem__(self, key, value: float) -> None:
        obs, action = key
        row = self.values.get(obs)
        if row is None:
            row = self.values[obs] = [0.0] * N_ACTIONS
        row[action] = float(value)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented
        return self.values == other.values

    def __repr__(self) -> str:
        return f"QTable({len(self.values)} observations)"


@dataclass(frozen=True)
class Learned:
    q: QTable = field(repr=False)
    name: str = "learned"


@dataclass(frozen=True)
class RandomWalk:
    name: str = "random"


@dataclass(frozen=True)
class StaticHover:
    target: CellIndex = CellIndex(1, 1)
    name: str = "static"


Policy = Union[Learned, RandomWalk, StaticHover]


@dataclass
class EpisodeRecord:
    episode: int
    mean_flight_time: float  # minutes, averaged over receivers
    total_revenue: float
    epsilon: float


def epsilon(params: QLearningParams, episode: int) -> float:
    """Exploration rate for `episode`: linear from epsilon_initial down to zero, then held at zero."""
    if episode < 0:
        raise ValueError(f"episode must be non-negative, got {episode}")
    if params.epsilon_decay_episodes == 0:
        return 0.0
    return max(0.0, params.epsilon_initial * (1.0 - episode / params.epsilon_decay_episodes))


def best_action(q: QTable, obs, legal: Iterable[Action]) -> Action:
    # max() keeps the first maximal element, so ties go to the lowest enumeration index
    row = q.values.get(obs)
    legal = tuple(legal)
    if not legal:
        raise ValueError("no legal actions")
    if row is None:
        return min(legal)
    return max(sorted(legal), key=row.__getitem__)


def step_toward(cell, target) -> Action:
    """King move that closes the gap to `target` fastest; HOVER when already there."""
    dr = (target[0] > cell[0]) - (target[0] < cell[0])
    dc = (target[1] > cell[1]) - (target[1] < cell[1])
    return _BY_DELTA[(dr, dc)]


_BY_DELTA = {a.delta: a for a in Action}


def uniform_choice(rng: random.Random, legal):
    return legal[int(rng.random() * len(legal))]


def select_action(policy: Policy, obs, legal, eps: float, rng: random.Random) -> Action:
    legal = tuple(legal)
    if isinstance(policy, Learned):
        if rng.random() < eps:
            return uniform_choice(rng, legal)
        return best_action(policy.q, obs, legal)
    if isinstance(policy, RandomWalk):
        return uniform_choice(rng, legal)
    if isinstance(policy, StaticHover):
        return step_toward(obs[0], policy.target)
    raise TypeError(f"unknown policy {policy!r}")


def update(
    q: QTable,
    obs,
    action: Action,
    revenue: float,
    next_obs,
    next_legal,
    terminal: bool,
    params: QLearningParams,
) -> float:
    """Apply one Q-learning backup in place and return the new value of (obs, action).

    The bootstrap term maximises only over actions legal at `next_obs`; a terminal
    transition bootstraps from zero.
    """
    target = revenue
    if not terminal:
        nrow = q.values.get(next_obs)
        if nrow is not None:
            target += params.discount * max(nrow[a] for a in next_legal)
    row = q.values.get(obs)
    if row is None:
        row = q.values[obs] = [0.0] * N_ACTIONS
    new = (1.0 - params.learning_rate) * row[action] + params.learning_rate * target
    row[action] = new
    return new


def train(
    config: ScenarioConfig,
    params: QLearningParams,
    seed: int,
    on_episode: Callable[[EpisodeRecord], None] | None = None,
) -> tuple[QTable, list[EpisodeRecord]]:
    """Run `params.training_episodes` epsilon-greedy episodes from an all-zero table.

    Resets and exploration draw from two separate streams derived from `seed`, so
    the sequence of initial conditions does not depend on what the agent does.
    """
    env = ChargingEnv(config)
    q = QTable()
    table = q.values
    reset_rng = random.Random(derive_seed(seed, "train-reset"))
    explore_rng = random.Random(derive_seed(seed, "train-explore"))
    alpha = params.learning_rate
    keep = 1.0 - alpha
    gamma = params.discount
    records = []

    for ep in range(params.training_episodes):
        eps = epsilon(params, ep)
        obs = env.reset(reset_rng)
        legal = env.legal_actions()
        total = 0.0
        while True:
            row = table.get(obs)
            if explore_rng.random() < eps:
                action = uniform_choice(explore_rng, legal)
            elif row is None:
                action = legal[0]
            else:
                action = max(legal, key=row.__getitem__)

            out = env.step(action)
            total += out.revenue
            next_obs = out.observation
            next_legal = env.legal_actions()

            target = out.revenue
            if not out.terminal:
                nrow = table.get(next_obs)
                if nrow is not None:
                    target += gamma * max([nrow[a] for a in next_legal])
            if row is None:
                row = table[obs] = [0.0] * N_ACTIONS
            row[action] = keep * row[action] + alpha * target

            if out.terminal:
                break
            obs, legal = next_obs, next_legal

        rec = EpisodeRecord(ep, env.mean_flight_minutes(), total, eps)
        records.append(rec)
        if on_episode is not None:
            on_episode(rec)
    return q, records


# -- persistence -------------------------------------------------------------

QTABLE_HEADER = "tuav_row\ttuav_col\tbattery_levels\talive\taction\tvalue"


class QTableFormatError(ValueError):
    pass


def save_qtable(q: QTable, path) -> None:
    """Write one tab-separated record per (observation, action) with 17 significant digits."""
    lines = [QTABLE_HEADER]
    for obs in sorted(q.values):
        cell, levels, alive = obs
        lv = " ".join(str(x) for x in levels)
        al = " ".join(str(int(x)) for x in alive)
        for action, value in zip(Action, q.values[obs]):
            lines.append(f"{cell[0]}\t{cell[1]}\t{lv}\t{al}\t{action.name}\t{value:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_flag(text: str) -> bool:
    if text not in ("0", "1"):
        raise ValueError(f"alive flag must be 0 or 1, got {text!r}")
    return text == "1"


def load_qtable(path) -> QTable:
    q = QTable()
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != QTABLE_HEADER:
            raise QTableFormatError(f"{path}:1: expected header {QTABLE_HEADER!r}, got {header!r}")
        for lineno, line in enumerate(f, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 6:
                raise QTableFormatError(f"{path}:{lineno}: expected 6 tab-separated fields, got {len(fields)}")
            try:
                cell = CellIndex(int(fields[0]), int(fields[1]))
                levels = tuple(int(x) for x in fields[2].split())
                alive = tuple(_parse_flag(x) for x in fields[3].split())
                action = Action[fields[4]]
                value = float(fields[5])
            except KeyError:
                raise QTableFormatError(f"{path}:{lineno}: unknown action {fields[4]!r}") from None
            except ValueError as exc:
                raise QTableFormatError(f"{path}:{lineno}: {exc}") from None
            if not math.isfinite(value):
                raise QTableFormatError(f"{path}:{lineno}: non-finite value {fields[5]}")
            q[Observation(cell, levels, alive), action] = value
    return q

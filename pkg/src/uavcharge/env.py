"""Episode dynamics for one charger UAV serving a fixed fleet of hovering receivers.

The environment is a small state machine. `ChargingEnv` owns mutable episode
state and is what the trainer drives; `reset`, `step` and `observe` are the
value-style equivalents operating on `EnvState` snapshots.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from functools import lru_cache
from pathlib import Path
from typing import NamedTuple

from .wpt import SECONDS_PER_HOUR, CellIndex, GridSpec, WptLink, cell_distance, harvested_power


class ContractError(RuntimeError):
    """An operation was called outside its precondition (illegal move, finished episode)."""


class Action(IntEnum):
    HOVER = 0
    N = 1
    NE = 2
    E = 3
    SE = 4
    S = 5
    SW = 6
    W = 7
    NW = 8

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]


# (d_row, d_col); row 0 is the northern edge
_DELTAS = {
    Action.HOVER: (0, 0),
    Action.N: (-1, 0),
    Action.NE: (-1, 1),
    Action.E: (0, 1),
    Action.SE: (1, 1),
    Action.S: (1, 0),
    Action.SW: (1, -1),
    Action.W: (0, -1),
    Action.NW: (-1, -1),
}

N_ACTIONS = len(Action)

_ENERGY_UNITS = {"Wh": 1.0, "J": SECONDS_PER_HOUR}


def apply_action(cell, action: Action) -> CellIndex:
    dr, dc = _DELTAS[action]
    return CellIndex(cell[0] + dr, cell[1] + dc)


def valid_actions(grid: GridSpec, cell) -> tuple[Action, ...]:
    """Moves that keep the charger on the grid, in enumeration order."""
    cell = grid.check(cell)
    return tuple(a for a in Action if grid.contains(apply_action(cell, a)))


@dataclass(frozen=True)
class ScenarioConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    ruav_cells: tuple[CellIndex, ...] = (CellIndex(0, 0), CellIndex(1, 1), CellIndex(2, 2))
    link: WptLink = field(default_factory=WptLink)
    consumption_power: float = 50.0  # W
    battery_capacity: float = 100.0  # Wh
    initial_battery_range: tuple[float, float] = (60.0, 100.0)  # Wh
    time_step: float = 20.0  # s
    battery_levels: int = 5
    mu: float = 100.0
    nu: float = -50.0
    # unit of harvested energy inside the revenue; "J" or "Wh"
    revenue_energy_unit: str = "J"
    # expose which receivers have left the network as part of the observation
    observe_departures: bool = True

    def __post_init__(self):
        cells = tuple(self.grid.check(c) for c in self.ruav_cells)
        object.__setattr__(self, "ruav_cells", cells)
        lo, hi = (float(x) for x in self.initial_battery_range)
        object.__setattr__(self, "initial_battery_range", (lo, hi))

        if not cells:
            raise ValueError("ruav_cells must not be empty")
        if len(set(cells)) != len(cells):
            raise ValueError(f"ruav_cells must be pairwise distinct, got {list(cells)}")
        if not 0 < lo <= hi <= self.battery_capacity:
            raise ValueError(
                f"initial_battery_range must satisfy 0 < min <= max <= battery_capacity, "
                f"got [{lo}, {hi}] with capacity {self.battery_capacity}"
            )
        if not self.consumption_power > 0:
            raise ValueError(f"consumption_power must be positive, got {self.consumption_power}")
        if not self.time_step > 0:
            raise ValueError(f"time_step must be positive, got {self.time_step}")
        if self.battery_levels < 2:
            raise ValueError(f"battery_levels must be at least 2, got {self.battery_levels}")
        if self.revenue_energy_unit not in _ENERGY_UNITS:
            raise ValueError(f"revenue_energy_unit must be one of {sorted(_ENERGY_UNITS)}, got {self.revenue_energy_unit!r}")
        # Episodes only terminate if every receiver drains faster than it can harvest.
        peak = harvested_power(self.link, self.grid.tx_altitude_offset)
        if peak >= self.consumption_power:
            raise ValueError(
                f"peak harvested power {peak:.6g} W must stay below consumption "
                f"{self.consumption_power} W or episodes never end"
            )

    @property
    def n_ruavs(self) -> int:
        return len(self.ruav_cells)

    @property
    def energy_weight(self) -> float:
        """Revenue per watt-hour harvested."""
        return self.mu * _ENERGY_UNITS[self.revenue_energy_unit]

    def replace(self, **changes) -> ScenarioConfig:
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return ScenarioConfig(**data)

    def with_tx_power(self, tx_power: float) -> ScenarioConfig:
        link = WptLink(**{**asdict(self.link), "tx_power": float(tx_power)})
        return self.replace(link=link)

    def to_dict(self) -> dict:
        return {
            "grid": asdict(self.grid),
            "ruav_cells": [list(c) for c in self.ruav_cells],
            "link": asdict(self.link),
            "consumption_power": self.consumption_power,
            "battery_capacity": self.battery_capacity,
            "initial_battery_range": list(self.initial_battery_range),
            "time_step": self.time_step,
            "battery_levels": self.battery_levels,
            "mu": self.mu,
            "nu": self.nu,
            "revenue_energy_unit": self.revenue_energy_unit,
            "observe_departures": self.observe_departures,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ScenarioConfig:
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        if "grid" in data:
            data["grid"] = GridSpec(**data["grid"])
        if "link" in data:
            data["link"] = WptLink(**data["link"])
        if "ruav_cells" in data:
            data["ruav_cells"] = tuple(CellIndex(*c) for c in data["ruav_cells"])
        return cls(**data)


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from None
    try:
        return ScenarioConfig.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from None


def save_scenario(config: ScenarioConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")


def discretize_battery(battery: float, config: ScenarioConfig) -> int:
    """Equal-width bin index of `battery` over [0, capacity]; a full battery lands in the top bin."""
    if not 0 <= battery <= config.battery_capacity:
        raise ValueError(f"battery {battery} outside [0, {config.battery_capacity}]")
    width = config.battery_capacity / config.battery_levels
    return min(int(math.floor(battery / width)), config.battery_levels - 1)


@dataclass
class RUavStatus:
    cell: CellIndex
    battery: float  # Wh
    alive: bool = True
    flight_time: float = 0.0  # s


@dataclass
class EnvState:
    tuav_cell: CellIndex
    ruavs: list[RUavStatus]
    step_count: int = 0

    @property
    def terminal(self) -> bool:
        return not any(r.alive for r in self.ruavs)


class Observation(NamedTuple):
    tuav_cell: CellIndex
    battery_levels: tuple[int, ...]
    # per-receiver alive flags; empty when the scenario does not observe departures
    alive: tuple[bool, ...] = ()


class StepOutcome(NamedTuple):
    revenue: float
    harvested_total: float  # Wh
    newly_dead: int
    observation: Observation
    terminal: bool


class _Tables:
    """Per-config lookups that never change during an episode."""

    def __init__(self, config: ScenarioConfig):
        grid = config.grid
        self.cells = grid.cells()
        self.legal = {c: valid_actions(grid, c) for c in self.cells}
        self.dest = {c: {a: apply_action(c, a) for a in self.legal[c]} for c in self.cells}
        self.power = {
            c: tuple(harvested_power(config.link, cell_distance(grid, c, r)) for r in config.ruav_cells)
            for c in self.cells
        }


@lru_cache(maxsize=64)
def _tables(config: ScenarioConfig) -> _Tables:
    return _Tables(config)


class ChargingEnv:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self._t = _tables(config)
        self._bin_width = config.battery_capacity / config.battery_levels
        self._top = config.battery_levels - 1
        self._departures = config.observe_departures
        self.cell: CellIndex | None = None
        self.battery: list[float] = []
        self.alive: list[bool] = []
        self.flight_time: list[float] = []
        self.step_count = 0

    def reset(self, rng: random.Random) -> Observation:
        """Random start cell, then one uniform battery draw per receiver."""
        cfg = self.config
        cells = self._t.cells
        self.cell = cells[rng.randrange(len(cells))]
        lo, hi = cfg.initial_battery_range
        self.battery = [rng.uniform(lo, hi) for _ in cfg.ruav_cells]
        self.alive = [True] * cfg.n_ruavs
        self.flight_time = [0.0] * cfg.n_ruavs
        self.step_count = 0
        return self.observation()

    @property
    def terminal(self) -> bool:
        return not any(self.alive)

    def legal_actions(self) -> tuple[Action, ...]:
        return self._t.legal[self.cell]

    def observation(self) -> Observation:
        w, top = self._bin_width, self._top
        levels = tuple(min(int(b / w), top) for b in self.battery)
        return Observation(self.cell, levels, tuple(self.alive) if self._departures else ())

    def step(self, action: Action) -> StepOutcome:
        if self.terminal:
            raise ContractError("cannot step a finished episode")
        dest = self._t.dest[self.cell].get(action)
        if dest is None:
            raise ContractError(f"action {Action(action).name} is illegal at cell {tuple(self.cell)}")
        cfg = self.config
        T = cfg.time_step
        C = cfg.consumption_power
        drain = C * T / SECONDS_PER_HOUR
        battery, alive, flight = self.battery, self.alive, self.flight_time

        self.cell = dest
        harvested = 0.0
        deaths = 0
        for i, p in enumerate(self._t.power[dest]):
            if not alive[i]:
                continue
            b = battery[i]
            h = p * T / SECONDS_PER_HOUR
            nb = b + h - drain
            if nb <= 0.0:
                # depleted inside the step: credit time up to the exact empty instant
                t = b * SECONDS_PER_HOUR / (C - p)
                harvested += p * t / SECONDS_PER_HOUR
                flight[i] += t
                battery[i] = 0.0
                alive[i] = False
                deaths += 1
            else:
                harvested += h
                flight[i] += T
                battery[i] = min(nb, cfg.battery_capacity)
        self.step_count += 1

        revenue = cfg.energy_weight * harvested + cfg.nu * deaths
        return StepOutcome(revenue, harvested, deaths, self.observation(), not any(alive))

    def mean_flight_minutes(self) -> float:
        return sum(self.flight_time) / len(self.flight_time) / 60.0

    @property
    def state(self) -> EnvState:
        return EnvState(
            tuav_cell=self.cell,
            ruavs=[
                RUavStatus(c, b, a, f)
                for c, b, a, f in zip(self.config.ruav_cells, self.battery, self.alive, self.flight_time)
            ],
            step_count=self.step_count,
        )

    def load_state(self, state: EnvState) -> None:
        grid = self.config.grid
        if [r.cell for r in state.ruavs] != list(self.config.ruav_cells):
            raise ValueError("state receiver cells do not match the scenario")
        self.cell = grid.check(state.tuav_cell)
        self.battery = [float(r.battery) for r in state.ruavs]
        self.alive = [bool(r.alive) for r in state.ruavs]
        self.flight_time = [float(r.flight_time) for r in state.ruavs]
        self.step_count = state.step_count


def reset(config: ScenarioConfig, rng: random.Random) -> tuple[EnvState, Observation]:
    env = ChargingEnv(config)
    obs = env.reset(rng)
    return env.state, obs


def step(state: EnvState, action: Action, config: ScenarioConfig) -> tuple[EnvState, StepOutcome]:
    env = ChargingEnv(config)
    env.load_state(state)
    outcome = env.step(action)
    return env.state, outcome


def observe(state: EnvState, config: ScenarioConfig) -> Observation:
    levels = tuple(discretize_battery(r.battery, config) for r in state.ruavs)
    alive = tuple(r.alive for r in state.ruavs) if config.observe_departures else ()
    return Observation(CellIndex(*state.tuav_cell), levels, alive)

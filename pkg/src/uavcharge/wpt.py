"""Grid geometry and free-space RF power transfer between a charger and receivers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

SPEED_OF_LIGHT = 299_792_458.0  # m/s
SECONDS_PER_HOUR = 3600.0


class CellIndex(NamedTuple):
    row: int
    col: int


@dataclass(frozen=True)
class GridSpec:
    rows: int = 3
    cols: int = 3
    cell_side: float = 10.0
    # vertical clearance of the charger above the receivers' hover plane
    tx_altitude_offset: float = 5.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must have at least one row and column, got {self.rows}x{self.cols}")
        if not self.cell_side > 0:
            raise ValueError(f"cell_side must be positive, got {self.cell_side}")
        if not self.tx_altitude_offset > 0:
            raise ValueError(f"tx_altitude_offset must be positive, got {self.tx_altitude_offset}")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def contains(self, cell) -> bool:
        return 0 <= cell[0] < self.rows and 0 <= cell[1] < self.cols

    def check(self, cell) -> CellIndex:
        if not self.contains(cell):
            raise ValueError(f"cell {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return CellIndex(int(cell[0]), int(cell[1]))

    def cells(self) -> list[CellIndex]:
        """All cells in row-major order."""
        return [CellIndex(r, c) for r in range(self.rows) for c in range(self.cols)]


@dataclass(frozen=True)
class WptLink:
    tx_power: float = 35.0  # W
    tx_gain_dbi: float = 25.0
    rx_gain_dbi: float = 25.0
    frequency: float = 25e9  # Hz
    # RF-to-DC conversion efficiency at the receiver
    efficiency: float = 1.0

    def __post_init__(self):
        if self.tx_power < 0:
            raise ValueError(f"tx_power must be non-negative, got {self.tx_power}")
        if not self.frequency > 0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if not 0 <= self.efficiency <= 1:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def tx_gain(self) -> float:
        return db_to_linear(self.tx_gain_dbi)

    @property
    def rx_gain(self) -> float:
        return db_to_linear(self.rx_gain_dbi)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def cell_distance(grid: GridSpec, tx, rx) -> float:
    """Slant range in metres from the charger above cell `tx` to a receiver at cell `rx`."""
    tx = grid.check(tx)
    rx = grid.check(rx)
    dx = (tx.row - rx.row) * grid.cell_side
    dy = (tx.col - rx.col) * grid.cell_side
    return math.sqrt(dx * dx + dy * dy + grid.tx_altitude_offset ** 2)


def received_power(link: WptLink, d: float) -> float:
    """Friis free-space received power in watts at range `d` metres."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    lam = link.wavelength
    return link.tx_power * link.tx_gain * link.rx_gain * lam * lam / (4.0 * math.pi * d) ** 2


def harvested_power(link: WptLink, d: float) -> float:
    return link.efficiency * received_power(link, d)


def step_energy(link: WptLink, d: float, duration: float) -> float:
    """Energy in watt-hours harvested at range `d` over `duration` seconds."""
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    return harvested_power(link, d) * duration / SECONDS_PER_HOUR

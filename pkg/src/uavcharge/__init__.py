"""Q-learning trajectory control for a UAV that recharges hovering UAV base stations over RF."""

from .agent import (
    EpisodeRecord,
    Learned,
    QLearningParams,
    QTable,
    RandomWalk,
    StaticHover,
    best_action,
    epsilon,
    load_qtable,
    save_qtable,
    select_action,
    train,
    update,
)
from .env import (
    Action,
    ChargingEnv,
    ContractError,
    EnvState,
    Observation,
    RUavStatus,
    ScenarioConfig,
    StepOutcome,
    discretize_battery,
    load_scenario,
    observe,
    reset,
    step,
    valid_actions,
)
from .wpt import CellIndex, GridSpec, WptLink, cell_distance, received_power, step_energy

__version__ = "0.1.0"

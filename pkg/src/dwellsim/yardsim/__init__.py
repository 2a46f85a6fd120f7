"""Yard stacking simulation: layout, grid state, strategies and the replay engine."""

from dwellsim.yardsim.engine import (
    EventEffects, Move, SimulationResult, Simulator, Strategy, run_simulation, simulation_from_dict,
)
from dwellsim.yardsim.layout import Position, YardLayout
from dwellsim.yardsim.state import EMPTY, YardState, baseline_position, current_p_icdt, find_best_position

__all__ = [
    "EMPTY", "EventEffects", "Move", "Position", "SimulationResult", "Simulator", "Strategy", "YardLayout",
    "YardState", "baseline_position", "current_p_icdt", "find_best_position", "run_simulation",
    "simulation_from_dict",
]

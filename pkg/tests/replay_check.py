"""Run the simulator while rebuilding the yard independently from its move log."""

from __future__ import annotations

import numpy as np

from dwellsim.edi.records import EDIState
from dwellsim.yardsim import run_simulation
from oracles import ReplayGrid


def run_with_replay(recs, lay, strategy, forecaster=None, seed=0):
    """Assert per-departure recounts, grid agreement and box conservation after every event."""
    replay = ReplayGrid()
    counts = {"stacked": 0, "temp": 0, "out": 0, "arrived": 0}

    def observe(sim, fx):
        ev = fx.event
        if ev.state is EDIState.OUT and not fx.ignored:
            assert replay.departure_count(ev.container_id) == fx.rl
        for m in fx.moves:
            replay.apply(m)
        assert replay.as_columns() == {
            int(c): [sim.state.ids[k] for k in sim.state.grid[c, : sim.state.top[c]]]
            for c in np.flatnonzero(sim.state.top)
        }
        if ev.state is EDIState.IN:
            counts["arrived"] += 1
            counts["temp" if fx.overflow else "stacked"] += 1
        elif ev.state is EDIState.OUT and not fx.ignored:
            counts["stacked"] -= 1
            counts["out"] += 1
        assert counts["stacked"] + counts["out"] + counts["temp"] == counts["arrived"]
        assert sim.state.stacked == counts["stacked"]

    res = run_simulation(recs, lay, strategy, forecaster, seed, trace=True, check_invariants=True,
                         observer=observe)
    return res, replay

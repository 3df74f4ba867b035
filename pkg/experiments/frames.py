#
# frames.py
#
# Snapshots of cellular automaton cell values and the two value adjustments used when watching
# them: brightness amplification of a rendered frame, and RMS stabilization of the running
# machine.
#

from __future__ import annotations
from dataclasses import dataclass, replace
from functools import lru_cache
import logging
from typing import Tuple

import numpy as np

from operations import standard_signature
from machine import MachineState
from .ca import cell_node
from .grid import GridSpec


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Frame:
    t: int
    values: np.ndarray      # shape (height, width), row-major like the grid's cells

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@lru_cache(maxsize=8)
def _cell_names(width: int, height: int) -> Tuple[str, ...]:
    grid = GridSpec(width=width, height=height)
    sig = standard_signature()
    return tuple(cell_node(x, y, sig) for x, y in grid.cells())

def frame_from_state(state: MachineState, grid: GridSpec) -> Frame:
    """
    Frame of the cells' propagator outputs; inactive cells read 0.
    """
    x = state.x_values
    values = np.array([ x.get(name, 0.0) for name in _cell_names(grid.width, grid.height) ], dtype=np.float64)
    return Frame(t=state.t, values=values.reshape(grid.height, grid.width))

def amplify_frame(frame: Frame) -> Frame:
    """
    Scales a frame so its maximal absolute value becomes 1. All-zero frames are returned as is.
    """
    peak = float(np.max(np.abs(frame.values))) if frame.values.size > 0 else 0.0
    if peak == 0.0:
        return frame
    return Frame(t=frame.t, values=frame.values / peak)

def stabilize(state: MachineState, target_rms: float, grid: GridSpec) -> MachineState:
    """
    Step hook keeping the cells from relaxing to zero. If the RMS of the cell outputs is positive
    but below `target_rms`, the active cell outputs are rescaled to that RMS and clamped to
    [-1, 1]. Use with functools.partial as the `adjust` hook of machine.step.

    Parameters
    ----------
    state : MachineState
        Intermediate state of the tick (outputs at t + 1 computed, inputs not yet).
    target_rms : float
        Target RMS (> 0).
    grid : GridSpec
        Grid the cells belong to.

    Returns
    -------
    MachineState
        `state` itself if no rescaling was needed, otherwise a copy with adjusted outputs.
    """
    if target_rms <= 0.0:
        raise ValueError(f"target_rms must be > 0, got {target_rms}")
    names = _cell_names(grid.width, grid.height)
    x = state.x_values
    values = np.array([ x.get(name, 0.0) for name in names ], dtype=np.float64)
    rms = float(np.sqrt(np.mean(values * values)))
    if rms == 0.0 or rms >= target_rms:
        return state
    scaled = np.clip(values * (target_rms / rms), -1.0, 1.0)
    adjusted = dict(x)
    for name, value in zip(names, scaled):
        if name in adjusted:
            adjusted[name] = float(value)
    logger.debug(f"t={state.t}: stabilized cell RMS {rms:.4g} -> {target_rms:.4g}")
    return replace(state, x_values=adjusted)

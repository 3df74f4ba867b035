#
# ca.py
#
# Continuous cellular automata as programs. Every cell is one propagator node `prop cell_<x>_<y>`
# whose single input column reads
#
#   - its initialization constant (`white init` or `black init`) with weight 1 before the switch
#   - the pattern's neighbor propagators with the pattern weights after the switch
#
# The switch is abrupt at t_switch, or a linear cross-fade over [t_switch, t_switch + ramp]. A
# second pattern can be faded in later over [morph_start, morph_start + morph_ramp].
#

from __future__ import annotations
import logging
from typing import Dict, FrozenSet, List, Sequence, Tuple

from pydantic import BaseModel, Field, NonNegativeInt, model_validator

from signature import Signature, input_node_name, output_node_name
from operations import standard_signature
from elements import ConstraintPolicy, ElementSource, ExternalSource, Interpolation, Schedule, ViolationMode
from machine import CoefficientMatrix, Program
from .grid import CellInit, ConnectivityPattern, GridSpec, InitSpec, PatternError


logger = logging.getLogger(__name__)

PROPAGATOR = "prop"
INIT_SUFFIX = "init"


class CAConfig(BaseModel):
    p: float = Field(default=0.995, ge=0.0, le=1.0)
    t_switch: NonNegativeInt = 5
    ramp: NonNegativeInt = 0
    seed: int = 0
    morph_start: NonNegativeInt | None = None
    morph_ramp: NonNegativeInt = 0

    @model_validator(mode="after")
    def check_phases(self) -> CAConfig:
        if self.morph_start is not None and self.morph_start < self.t_switch + self.ramp:
            raise ValueError(f"morph_start ({self.morph_start}) must not precede the end of the switch ({self.t_switch + self.ramp})")
        return self


def cell_node(x: int, y: int, sig: Signature) -> str:
    return output_node_name(PROPAGATOR, GridSpec.cell_name(x, y), sig)

def cell_input(x: int, y: int, sig: Signature) -> str:
    return input_node_name(cell_node(x, y, sig), 1, sig)

def init_node(kind: CellInit, sig: Signature) -> str:
    return output_node_name(kind.value, INIT_SUFFIX, sig)


####################################################################################################
# Schedules
####################################################################################################

def _schedule(points: Sequence[Tuple[int, float]], mode: Interpolation) -> Schedule:
    """
    Schedule from phase breakpoints given in nondecreasing time order. A breakpoint at the same
    time as the previous one replaces it; one that lies before it is already implied and dropped.
    """
    merged: List[Tuple[int, float]] = []
    for t, value in points:
        if merged and t < merged[-1][0]:
            continue
        if merged and t == merged[-1][0]:
            merged[-1] = (t, value)
        else:
            merged.append((t, value))
    return Schedule(points=tuple(merged), mode=mode)

def _transition(start: int, length: int, before: float, after: float, mode: Interpolation) -> List[Tuple[int, float]]:
    if mode == Interpolation.STEP:
        return [ (start, after) ]
    if length > 0:
        return [ (start, before), (start + length, after) ]
    # Abrupt change expressed with linear interpolation on integer times
    return [ (start - 1, before), (start, after) ]

def _init_schedule(config: CAConfig, mode: Interpolation) -> Schedule:
    return _schedule([ (0, 1.0) ] + _transition(config.t_switch, config.ramp, 1.0, 0.0, mode), mode)

def _neighbor_schedule(config: CAConfig, weight: float, morph_weight: float | None, mode: Interpolation) -> Schedule:
    points = [ (0, 0.0) ] + _transition(config.t_switch, config.ramp, 0.0, weight, mode)
    if morph_weight is not None:
        points += _transition(config.morph_start, config.morph_ramp, weight, morph_weight, mode)
    return _schedule(points, mode)


####################################################################################################
# Program Construction
####################################################################################################

def build_ca_program(
    grid: GridSpec,
    pattern: ConnectivityPattern,
    init: InitSpec,
    config: CAConfig | None = None,
    morph_to: ConnectivityPattern | None = None
) -> Program:
    """
    Builds the cellular automaton program.

    Parameters
    ----------
    grid : GridSpec
        Grid dimensions.
    pattern : ConnectivityPattern
        Connectivity in effect after the switch.
    init : InitSpec
        Initialization configuration before the switch. Cells initialized to `none` read nothing
        until the switch.
    config : CAConfig | None
        Propagation probability, phase timing and seed. Defaults to CAConfig().
    morph_to : ConnectivityPattern | None
        Optional second connectivity faded in from config.morph_start (defaulting to the end of
        the switch) over config.morph_ramp steps.

    Returns
    -------
    Program
        Substochastic program watching the cell at (0, 0). Cells with identical input columns
        share one column.
    """
    config = config if config is not None else CAConfig()
    if morph_to is not None and config.morph_start is None:
        config = config.model_copy(update={ "morph_start": config.t_switch + config.ramp })
    sig = standard_signature(p=config.p)
    linear = config.ramp > 0 or (morph_to is not None and config.morph_ramp > 0)
    mode = Interpolation.LINEAR if linear else Interpolation.STEP

    weights = pattern.neighbors(grid)
    morph_weights = morph_to.neighbors(grid) if morph_to is not None else None
    assignment = init.assign(grid)
    init_source = ExternalSource(schedule=_init_schedule(config, mode))
    schedules: Dict[Tuple[float, float | None], ExternalSource] = {}

    matrix = CoefficientMatrix()
    for x, y in grid.cells():
        column = cell_input(x, y, sig)
        cell_init = assignment[(x, y)]
        if cell_init != CellInit.NONE:
            matrix.set(column, init_node(cell_init, sig), init_source)
        cell_weights = weights[(x, y)]
        cell_morph = morph_weights[(x, y)] if morph_weights is not None else {}
        for neighbor in sorted(set(cell_weights) | set(cell_morph)):
            weight = cell_weights.get(neighbor, 0.0)
            morph_weight = cell_morph.get(neighbor, 0.0) if morph_weights is not None else None
            key = (weight, morph_weight)
            # Identical schedules share one object; resolution is memoized per object
            source = schedules.get(key)
            if source is None:
                source = ExternalSource(schedule=_neighbor_schedule(config, weight, morph_weight, mode))
                schedules[key] = source
            matrix.set(column, cell_node(*neighbor, sig), source)

    groups = _shared_groups(matrix)
    logger.info(f"Built {grid.width}x{grid.height} CA ({pattern.describe()}, init {init.describe()}): {len(matrix)} entries, {len(groups)} shared group(s)")
    return Program(
        signature=sig,
        matrix=matrix,
        policy=ConstraintPolicy.SUBSTOCHASTIC,
        violation_mode=ViolationMode.REJECT,
        seed=config.seed,
        shared_input_groups=groups,
        watch=(cell_node(0, 0, sig),)
    )

def _shared_groups(matrix: CoefficientMatrix) -> Tuple[FrozenSet[str], ...]:
    by_content: Dict[Tuple[Tuple[str, ElementSource], ...], List[str]] = {}
    for column in matrix.columns():
        content = tuple(sorted(matrix.column(column).items()))
        by_content.setdefault(content, []).append(column)
    return tuple(frozenset(columns) for columns in by_content.values() if len(columns) > 1)

def cell_nodes(grid: GridSpec, sig: Signature) -> List[str]:
    return [ cell_node(x, y, sig) for x, y in grid.cells() ]

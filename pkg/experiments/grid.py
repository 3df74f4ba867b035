#
# grid.py
#
# Cellular automaton grids: cell naming, connectivity patterns and initialization configurations.
#
# Pattern kinds (neighbors wrap around the grid edges):
#
#   vn-avg                    von Neumann neighborhood, weight 1/4 each
#   shift:<dx>,<dy>           cell (x, y) reads cell (x + dx, y + dy) with weight 1
#   random-sparse:<k>,<seed>  k distinct random cells, weight 1/k each
#
# Init kinds: white, black, none, checker, stripes, random:<seed>
#

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
import hashlib
import os
import random
from typing import Dict, List, Tuple

from pydantic import BaseModel, PositiveInt, model_validator


DEFAULT_MAX_CELLS = 2 ** 20

class PatternError(ValueError):
    pass


def max_cells() -> int:
    return int(os.getenv("MM_MAX_CELLS", DEFAULT_MAX_CELLS))


####################################################################################################
# Grid
####################################################################################################

class GridSpec(BaseModel):
    width: PositiveInt
    height: PositiveInt

    @model_validator(mode="after")
    def check_size(self) -> GridSpec:
        limit = max_cells()
        if self.width * self.height > limit:
            raise ValueError(f"Grid {self.width}x{self.height} exceeds the maximum of {limit} cells (MM_MAX_CELLS)")
        return self

    @property
    def size(self) -> int:
        return self.width * self.height

    def cells(self) -> List[Tuple[int, int]]:
        """
        Cells in row-major order (y outer, x inner), the order frames are laid out in.
        """
        return [ (x, y) for y in range(self.height) for x in range(self.width) ]

    def wrap(self, x: int, y: int) -> Tuple[int, int]:
        return x % self.width, y % self.height

    @staticmethod
    def cell_name(x: int, y: int) -> str:
        return f"cell_{x}_{y}"


####################################################################################################
# Connectivity
####################################################################################################

class PatternKind(str, Enum):
    VN_AVG = "vn-avg"
    SHIFT = "shift"
    RANDOM_SPARSE = "random-sparse"

@dataclass(frozen=True)
class ConnectivityPattern:
    kind: PatternKind
    params: Tuple[int, ...] = ()

    def describe(self) -> str:
        if not self.params:
            return self.kind.value
        return self.kind.value + ":" + ",".join(str(value) for value in self.params)

    def neighbors(self, grid: GridSpec) -> Dict[Tuple[int, int], Dict[Tuple[int, int], float]]:
        """
        For every cell, the cells it reads and their weights. Duplicate neighbors (possible on
        small grids) have their weights summed.

        Returns
        -------
        Dict[Tuple[int, int], Dict[Tuple[int, int], float]]
            cell -> neighbor cell -> weight. Weights of each cell sum to at most 1.
        """
        result = {}
        for x, y in grid.cells():
            weights: Dict[Tuple[int, int], float] = {}
            for neighbor, weight in self._cell_neighbors(grid, x, y):
                cell = grid.wrap(*neighbor)
                weights[cell] = weights.get(cell, 0.0) + weight
            result[(x, y)] = weights
        return result

    def _cell_neighbors(self, grid: GridSpec, x: int, y: int) -> List[Tuple[Tuple[int, int], float]]:
        if self.kind == PatternKind.VN_AVG:
            return [ ((x + 1, y), 0.25), ((x - 1, y), 0.25), ((x, y + 1), 0.25), ((x, y - 1), 0.25) ]
        if self.kind == PatternKind.SHIFT:
            dx, dy = self.params
            return [ ((x + dx, y + dy), 1.0) ]
        k, seed = self.params
        if k > grid.size:
            raise PatternError(f"random-sparse needs {k} distinct neighbors but the grid has only {grid.size} cells")
        rng = random.Random(_cell_seed(seed, x, y))
        cells = grid.cells()
        return [ (cells[index], 1.0 / k) for index in sorted(rng.sample(range(grid.size), k)) ]

def _cell_seed(seed: int, x: int, y: int) -> int:
    digest = hashlib.blake2b(f"{seed}:{x}:{y}".encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")

def _parse_ints(text: str, count: int, what: str) -> Tuple[int, ...]:
    parts = text.split(",")
    if len(parts) != count:
        raise PatternError(f"{what} expects {count} comma-separated integers, got '{text}'")
    try:
        return tuple(int(part.strip()) for part in parts)
    except ValueError:
        raise PatternError(f"{what} expects integers, got '{text}'")

def parse_pattern(text: str) -> ConnectivityPattern:
    kind, _, arguments = text.strip().partition(":")
    if kind == PatternKind.VN_AVG.value and not arguments:
        return ConnectivityPattern(kind=PatternKind.VN_AVG)
    if kind == PatternKind.SHIFT.value:
        return ConnectivityPattern(kind=PatternKind.SHIFT, params=_parse_ints(arguments, 2, "shift"))
    if kind == PatternKind.RANDOM_SPARSE.value:
        k, seed = _parse_ints(arguments, 2, "random-sparse")
        if k <= 0:
            raise PatternError(f"random-sparse needs k >= 1, got {k}")
        return ConnectivityPattern(kind=PatternKind.RANDOM_SPARSE, params=(k, seed))
    raise PatternError(f"Unknown connectivity pattern '{text}' (expected vn-avg, shift:<dx>,<dy> or random-sparse:<k>,<seed>)")


####################################################################################################
# Initialization
####################################################################################################

class CellInit(str, Enum):
    WHITE = "white"
    BLACK = "black"
    NONE = "none"

class InitKind(str, Enum):
    WHITE = "white"
    BLACK = "black"
    NONE = "none"
    CHECKER = "checker"
    STRIPES = "stripes"
    RANDOM = "random"

@dataclass(frozen=True)
class InitSpec:
    kind: InitKind
    seed: int = 0

    def describe(self) -> str:
        return f"random:{self.seed}" if self.kind == InitKind.RANDOM else self.kind.value

    def assign(self, grid: GridSpec) -> Dict[Tuple[int, int], CellInit]:
        if self.kind == InitKind.RANDOM:
            rng = random.Random(self.seed)
            return { cell: rng.choice((CellInit.WHITE, CellInit.BLACK)) for cell in grid.cells() }
        result = {}
        for x, y in grid.cells():
            if self.kind == InitKind.CHECKER:
                value = CellInit.WHITE if (x + y) % 2 == 0 else CellInit.BLACK
            elif self.kind == InitKind.STRIPES:
                value = CellInit.WHITE if x % 2 == 0 else CellInit.BLACK
            else:
                value = CellInit(self.kind.value)
            result[(x, y)] = value
        return result

def parse_init(text: str) -> InitSpec:
    kind, _, argument = text.strip().partition(":")
    try:
        init_kind = InitKind(kind)
    except ValueError:
        raise PatternError(f"Unknown init '{text}' (expected one of white, black, none, checker, stripes, random:<seed>)")
    if init_kind == InitKind.RANDOM:
        try:
            return InitSpec(kind=init_kind, seed=int(argument))
        except ValueError:
            raise PatternError(f"random init expects an integer seed, got '{argument}'")
    if argument:
        raise PatternError(f"Init '{kind}' takes no argument")
    return InitSpec(kind=init_kind)

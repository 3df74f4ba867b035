#
# sources.py
#
# Where a matrix coefficient a_ij gets its value from. An absent entry is a zero-order element;
# a present entry has one of three sources:
#
#   ConstantSource  first-order: a fixed number
#   ExternalSource  sesquialteral: a closed-form schedule of time only
#   NodeSource      properly higher-order: the current value of an output (X) node
#

from __future__ import annotations
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
import math
from typing import Sequence, Tuple, Union


class Interpolation(str, Enum):
    STEP = "step"
    LINEAR = "linear"

class OrderClass(str, Enum):
    ZERO = "zero-order"
    FIRST = "first-order"
    SESQUIALTERAL = "sesquialteral"
    SPECIALIZED = "specialized"
    FULLY_HIGHER_ORDER = "fully-higher-order"


@dataclass(frozen=True)
class Schedule:
    """
    Piecewise-constant (STEP) or piecewise-linear (LINEAR) function of integer time. Holds the
    first value before the first breakpoint and the last value after the last one.
    """
    points: Tuple[Tuple[int, float], ...]
    mode: Interpolation = Interpolation.STEP
    _times: Tuple[int, ...] = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        points = tuple((int(t), float(v)) for t, v in self.points)
        if len(points) == 0:
            raise ValueError("Schedule needs at least one breakpoint")
        for (t0, _), (t1, _) in zip(points, points[1:]):
            if t1 <= t0:
                raise ValueError(f"Schedule breakpoints must be strictly increasing in t ({t0} then {t1})")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "mode", Interpolation(self.mode))
        object.__setattr__(self, "_times", tuple(t for t, _ in points))

    @staticmethod
    def constant(value: float) -> Schedule:
        return Schedule(points=((0, value),))

    @staticmethod
    def ramp(points: Sequence[Tuple[int, float]]) -> Schedule:
        return Schedule(points=tuple(points), mode=Interpolation.LINEAR)

    @property
    def times(self) -> Tuple[int, ...]:
        return self._times

    def value_at(self, t: int) -> float:
        index = bisect_right(self._times, t) - 1
        if index < 0:
            return self.points[0][1]
        t0, v0 = self.points[index]
        if self.mode == Interpolation.STEP or index == len(self.points) - 1 or t == t0:
            return v0
        t1, v1 = self.points[index + 1]
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

    def stable_until(self, t: int) -> float:
        """
        A time t' >= t such that value_at is constant on [t, t']; inf when it never changes again.
        Conservative: any later breakpoint ends the interval.
        """
        index = bisect_right(self._times, t)
        if index == len(self._times):
            return math.inf
        if self.mode == Interpolation.LINEAR and index > 0 and self.points[index - 1][1] != self.points[index][1]:
            return t
        return self._times[index] - 1


@dataclass(frozen=True)
class ConstantSource:
    value: float

@dataclass(frozen=True)
class ExternalSource:
    schedule: Schedule

@dataclass(frozen=True)
class NodeSource:
    name: str   # output (X) node whose current value is the coefficient

ElementSource = Union[ConstantSource, ExternalSource, NodeSource]

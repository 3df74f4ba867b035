#
# morph.py
#
# Entrywise convex combination of two programs' coefficient matrices: (1 - lam) A + lam B over the
# union of present entries, an absent entry counting as the constant 0.
#
# Constants combine to constants. Schedules of the same interpolation mode combine exactly over
# the union of their breakpoints (a constant counts as a flat schedule). A node source only
# combines with the identical node source.
#

from __future__ import annotations
import logging

from elements import ConstantSource, ElementSource, ExternalSource, NodeSource, Schedule
from machine import CoefficientMatrix, Program


logger = logging.getLogger(__name__)


class MorphError(ValueError):
    pass


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise MorphError(f"Morph parameter must lie in [0, 1], got {lam}")

def _mix(a: float, b: float, lam: float) -> float:
    return (1.0 - lam) * a + lam * b

def _morph_schedules(a: Schedule, b: Schedule, lam: float) -> Schedule:
    if a.mode != b.mode:
        raise MorphError(f"Cannot morph a {a.mode.value} schedule into a {b.mode.value} schedule")
    times = sorted(set(a.times) | set(b.times))
    return Schedule(points=tuple((t, _mix(a.value_at(t), b.value_at(t), lam)) for t in times), mode=a.mode)

def _morph_sources(a: ElementSource | None, b: ElementSource | None, lam: float, element: str) -> ElementSource:
    if isinstance(a, NodeSource) or isinstance(b, NodeSource):
        if a == b:
            return a
        raise MorphError(f"Element {element}: a node-driven coefficient can only be morphed with the same node source")
    a = a if a is not None else ConstantSource(value=0.0)
    b = b if b is not None else ConstantSource(value=0.0)
    if isinstance(a, ConstantSource) and isinstance(b, ConstantSource):
        return ConstantSource(value=_mix(a.value, b.value, lam))
    if isinstance(a, ConstantSource):
        a = ExternalSource(schedule=Schedule(points=((0, a.value),), mode=b.schedule.mode))
    if isinstance(b, ConstantSource):
        b = ExternalSource(schedule=Schedule(points=((0, b.value),), mode=a.schedule.mode))
    return ExternalSource(schedule=_morph_schedules(a.schedule, b.schedule, lam))

def morph_matrices(a: CoefficientMatrix, b: CoefficientMatrix, lam: float) -> CoefficientMatrix:
    """
    Convex combination of two coefficient matrices. lam = 0 and lam = 1 return exact copies of
    `a` and `b`.
    """
    _check_lambda(lam)
    if lam == 0.0:
        return a.copy()
    if lam == 1.0:
        return b.copy()
    result = CoefficientMatrix()
    keys = set((column, row) for column, row, _ in a.entries()) | set((column, row) for column, row, _ in b.entries())
    for column, row in sorted(keys):
        element = f"({column})#({row})"
        result.set(column, row, _morph_sources(a.get(column, row), b.get(column, row), lam, element))
    return result

def morph_programs(a: Program, b: Program, lam: float) -> Program:
    """
    Program whose matrix is morph_matrices of the two programs' (materialized) matrices. Policy,
    seed and watch list come from `a`; shared input groups are dropped.
    """
    _check_lambda(lam)
    if a.signature != b.signature:
        raise MorphError("Programs built over different signatures cannot be morphed")
    if lam == 0.0:
        return a
    if lam == 1.0:
        return b
    matrix = morph_matrices(a.materialized_matrix(), b.materialized_matrix(), lam)
    logger.debug(f"Morphed programs at lambda={lam}: {len(matrix)} entries")
    return a.with_matrix(matrix, shared_input_groups=())

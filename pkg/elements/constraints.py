#
# constraints.py
#
# Coefficient constraint policies. Under `nonneg` every resolved coefficient must be >= 0; under
# `substochastic` additionally every column must sum to at most 1 (+ COLUMN_SUM_EPSILON).
# Violations either fail the step (`reject`) or are repaired (`clamp`).
#

from __future__ import annotations
from enum import Enum
import logging
from typing import Dict, Mapping, Sequence


logger = logging.getLogger(__name__)

COLUMN_SUM_EPSILON = 1e-12


class ConstraintPolicy(str, Enum):
    FREE = "free"
    NONNEG = "nonneg"
    SUBSTOCHASTIC = "substochastic"

class ViolationMode(str, Enum):
    REJECT = "reject"
    CLAMP = "clamp"

class PolicyError(ValueError):
    pass

class ConstraintViolation(RuntimeError):
    def __init__(self, t: int, column: str, detail: str):
        super().__init__(f"Constraint violation at t={t} in column '{column}': {detail}")
        self.t = t
        self.column = column
        self.detail = detail


def check_constant(value: float, policy: ConstraintPolicy):
    """
    Build-time check of a single coefficient against a policy.
    """
    if policy in (ConstraintPolicy.NONNEG, ConstraintPolicy.SUBSTOCHASTIC) and value < 0.0:
        raise PolicyError(f"Coefficient {value} is negative under policy '{policy.value}'")
    if policy == ConstraintPolicy.SUBSTOCHASTIC and value > 1.0 + COLUMN_SUM_EPSILON:
        raise PolicyError(f"Coefficient {value} exceeds 1 under policy 'substochastic'")

def enforce_constraints(
    resolved: Dict[str, float],
    columns: Mapping[str, Sequence[str]],
    policy: ConstraintPolicy,
    mode: ViolationMode,
    t: int
) -> Dict[str, float]:
    """
    Applies a policy to resolved coefficients.

    Parameters
    ----------
    resolved : Dict[str, float]
        Coefficient value per element name. Not modified.
    columns : Mapping[str, Sequence[str]]
        Element names of each column, in lexicographic order of their row names. Column sums are
        accumulated in this order.
    policy : ConstraintPolicy
        Policy to enforce.
    mode : ViolationMode
        `reject` raises ConstraintViolation on the first offending column; `clamp` sets negative
        coefficients to 0 and rescales columns whose sum exceeds 1 to sum 1.
    t : int
        Time step, reported in violations.

    Returns
    -------
    Dict[str, float]
        `resolved` itself if nothing had to change, otherwise a repaired copy.
    """
    if policy == ConstraintPolicy.FREE:
        return resolved

    result = resolved
    for column, elements in columns.items():
        negative = [ element for element in elements if result[element] < 0.0 ]
        if negative:
            if mode == ViolationMode.REJECT:
                raise ConstraintViolation(t=t, column=column, detail=f"coefficient {result[negative[0]]} of {negative[0]} is negative")
            if result is resolved:
                result = dict(resolved)
            for element in negative:
                result[element] = 0.0
            logger.debug(f"t={t}: clamped {len(negative)} negative coefficient(s) in column '{column}'")

        if policy != ConstraintPolicy.SUBSTOCHASTIC:
            continue
        total = 0.0
        for element in elements:
            total += result[element]
        if total > 1.0 + COLUMN_SUM_EPSILON:
            if mode == ViolationMode.REJECT:
                raise ConstraintViolation(t=t, column=column, detail=f"column sum {total!r} exceeds 1")
            if result is resolved:
                result = dict(resolved)
            for element in elements:
                result[element] = result[element] / total
            logger.debug(f"t={t}: rescaled column '{column}' with sum {total!r}")
    return result

#
# compare.py
#
# Differential comparison of two trajectories recorded for the same watch list and horizon.
#

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Tuple

from machine import Trajectory


class TrajectoryShapeError(ValueError):
    pass


@dataclass
class ComparisonReport:
    tolerance: float
    max_deviation: Dict[str, float] = field(default_factory=dict)
    first_divergence: Tuple[int, str] | None = None

    @property
    def worst(self) -> float:
        return max(self.max_deviation.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def summary(self) -> str:
        if self.passed:
            return f"PASSED (max deviation {self.worst:.3g} <= {self.tolerance:.3g})"
        t, node = self.first_divergence
        return f"FAILED (max deviation {self.worst:.3g} > {self.tolerance:.3g}, first at t={t} on '{node}')"


def compare_trajectories(sparse: Trajectory, dense: Trajectory, tol: float = 1e-12) -> ComparisonReport:
    """
    Per-node maximum absolute deviation between two trajectories, plus the first (t, node) where
    the deviation exceeds the tolerance.
    """
    if sparse.watch != dense.watch:
        raise TrajectoryShapeError(f"Watched nodes differ: {list(sparse.watch)} vs {list(dense.watch)}")
    if len(sparse.points) != len(dense.points):
        raise TrajectoryShapeError(f"Trajectories have {len(sparse.points)} and {len(dense.points)} points")

    report = ComparisonReport(tolerance=tol, max_deviation={ name: 0.0 for name in sparse.watch })
    for a, b in zip(sparse.points, dense.points):
        if a.t != b.t or a.node != b.node:
            raise TrajectoryShapeError(f"Point mismatch: ({a.t}, '{a.node}') vs ({b.t}, '{b.node}')")
        deviation = abs(a.value - b.value)
        if deviation > report.max_deviation[a.node]:
            report.max_deviation[a.node] = deviation
        if deviation > tol and report.first_divergence is None:
            report.first_divergence = (a.t, a.node)
    return report

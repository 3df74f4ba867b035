#
# state.py
#
# Machine state at one time step. A MachineState is a value: the engine never mutates a state it
# was given, it builds the next one.
#

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, FrozenSet


@dataclass(frozen=True)
class MachineState:
    t: int
    x_values: Dict[str, float]          # active output nodes -> value at t
    y_values: Dict[str, float]          # active input nodes -> value at t
    resolved_a: Dict[str, float]        # element name -> coefficient effective at t (present entries only)
    active_x: FrozenSet[str]
    active_y: FrozenSet[str]
    master_seed: int
    activated_elements: FrozenSet[str] = frozenset()            # elements that have been nonzero at some step
    evaluations: Dict[str, int] = field(default_factory=dict)   # output node -> number of evaluations

    @property
    def active_nodes(self) -> FrozenSet[str]:
        return self.active_x | self.active_y

    def evaluation_count(self, name: str) -> int:
        return self.evaluations.get(name, 0)

    def nonzero_coefficients(self) -> int:
        return sum(1 for value in self.resolved_a.values() if value != 0.0)

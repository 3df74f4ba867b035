from __future__ import annotations
from typing import Dict

from pydantic import BaseModel

from signature import Signature, parse_name


class FrameStats(BaseModel):
    t: int
    mean_abs: float = 0.0
    max_abs: float = 0.0
    rms: float = 0.0

class EvaluationUsage(BaseModel):
    nodes: int = 0
    evaluations: int = 0

    def add(self, usage: EvaluationUsage):
        self.nodes += usage.nodes
        self.evaluations += usage.evaluations

def accumulate_evaluations(usage_by_operation: Dict[str, EvaluationUsage], operation: str, nodes: int, evaluations: int):
    usage = EvaluationUsage(nodes=nodes, evaluations=evaluations)
    if operation not in usage_by_operation:
        usage_by_operation[operation] = usage
    else:
        usage_by_operation[operation].add(usage=usage)

def evaluations_by_operation(evaluations: Dict[str, int], sig: Signature) -> Dict[str, EvaluationUsage]:
    """
    Per-operation totals of a state's per-node evaluation counters.
    """
    usage_by_operation = {}
    for name in sorted(evaluations):
        accumulate_evaluations(usage_by_operation=usage_by_operation, operation=parse_name(name, sig).op_name, nodes=1, evaluations=evaluations[name])
    return usage_by_operation

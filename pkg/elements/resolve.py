#
# resolve.py
#
# Step 2 of a machine tick: the coefficient of every present matrix entry at time t + 1. Node
# sources read the output values produced by Step 1 of the same tick, so a specialized element is
# effective immediately, while a fully higher-order element sees the one-tick delay of its
# identity controller.
#

from __future__ import annotations
from typing import TYPE_CHECKING, Dict, Iterable, Mapping, Tuple

from signature import NameParseError, NodeRole, Signature, parse_name
from .sources import ConstantSource, ElementSource, ExternalSource, NodeSource

if TYPE_CHECKING:
    from machine import CoefficientMatrix


def resolve_static(entries: Iterable[Tuple[str, ElementSource]], t: int) -> Dict[str, float]:
    """
    Values of constant and external entries at time t. Schedules shared between entries are
    evaluated once.
    """
    resolved: Dict[str, float] = {}
    memo: Dict[int, float] = {}
    for element, source in entries:
        if isinstance(source, ConstantSource):
            resolved[element] = source.value
        elif isinstance(source, ExternalSource):
            key = id(source.schedule)
            value = memo.get(key)
            if value is None:
                value = source.schedule.value_at(t)
                memo[key] = value
            resolved[element] = value
    return resolved

def resolve_nodes(entries: Iterable[Tuple[str, str]], x_values: Mapping[str, float], sig: Signature, into: Dict[str, float]) -> Dict[str, float]:
    """
    Values of node-sourced entries. A node that is not active reads as 0.0; its name must still
    be a valid output name.
    """
    for element, name in entries:
        value = x_values.get(name)
        if value is None:
            if parse_name(name, sig).role != NodeRole.OUTPUT:
                raise NameParseError(f"Element {element} is driven by '{name}', which is not an output node")
            value = 0.0
        into[element] = value
    return into

def resolve_coefficients(x_values: Mapping[str, float], t: int, matrix: CoefficientMatrix, sig: Signature) -> Dict[str, float]:
    """
    Resolves every present entry of `matrix` at time t.

    Parameters
    ----------
    x_values : Mapping[str, float]
        Output node values at time t, as produced by Step 1 (inactive nodes absent).
    t : int
        Time step being computed.
    matrix : CoefficientMatrix
        Coefficient matrix; only its present entries are resolved.
    sig : Signature
        Signature used to check node source names.

    Returns
    -------
    Dict[str, float]
        Coefficient per element name.
    """
    resolved = resolve_static(entries=matrix.static_entries(), t=t)
    return resolve_nodes(entries=matrix.node_entries(), x_values=x_values, sig=sig, into=resolved)

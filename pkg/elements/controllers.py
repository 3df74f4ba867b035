#
# controllers.py
#
# Fully higher-order elements. Every matrix element (j, i) has an implicit controller node
# "id (j)#(i)" whose input is "arg1 id (j)#(i)". Controller names are themselves valid node names,
# so elements of controller columns and rows have controllers too; the set of names is closed
# under this construction. Controllers are never enumerated: they exist in a running machine only
# once something activates them.
#

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Tuple

from signature import ElementName, NodeRole, OperationDef, Signature, input_node_name, output_node_name, parse_element_name, parse_name
from operations import unit_constant
from .constraints import ConstraintPolicy, check_constant
from .sources import ConstantSource, ElementSource, ExternalSource, NodeSource, OrderClass


@dataclass
class ProgramFragment:
    """
    Operations and matrix entries to be merged into a program. Entries are keyed by
    (column, row).
    """
    operations: Tuple[OperationDef, ...] = ()
    entries: Dict[Tuple[str, str], ElementSource] = field(default_factory=dict)

    def merge(self, other: ProgramFragment) -> ProgramFragment:
        clashes = set(self.entries) & set(other.entries)
        if clashes:
            raise ValueError(f"Fragments define the same entries: {sorted(clashes)[:3]}")
        operations = self.operations + tuple(op for op in other.operations if op not in self.operations)
        return ProgramFragment(operations=operations, entries={ **self.entries, **other.entries })


def _as_element(element: ElementName | str, sig: Signature) -> ElementName:
    if isinstance(element, ElementName):
        return element
    return parse_element_name(element, sig)

def controller_node_for(element: ElementName | str, sig: Signature) -> str:
    """
    Name of the identity node whose stream is the coefficient of `element` in the fully
    higher-order machine: "id " + "(j)#(i)".
    """
    element = _as_element(element, sig)
    return output_node_name(sig.identity_name, element.raw, sig)

def controller_input_for(element: ElementName | str, sig: Signature) -> str:
    return input_node_name(controller_node_for(element, sig), 1, sig)

def classify_element(entry: ElementSource | None, element: ElementName | str, sig: Signature) -> OrderClass:
    """
    Order class of a matrix element, decided by the kind of its source only (an External
    schedule that never changes is still sesquialteral). Never raises.
    """
    if entry is None:
        return OrderClass.ZERO
    if isinstance(entry, ConstantSource):
        return OrderClass.FIRST
    if isinstance(entry, ExternalSource):
        return OrderClass.SESQUIALTERAL
    parsed = parse_name(entry.name, sig)
    if parsed.role == NodeRole.OUTPUT and parsed.op_name == sig.identity_name and parsed.element is not None:
        raw = element.raw if isinstance(element, ElementName) else element
        if parsed.element.raw == raw:
            return OrderClass.FULLY_HIGHER_ORDER
    return OrderClass.SPECIALIZED

def build_constant_controller(
    element: ElementName | str,
    c: float,
    sig: Signature,
    policy: ConstraintPolicy = ConstraintPolicy.FREE
) -> ProgramFragment:
    """
    Makes `element` fully higher-order with steady value c.

    The controller "id (j)#(i)" reads a unit constant node "<unit> (j)#(i)" through a first-order
    coefficient c. The element resolves to 0 at t = 1 (the controller still holds the initial
    zero) and to c from t = 2 on.

    Parameters
    ----------
    element : ElementName | str
        Element to control.
    c : float
        Steady coefficient value.
    sig : Signature
        Signature; must contain a constant operation with value 1.
    policy : ConstraintPolicy
        Policy the resulting coefficients must satisfy.

    Returns
    -------
    ProgramFragment
        The two matrix entries (constant into the controller, controller into the element).
    """
    element = _as_element(element, sig)
    check_constant(c, policy)
    unit = unit_constant(sig)
    controller = controller_node_for(element, sig)
    unit_node = output_node_name(unit.name, element.raw, sig)
    entries: Dict[Tuple[str, str], ElementSource] = {
        (input_node_name(controller, 1, sig), unit_node): ConstantSource(value=c),
        (element.column, element.row): NodeSource(name=controller),
    }
    return ProgramFragment(operations=(sig.identity, unit), entries=entries)

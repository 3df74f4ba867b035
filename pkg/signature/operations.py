#
# operations.py
#
# Template operations and signatures. A signature is a finite set of named operations of fixed
# arity. Together with the string "arg", the operation names must form a prefix-free multiset so
# that every node name parses in exactly one way.
#

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Tuple


####################################################################################################
# Naming Alphabet
####################################################################################################

RESERVED_CHARACTERS = "()#"
ARG_PREFIX = "arg"

def is_alphabet_string(text: str) -> bool:
    """
    True if every character is printable ASCII and none of them is reserved for element names.
    """
    return all(" " <= ch <= "~" and ch not in RESERVED_CHARACTERS for ch in text)


####################################################################################################
# Errors
####################################################################################################

class SignatureError(ValueError):
    """
    Raised when a name refers to an operation that does not exist or uses it inconsistently
    (unknown operation, argument index out of range, input/output role mismatch).
    """
    pass


####################################################################################################
# Operations
####################################################################################################

class OperationKind(str, Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"
    CONSTANT = "constant"

@dataclass(frozen=True)
class OperationDef:
    name: str
    arity: int
    kind: OperationKind
    params: Tuple[Tuple[str, float], ...] = ()
    rule: str = ""  # evaluation rule; empty selects the default for the kind (see rule_name)

    @staticmethod
    def create(name: str, arity: int, kind: OperationKind, params: Mapping[str, float] | None = None, rule: str = "") -> OperationDef:
        items = tuple(sorted((key, float(value)) for key, value in (params or {}).items()))
        return OperationDef(name=name, arity=arity, kind=OperationKind(kind), params=items, rule=rule)

    @property
    def rule_name(self) -> str:
        if self.rule:
            return self.rule
        if self.kind == OperationKind.CONSTANT:
            return "const"
        if self.kind == OperationKind.STOCHASTIC:
            return "prop"
        return self.name

    def param(self, key: str, default: float | None = None) -> float:
        for name, value in self.params:
            if name == key:
                return value
        if default is None:
            raise SignatureError(f"Operation '{self.name}' has no parameter '{key}'")
        return default

    def params_dict(self) -> Dict[str, float]:
        return dict(self.params)


####################################################################################################
# Signature
####################################################################################################

@dataclass(frozen=True)
class Signature:
    operations: Tuple[OperationDef, ...]
    identity_name: str = "id"
    _by_name: Dict[str, OperationDef] = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "operations", tuple(self.operations))
        lookup = {}
        for op in self.operations:
            lookup.setdefault(op.name, op)
        object.__setattr__(self, "_by_name", lookup)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def operation(self, name: str) -> OperationDef:
        op = self._by_name.get(name)
        if op is None:
            raise SignatureError(f"Unknown operation '{name}'")
        return op

    def names(self) -> List[str]:
        return [ op.name for op in self.operations ]

    @property
    def identity(self) -> OperationDef:
        return self.operation(self.identity_name)

    @property
    def max_arity(self) -> int:
        return max((op.arity for op in self.operations), default=0)

    def operation_prefixing(self, text: str) -> OperationDef | None:
        """
        Returns the operation whose name followed by a single space starts `text`. In a valid
        signature at most one operation name can be a prefix of any string.
        """
        for op in self.operations:
            if text.startswith(op.name + " "):
                return op
        return None


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0

    def add(self, message: str):
        self.violations.append(message)

    def extend(self, messages: Iterable[str]):
        self.violations.extend(messages)


def validate_signature(sig: Signature) -> ValidationReport:
    """
    Checks a signature without raising.

    Parameters
    ----------
    sig : Signature
        Signature to check.

    Returns
    -------
    ValidationReport
        Empty if the signature is usable, otherwise one message per violation: names that are
        empty or use reserved characters, negative or inconsistent arities, prefix clashes
        (including with "arg"), and a missing or duplicated identity operation.
    """
    report = ValidationReport()

    for op in sig.operations:
        if len(op.name) == 0:
            report.add("Operation name must not be empty")
            continue
        reserved = sorted(set(ch for ch in op.name if ch in RESERVED_CHARACTERS))
        if reserved:
            report.add(f"Operation '{op.name}' uses reserved character(s) {''.join(reserved)}")
        elif not is_alphabet_string(op.name):
            report.add(f"Operation '{op.name}' uses characters outside printable ASCII")
        if op.arity < 0:
            report.add(f"Operation '{op.name}' has negative arity {op.arity}")
        if op.kind == OperationKind.CONSTANT and op.arity != 0:
            report.add(f"Constant operation '{op.name}' must have arity 0, not {op.arity}")

    # Prefix-freeness of the multiset { names..., "arg" }. Duplicates count as clashes.
    names = [ op.name for op in sig.operations if len(op.name) > 0 ] + [ ARG_PREFIX ]
    for a_index, a in enumerate(names):
        for b_index, b in enumerate(names):
            if a_index == b_index:
                continue
            if a == b and a_index < b_index:
                report.add(f"Name '{a}' occurs more than once")
            elif a != b and b.startswith(a):
                report.add(f"'{a}' is a prefix of '{b}'")

    identities = [ op for op in sig.operations if op.name == sig.identity_name ]
    if len(identities) == 0:
        report.add(f"Identity operation '{sig.identity_name}' is missing")
    elif len(identities) > 1:
        report.add(f"Identity operation '{sig.identity_name}' is defined more than once")
    else:
        identity = identities[0]
        if identity.arity != 1:
            report.add(f"Identity operation '{identity.name}' must have arity 1, not {identity.arity}")
        if identity.kind != OperationKind.DETERMINISTIC or identity.rule_name != "id":
            report.add(f"Identity operation '{identity.name}' must be deterministic with rule 'id'")

    return report

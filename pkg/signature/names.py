#
# names.py
#
# String names of nodes and matrix elements.
#
#   output (X) node:  <operation> + " " + w
#   input (Y) node:   "arg" + <k> + " " + <output node>
#   matrix element:   "(" + <input node> + ")#(" + <output node> + ")"
#
# The suffix w may itself be a matrix element name, which is how the controller nodes of fully
# higher-order elements ("id (j)#(i)") are named. Parentheses and '#' never occur anywhere else,
# so element names split at the first balanced closing parenthesis.
#

from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
import re

from .operations import ARG_PREFIX, RESERVED_CHARACTERS, Signature, SignatureError, is_alphabet_string


class NameParseError(ValueError):
    pass

class NodeRole(str, Enum):
    OUTPUT = "output"
    INPUT = "input"
    INVALID = "invalid"

@dataclass(frozen=True)
class ElementName:
    column: str     # input (Y) node, the j index
    row: str        # output (X) node, the i index

    @property
    def raw(self) -> str:
        return "(" + self.column + ")#(" + self.row + ")"

    def __str__(self) -> str:
        return self.raw

@dataclass(frozen=True)
class ParsedName:
    raw: str
    role: NodeRole
    op_name: str | None = None              # operation computing the output (for inputs: the owner's operation)
    suffix: str | None = None               # w, for outputs
    k: int | None = None                    # argument index, for inputs
    owner: str | None = None                # owning output node, for inputs
    element: ElementName | None = None      # set when the output suffix is an element name
    reason: str | None = None               # why the name is invalid

    @property
    def valid(self) -> bool:
        return self.role != NodeRole.INVALID

    @property
    def output_name(self) -> str | None:
        """
        The output node of the operation instance this name belongs to.
        """
        if self.role == NodeRole.OUTPUT:
            return self.raw
        return self.owner


_INPUT_PATTERN = re.compile(r"arg([1-9][0-9]*) ")


####################################################################################################
# Parsing
####################################################################################################

def parse_name(s: str, sig: Signature) -> ParsedName:
    """
    Classifies a string as an output name, an input name, or invalid. Embedded element names are
    parsed recursively; every recursion works on a strictly shorter string.

    Parameters
    ----------
    s : str
        Candidate node name.
    sig : Signature
        A valid (prefix-free) signature.

    Returns
    -------
    ParsedName
        Parse result. Never raises; invalid names carry a reason.
    """
    return _parse_cached(s, sig)

@lru_cache(maxsize=1 << 17)
def _parse_cached(s: str, sig: Signature) -> ParsedName:
    if s.startswith(ARG_PREFIX):
        return _parse_input(s, sig)
    return _parse_output(s, sig)

def _invalid(s: str, reason: str) -> ParsedName:
    return ParsedName(raw=s, role=NodeRole.INVALID, reason=reason)

def _parse_input(s: str, sig: Signature) -> ParsedName:
    match = _INPUT_PATTERN.match(s)
    if match is None:
        return _invalid(s, "input names have the form 'arg<k> <output>' with k >= 1 and no leading zeros")
    k = int(match.group(1))
    owner = _parse_cached(s[match.end():], sig)
    if owner.role != NodeRole.OUTPUT:
        return _invalid(s, f"'{s[match.end():]}' is not an output name: {owner.reason or 'it is an input name'}")
    arity = sig.operation(owner.op_name).arity
    if k > arity:
        return _invalid(s, f"argument index {k} exceeds arity {arity} of '{owner.op_name}'")
    return ParsedName(raw=s, role=NodeRole.INPUT, op_name=owner.op_name, k=k, owner=owner.raw)

def _parse_output(s: str, sig: Signature) -> ParsedName:
    op = sig.operation_prefixing(s)
    if op is None:
        return _invalid(s, "does not start with an operation name followed by a space")
    w = s[len(op.name) + 1:]
    if is_alphabet_string(w):
        return ParsedName(raw=s, role=NodeRole.OUTPUT, op_name=op.name, suffix=w)
    if not any(ch in RESERVED_CHARACTERS for ch in w):
        return _invalid(s, "suffix uses characters outside printable ASCII")
    try:
        element = _parse_element(w, sig)
    except NameParseError as e:
        return _invalid(s, f"suffix is not a valid element name: {e}")
    return ParsedName(raw=s, role=NodeRole.OUTPUT, op_name=op.name, suffix=w, element=element)

def _split_element(s: str) -> tuple[str, str]:
    if not (s.startswith("(") and s.endswith(")")):
        raise NameParseError(f"'{s}' is not of the form '(column)#(row)'")
    depth = 0
    close = -1
    for index, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                close = index
                break
    if close < 0 or s[close:close + 3] != ")#(":
        raise NameParseError(f"'{s}' is not of the form '(column)#(row)'")
    return s[1:close], s[close + 3:-1]

def _parse_element(s: str, sig: Signature) -> ElementName:
    column, row = _split_element(s)
    parsed_column = _parse_cached(column, sig)
    if parsed_column.role != NodeRole.INPUT:
        raise NameParseError(f"column '{column}' is not an input name: {parsed_column.reason or 'it is an output name'}")
    parsed_row = _parse_cached(row, sig)
    if parsed_row.role != NodeRole.OUTPUT:
        raise NameParseError(f"row '{row}' is not an output name: {parsed_row.reason or 'it is an input name'}")
    return ElementName(column=column, row=row)

def parse_element_name(s: str, sig: Signature) -> ElementName:
    """
    Inverse of element_name. Raises NameParseError if `s` is not "(column)#(row)" with a valid
    input name as column and a valid output name as row.
    """
    return _parse_element(s, sig)


####################################################################################################
# Composition
####################################################################################################

def output_node_name(op_name: str, w: str, sig: Signature) -> str:
    sig.operation(op_name)
    name = op_name + " " + w
    if not is_alphabet_string(w):
        parsed = parse_name(name, sig)
        if not parsed.valid:
            raise NameParseError(f"Invalid suffix '{w}': {parsed.reason}")
    return name

def input_node_name(output: str, k: int, sig: Signature) -> str:
    parsed = parse_name(output, sig)
    if parsed.role != NodeRole.OUTPUT:
        raise SignatureError(f"'{output}' is not an output node name")
    arity = sig.operation(parsed.op_name).arity
    if not (1 <= k <= arity):
        raise SignatureError(f"Argument index {k} out of range for '{parsed.op_name}' (arity {arity})")
    return ARG_PREFIX + str(k) + " " + output

def element_name(column: str, row: str, sig: Signature) -> ElementName:
    if parse_name(column, sig).role != NodeRole.INPUT:
        raise SignatureError(f"Element column '{column}' must be an input node name")
    if parse_name(row, sig).role != NodeRole.OUTPUT:
        raise SignatureError(f"Element row '{row}' must be an output node name")
    return ElementName(column=column, row=row)

def input_ports(output: str, sig: Signature) -> tuple[str, ...]:
    """
    All input node names of the operation instance computing `output`, in argument order.
    """
    parsed = parse_name(output, sig)
    if parsed.role != NodeRole.OUTPUT:
        raise NameParseError(f"'{output}' is not an output node name")
    arity = sig.operation(parsed.op_name).arity
    return tuple(ARG_PREFIX + str(k) + " " + output for k in range(1, arity + 1))

#
# builtins.py
#
# Built-in evaluation rules for template operations: identity, constants, the randomized
# propagator, and small arithmetic operations. New operations are added by registering a rule in
# BUILTIN_RULES.
#

from __future__ import annotations
from typing import Callable, Dict, List, Sequence

from signature import OperationDef, OperationKind, Signature, SignatureError
from .rng import RngContext


Rule = Callable[[OperationDef, Sequence[float], RngContext], float]


####################################################################################################
# Rules
####################################################################################################

def _identity(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    return args[0]

def _constant(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    return op.param("value")

def _propagator(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    # Copies the input with probability p, outputs zero otherwise
    if rng.draw() < op.param("p"):
        return args[0]
    return 0.0

def _product(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    result = 1.0
    for value in args:
        result *= value
    return result

def _sum(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    result = 0.0
    for value in args:
        result += value
    return result

BUILTIN_RULES: Dict[str, Rule] = {
    "id": _identity,
    "const": _constant,
    "prop": _propagator,
    "mul": _product,
    "add": _sum,
}


####################################################################################################
# Evaluation
####################################################################################################

def rule_for(op: OperationDef) -> Rule:
    rule = BUILTIN_RULES.get(op.rule_name)
    if rule is None:
        raise SignatureError(f"Operation '{op.name}' uses unknown rule '{op.rule_name}'")
    return rule

def eval_operation(op: OperationDef, args: Sequence[float], rng: RngContext) -> float:
    """
    Evaluates one template operation instance.

    Parameters
    ----------
    op : OperationDef
        Operation to evaluate.
    args : Sequence[float]
        Values of its input streams at the previous time step, in argument order.
    rng : RngContext
        Randomness for this node and time step; only stochastic rules draw from it.

    Returns
    -------
    float
        Output stream value.
    """
    if len(args) != op.arity:
        raise SignatureError(f"Operation '{op.name}' takes {op.arity} argument(s), got {len(args)}")
    return rule_for(op)(op, args, rng)

def check_operation(op: OperationDef) -> List[str]:
    """
    Checks that an operation can be evaluated by the built-in rules. Returns a list of problems.
    """
    problems = []
    rule = op.rule_name
    if rule not in BUILTIN_RULES:
        return [ f"Operation '{op.name}' uses unknown rule '{rule}'" ]
    params = op.params_dict()
    if rule == "const":
        if op.kind != OperationKind.CONSTANT:
            problems.append(f"Operation '{op.name}' uses rule 'const' but is not of kind constant")
        if "value" not in params:
            problems.append(f"Constant operation '{op.name}' needs a 'value' parameter")
    elif rule == "prop":
        if op.kind != OperationKind.STOCHASTIC:
            problems.append(f"Operation '{op.name}' uses rule 'prop' but is not of kind stochastic")
        if op.arity != 1:
            problems.append(f"Propagator '{op.name}' must have arity 1")
        p = params.get("p")
        if p is None or not (0.0 <= p <= 1.0):
            problems.append(f"Propagator '{op.name}' needs a probability 'p' in [0, 1]")
    elif rule == "id":
        if op.arity != 1:
            problems.append(f"Identity operation '{op.name}' must have arity 1")
    elif op.kind != OperationKind.DETERMINISTIC:
        problems.append(f"Operation '{op.name}' uses deterministic rule '{rule}' but is of kind {op.kind.value}")
    return problems


####################################################################################################
# Built-in Operation Set
####################################################################################################

def identity(name: str = "id") -> OperationDef:
    return OperationDef.create(name=name, arity=1, kind=OperationKind.DETERMINISTIC, rule="id" if name != "id" else "")

def constant(name: str, value: float) -> OperationDef:
    return OperationDef.create(name=name, arity=0, kind=OperationKind.CONSTANT, params={ "value": value })

def black() -> OperationDef:
    return constant(name="black", value=-1.0)

def white() -> OperationDef:
    return constant(name="white", value=1.0)

def propagator(p: float, name: str = "prop") -> OperationDef:
    return OperationDef.create(name=name, arity=1, kind=OperationKind.STOCHASTIC, params={ "p": p })

def product(name: str = "mul", arity: int = 2) -> OperationDef:
    return OperationDef.create(name=name, arity=arity, kind=OperationKind.DETERMINISTIC, rule="mul" if name != "mul" else "")

def summation(name: str = "add", arity: int = 2) -> OperationDef:
    return OperationDef.create(name=name, arity=arity, kind=OperationKind.DETERMINISTIC, rule="add" if name != "add" else "")

def standard_signature(p: float = 0.995) -> Signature:
    """
    Signature of the continuous cellular automaton experiments: identity, the constants black
    (-1) and white (+1), and a unary randomized propagator with probability p.
    """
    return Signature(operations=(identity(), black(), white(), propagator(p=p)))

def unit_constant(sig: Signature) -> OperationDef:
    """
    First constant operation (in signature order) whose value is exactly 1.
    """
    for op in sig.operations:
        if op.kind == OperationKind.CONSTANT and op.rule_name == "const" and op.param("value", default=float("nan")) == 1.0:
            return op
    raise SignatureError("Signature has no constant operation with value 1")

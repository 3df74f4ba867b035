from .rng import RngContext, node_draw
from .builtins import Rule, BUILTIN_RULES, rule_for, eval_operation, check_operation, identity, constant, black, white, propagator, product, summation, standard_signature, unit_constant

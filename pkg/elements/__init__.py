from .sources import Interpolation, OrderClass, Schedule, ConstantSource, ExternalSource, NodeSource, ElementSource
from .constraints import COLUMN_SUM_EPSILON, ConstraintPolicy, ViolationMode, PolicyError, ConstraintViolation, check_constant, enforce_constraints
from .controllers import ProgramFragment, controller_node_for, controller_input_for, classify_element, build_constant_controller
from .resolve import resolve_static, resolve_nodes, resolve_coefficients

#
# engine.py
#
# The step engine. One tick from t to t + 1:
#
#   Step 1  every active output node X_i(t+1) = f(Y inputs at t); inactive inputs read 0
#   Step 2  every present coefficient is resolved at t+1; entries that become nonzero for the first
#           time activate their consumer and producer operation instances (the producer, and any
#           instance not evaluated in Step 1, is evaluated retroactively with zero arguments);
#           node-sourced entries are re-resolved until no further activation happens
#   Step 3  every active input node Y_j(t+1) = sum_i a_ij * X_i(t+1), rows summed in
#           lexicographic order
#
# Nodes whose incident coefficients have all stayed zero are never created or evaluated.
#

from __future__ import annotations
from dataclasses import dataclass, field
import logging
import math
from typing import Callable, Dict, FrozenSet, Iterable, List, NamedTuple, Set, Tuple

import numpy as np

from signature import NameParseError, NodeRole, OperationDef, input_ports, parse_name
from operations import RngContext, Rule, rule_for
from elements import ConstraintPolicy, ExternalSource, ViolationMode, enforce_constraints, resolve_nodes, resolve_static
from .matrix import Program, ProgramError
from .state import MachineState


logger = logging.getLogger(__name__)

StepHook = Callable[[MachineState], MachineState]


####################################################################################################
# Compiled Program Layout
####################################################################################################

@dataclass
class _Instance:
    op: OperationDef
    rule: Rule
    ports: Tuple[str, ...]

class _ColumnSums:
    """
    Step 3 over all physical columns at once. Column i reads rows `rows_at[i, :]` in lexicographic
    order; padding slots point at an extra row that is always 0. Products with a zero coefficient
    are dropped and the remaining ones are added left to right, so every sum is bit-identical to
    the sequential one.
    """

    def __init__(self, sorted_columns: Dict[str, Tuple[Tuple[str, str], ...]]):
        self.columns = list(sorted_columns)
        self.column_index = { column: index for index, column in enumerate(self.columns) }
        self.rows = sorted({ row for entries in sorted_columns.values() for row, _ in entries })
        row_index = { row: index for index, row in enumerate(self.rows) }
        width = max((len(entries) for entries in sorted_columns.values()), default=0)
        self.rows_at = np.full((len(self.columns), width), len(self.rows), dtype=np.intp)
        positions = []
        self.elements: List[str] = []
        for i, column in enumerate(self.columns):
            for k, (row, element) in enumerate(sorted_columns[column]):
                self.rows_at[i, k] = row_index[row]
                positions.append(i * width + k)
                self.elements.append(element)
        self.positions = np.array(positions, dtype=np.intp)
        self._resolved: Dict[str, float] | None = None
        self._coefficients: np.ndarray | None = None

    def coefficients(self, resolved: Dict[str, float]) -> np.ndarray:
        # Rebuilt only when Step 2 produced a different dict
        if resolved is not self._resolved:
            coefficients = np.zeros(self.rows_at.shape, dtype=np.float64)
            coefficients.ravel()[self.positions] = [ resolved[element] for element in self.elements ]
            self._resolved = resolved
            self._coefficients = coefficients
        return self._coefficients

    def sums(self, resolved: Dict[str, float], x: Dict[str, float]) -> List[float]:
        coefficients = self.coefficients(resolved)
        values = np.array([ x.get(row, 0.0) for row in self.rows ] + [ 0.0 ], dtype=np.float64)
        totals = np.zeros(len(self.columns), dtype=np.float64)
        with np.errstate(invalid="ignore", over="ignore"):
            products = np.where(coefficients != 0.0, coefficients * values[self.rows_at], 0.0)
            for k in range(products.shape[1]):
                totals += products[:, k]
        return totals.tolist()

class _Layout:
    """
    Per-program lookup tables built lazily: operation instance info per output node, consumer of
    each input node, the Step 3 column arrays, and the static coefficients of the current interval
    in which no schedule changes.
    """

    def __init__(self, program: Program):
        self.program = program
        self.signature = program.signature
        self.instances: Dict[str, _Instance] = {}
        self.sorted_columns = program.matrix.sorted_columns()
        self.column_elements = program.matrix.column_elements()
        self.element_index = program.matrix.element_index()
        self.static_entries = program.matrix.static_entries()
        self.node_entries = program.matrix.node_entries()
        schedules = { id(source.schedule): source.schedule for _, source in self.static_entries if isinstance(source, ExternalSource) }
        self.schedules = list(schedules.values())
        self._column_sums: _ColumnSums | None = None
        self._static: Tuple[int, float, Dict[str, float]] | None = None
        self._constrained: Tuple[Dict[str, float], ConstraintPolicy, ViolationMode, Dict[str, float], FrozenSet[str]] | None = None

    def instance(self, output: str) -> _Instance:
        instance = self.instances.get(output)
        if instance is None:
            parsed = parse_name(output, self.signature)
            if parsed.role != NodeRole.OUTPUT:
                raise NameParseError(f"'{output}' is not an output node name: {parsed.reason or 'it is an input name'}")
            op = self.signature.operation(parsed.op_name)
            instance = _Instance(op=op, rule=rule_for(op), ports=input_ports(output, self.signature))
            self.instances[output] = instance
        return instance

    def consumer(self, column: str) -> str:
        parsed = parse_name(column, self.signature)
        if parsed.role != NodeRole.INPUT:
            raise NameParseError(f"'{column}' is not an input node name")
        return parsed.owner

    @property
    def column_sums(self) -> _ColumnSums:
        if self._column_sums is None:
            self._column_sums = _ColumnSums(self.sorted_columns)
        return self._column_sums

    def static_values(self, t: int) -> Dict[str, float]:
        """
        Constant and scheduled coefficients at t. The returned dict is shared by every t of the
        interval and must not be modified.
        """
        cached = self._static
        if cached is not None and cached[0] <= t <= cached[1]:
            return cached[2]
        until = min((schedule.stable_until(t) for schedule in self.schedules), default=math.inf)
        raw = resolve_static(entries=self.static_entries, t=t)
        self._static = (t, until, raw)
        return raw

    def constrained_static(self, t: int, policy: ConstraintPolicy, mode: ViolationMode) -> Tuple[Dict[str, float], FrozenSet[str]]:
        """
        Static coefficients at t after the constraint policy, with the set of nonzero elements.
        Only valid for programs without node-sourced entries.
        """
        raw = self.static_values(t)
        cached = self._constrained
        if cached is not None and cached[0] is raw and cached[1] == policy and cached[2] == mode:
            return cached[3], cached[4]
        resolved = enforce_constraints(resolved=raw, columns=self.column_elements, policy=policy, mode=mode, t=t)
        nonzero = frozenset(element for element, value in resolved.items() if value != 0.0)
        self._constrained = (raw, policy, mode, resolved, nonzero)
        return resolved, nonzero

def _layout(program: Program) -> _Layout:
    # The matrix hands out a new sorted view after every mutation
    layout = program._compiled
    if layout is None or layout.sorted_columns is not program.matrix.sorted_columns() or layout.signature is not program.signature:
        layout = _Layout(program)
        program._compiled = layout
    return layout


####################################################################################################
# Working Copy of a Tick
####################################################################################################

class _Tick:
    """
    Mutable state of one transition. Created from a MachineState and frozen into the next one.
    """

    def __init__(self, state: MachineState, layout: _Layout, t: int):
        self.layout = layout
        self.t = t
        self.seed = state.master_seed
        self.previous_y = state.y_values
        self.x: Dict[str, float] = {}
        self.active_x: Set[str] = set(state.active_x)
        self.active_y: Set[str] = set(state.active_y)
        self.activated: FrozenSet[str] | Set[str] = state.activated_elements     # copied on first change
        self.evaluations: Dict[str, int] = dict(state.evaluations)
        self.evaluated: Set[str] = set()
        self.new_x_count = 0
        self.new_y_count = 0
        self.new_element_count = 0

    def evaluate(self, output: str, zero_arguments: bool = False):
        instance = self.layout.instance(output)
        if zero_arguments:
            args = [ 0.0 ] * len(instance.ports)
        else:
            previous = self.previous_y
            args = [ previous.get(port, 0.0) for port in instance.ports ]
        self.x[output] = instance.rule(instance.op, args, RngContext(self.seed, output, self.t))
        self.evaluations[output] = self.evaluations.get(output, 0) + 1
        self.evaluated.add(output)

    def evaluate_active(self):
        """
        Step 1 for every active output node.
        """
        instances = self.layout.instances
        instance_of = self.layout.instance
        previous = self.previous_y
        x = self.x
        evaluations = self.evaluations
        seed = self.seed
        t = self.t
        for output in self.active_x:
            instance = instances.get(output) or instance_of(output)
            args = [ previous.get(port, 0.0) for port in instance.ports ]
            x[output] = instance.rule(instance.op, args, RngContext(seed, output, t))
            evaluations[output] = evaluations.get(output, 0) + 1
        self.evaluated.update(self.active_x)

    def activate_instance(self, output: str, retroactive: bool):
        if output in self.active_x:
            if retroactive and output not in self.evaluated:
                self.evaluate(output, zero_arguments=True)
            return
        instance = self.layout.instance(output)
        self.active_x.add(output)
        self.new_x_count += 1
        for port in instance.ports:
            if port not in self.active_y:
                self.active_y.add(port)
                self.new_y_count += 1
        if retroactive:
            self.evaluate(output, zero_arguments=True)
        else:
            self.x.setdefault(output, 0.0)
        logger.debug(f"t={self.t}: activated '{output}' with {len(instance.ports)} port(s)")

    def activate_element(self, element: str, retroactive: bool):
        column, row = self.layout.element_index[element]
        if element not in self.activated:
            if self.new_element_count == 0:
                self.activated = set(self.activated)
            self.activated.add(element)
            self.new_element_count += 1
        for member in self.layout.program.sharing_members(column):
            self.activate_instance(self.layout.consumer(member), retroactive=retroactive)
        self.activate_instance(row, retroactive=retroactive)

    def freeze(self, y: Dict[str, float], resolved: Dict[str, float], previous: MachineState) -> MachineState:
        return MachineState(
            t=self.t,
            x_values=self.x,
            y_values=y,
            resolved_a=resolved,
            active_x=frozenset(self.active_x) if self.new_x_count else previous.active_x,
            active_y=frozenset(self.active_y) if self.new_y_count else previous.active_y,
            master_seed=self.seed,
            activated_elements=frozenset(self.activated) if self.new_element_count else previous.activated_elements,
            evaluations=self.evaluations
        )


def _resolve_and_activate(tick: _Tick, program: Program, retroactive: bool) -> Dict[str, float]:
    """
    Step 2 with the activation fixpoint. Returns the constrained coefficients.
    """
    layout = tick.layout
    if not layout.node_entries:
        # Activation cannot feed back into the coefficients
        resolved, nonzero = layout.constrained_static(tick.t, policy=program.policy, mode=program.violation_mode)
        if not nonzero <= tick.activated:
            for element in sorted(nonzero - tick.activated):
                tick.activate_element(element, retroactive=retroactive)
        return resolved

    static = layout.static_values(tick.t)
    while True:
        raw = resolve_nodes(entries=layout.node_entries, x_values=tick.x, sig=layout.signature, into=dict(static))
        resolved = enforce_constraints(
            resolved=raw,
            columns=layout.column_elements,
            policy=program.policy,
            mode=program.violation_mode,
            t=tick.t
        )
        newly = sorted(element for element, value in resolved.items() if value != 0.0 and element not in tick.activated)
        for element in newly:
            tick.activate_element(element, retroactive=retroactive)
        if not newly:
            return resolved

def _combine(tick: _Tick, program: Program, resolved: Dict[str, float]) -> Dict[str, float]:
    """
    Step 3. Shared input groups are summed once per physical column.
    """
    column_sums = tick.layout.column_sums
    sums = column_sums.sums(resolved, tick.x)
    index = column_sums.column_index
    y: Dict[str, float] = {}
    for name in tick.active_y:
        i = index.get(program.physical_column(name))
        y[name] = 0.0 if i is None else sums[i]
    return y


####################################################################################################
# Machine Operations
####################################################################################################

def init_machine(program: Program) -> MachineState:
    """
    State at t = 0: every stream is 0, coefficients are resolved at t = 0 and recorded, and the
    operation instances incident to entries that are nonzero at t = 0 are active.

    Parameters
    ----------
    program : Program
        Program to run. Validated first; ProgramError is raised with all violations.

    Returns
    -------
    MachineState
        Initial state.
    """
    program.check()
    layout = _layout(program)
    empty = MachineState(
        t=0,
        x_values={},
        y_values={},
        resolved_a={},
        active_x=frozenset(),
        active_y=frozenset(),
        master_seed=program.seed
    )
    tick = _Tick(state=empty, layout=layout, t=0)
    resolved = _resolve_and_activate(tick, program, retroactive=False)
    y = { name: 0.0 for name in tick.active_y }
    return tick.freeze(y=y, resolved=resolved, previous=empty)

def step(state: MachineState, program: Program, adjust: StepHook | None = None) -> MachineState:
    """
    Advances the machine by one tick.

    Parameters
    ----------
    state : MachineState
        State at time t. Not modified.
    program : Program
        Program the state belongs to.
    adjust : StepHook | None
        Optional hook applied to the intermediate state after Step 2 and before Step 3. It may
        replace output values (for example to renormalize them); Step 3 reads what it returns.

    Returns
    -------
    MachineState
        State at time t + 1.
    """
    layout = _layout(program)
    tick = _Tick(state=state, layout=layout, t=state.t + 1)

    # Step 1
    tick.evaluate_active()

    # Step 2
    resolved = _resolve_and_activate(tick, program, retroactive=True)

    if adjust is not None:
        intermediate = tick.freeze(y=state.y_values, resolved=resolved, previous=state)
        tick.x = dict(adjust(intermediate).x_values)

    # Step 3
    y = _combine(tick, program, resolved)
    return tick.freeze(y=y, resolved=resolved, previous=state)

def activate_element(state: MachineState, element: str, program: Program) -> MachineState:
    """
    Activates the consumer and producer of `element` at the state's time step, evaluating newly
    added instances with zero arguments. Idempotent for instances that are already active.
    """
    layout = _layout(program)
    if element not in layout.element_index:
        raise ProgramError([ f"Element {element} is not present in the matrix" ])
    tick = _Tick(state=state, layout=layout, t=state.t)
    tick.x = dict(state.x_values)
    tick.evaluated = set(state.x_values) if state.t > 0 else set(state.active_x)
    tick.activate_element(element, retroactive=state.t > 0)
    y = dict(state.y_values)
    for name in tick.active_y:
        y.setdefault(name, 0.0)
    return tick.freeze(y=y, resolved=state.resolved_a, previous=state)

def read_stream(state: MachineState, name: str, program: Program) -> float:
    """
    Current value of a node; 0.0 for nodes that are not active.
    """
    value = state.x_values.get(name)
    if value is None:
        value = state.y_values.get(name)
    if value is not None:
        return value
    if not parse_name(name, program.signature).valid:
        raise NameParseError(f"'{name}' is not a valid node name")
    return 0.0


####################################################################################################
# Runs
####################################################################################################

class TrajectoryPoint(NamedTuple):
    t: int
    node: str
    value: float

@dataclass
class Trajectory:
    watch: Tuple[str, ...]
    points: List[TrajectoryPoint] = field(default_factory=list)

    def record(self, state: MachineState, program: Program):
        for name in self.watch:
            self.points.append(TrajectoryPoint(t=state.t, node=name, value=read_stream(state, name, program)))

    def series(self, node: str) -> List[float]:
        return [ point.value for point in self.points if point.node == node ]

    @property
    def horizon(self) -> int:
        return self.points[-1].t if self.points else -1

def run(
    program: Program,
    horizon: int,
    watch: Iterable[str] | None = None,
    adjust: StepHook | None = None,
    on_state: Callable[[MachineState], None] | None = None
) -> Trajectory:
    """
    Runs a program from t = 0 to t = horizon and records watched nodes at every step.

    Parameters
    ----------
    program : Program
        Program to run.
    horizon : int
        Last time step (>= 0).
    watch : Iterable[str] | None
        Nodes to record, in output order. Defaults to the program's watch list.
    adjust : StepHook | None
        Hook passed to every step.
    on_state : Callable[[MachineState], None] | None
        Called with every state, including the initial one.

    Returns
    -------
    Trajectory
        (t, node, value) for every watched node and time step.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    names = list(dict.fromkeys(program.watch if watch is None else watch))
    trajectory = Trajectory(watch=tuple(names))
    state = init_machine(program)
    for name in names:
        read_stream(state, name, program)
    trajectory.record(state, program)
    if on_state is not None:
        on_state(state)
    for _ in range(horizon):
        state = step(state, program, adjust=adjust)
        trajectory.record(state, program)
        if on_state is not None:
            on_state(state)
    return trajectory

def final_state(program: Program, horizon: int, adjust: StepHook | None = None) -> MachineState:
    state = init_machine(program)
    for _ in range(horizon):
        state = step(state, program, adjust=adjust)
    return state

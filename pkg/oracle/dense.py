#
# dense.py
#
# Dense reference implementation of the machine for small programs, used for differential
# testing. All nodes the program could ever activate are enumerated up front; one tick is
#
#   x_{t+1} = F(y_t)            (masked to active nodes)
#   y_{t+1} = L_{t+1} x_{t+1}   (sequential sums over X in lexicographic order)
#
# Activation is tracked with boolean masks instead of dictionaries, so this shares no stepping
# code with the sparse engine; it only shares the operation rules and the per-node randomness.
#

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from signature import NodeRole, OperationDef, input_ports, parse_name
from operations import RngContext, eval_operation
from elements import COLUMN_SUM_EPSILON, ConstantSource, ConstraintPolicy, ConstraintViolation, ElementSource, ExternalSource, NodeSource, ViolationMode
from machine import Program, Trajectory, TrajectoryPoint


MAX_DENSE_NODES = 200

class OracleCapacityError(ValueError):
    pass


@dataclass
class _DenseEntry:
    y_index: int
    x_index: int
    name: str
    source: ElementSource
    source_index: int = -1      # X index of a node source


@dataclass
class DenseModel:
    program: Program
    x_names: List[str]
    y_names: List[str]
    operations: List[OperationDef]
    port_indices: List[List[int]]               # per X node: Y indices of its inputs
    owner_index: List[int]                      # per Y node: X index of its operation instance
    entries: List[_DenseEntry]
    active_x: np.ndarray = field(default=None)
    active_y: np.ndarray = field(default=None)
    activated: np.ndarray = field(default=None)  # per entry: has been nonzero
    _lookup: Dict[str, Tuple[NodeRole, int]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._lookup = { name: (NodeRole.OUTPUT, index) for index, name in enumerate(self.x_names) }
        self._lookup.update({ name: (NodeRole.INPUT, index) for index, name in enumerate(self.y_names) })
        self.reset()

    def reset(self):
        self.active_x = np.zeros(len(self.x_names), dtype=bool)
        self.active_y = np.zeros(len(self.y_names), dtype=bool)
        self.activated = np.zeros(len(self.entries), dtype=bool)

    @property
    def dimensions(self) -> Tuple[int, int]:
        return len(self.y_names), len(self.x_names)

    def index_of(self, name: str) -> Tuple[NodeRole, int] | None:
        return self._lookup.get(name)


def build_dense_model(program: Program, capacity: int = MAX_DENSE_NODES) -> DenseModel:
    """
    Enumerates every node that present entries could activate and lays the program out densely.

    Parameters
    ----------
    program : Program
        Program to model.
    capacity : int
        Maximum number of X plus Y nodes.

    Returns
    -------
    DenseModel
        Model with X and Y nodes in lexicographic order and no node active.
    """
    program.check()
    sig = program.signature
    matrix = program.materialized_matrix()

    # Only present entries ever activate anything
    outputs = set()
    for column, row, source in matrix.entries():
        outputs.add(parse_name(column, sig).owner)
        outputs.add(row)
        if isinstance(source, NodeSource):
            outputs.add(source.name)
    inputs = set()
    for output in outputs:
        inputs.update(input_ports(output, sig))
    if len(outputs) + len(inputs) > capacity:
        raise OracleCapacityError(f"Program needs {len(outputs) + len(inputs)} dense nodes, capacity is {capacity}")

    x_names = sorted(outputs)
    y_names = sorted(inputs)
    x_lookup = { name: index for index, name in enumerate(x_names) }
    y_lookup = { name: index for index, name in enumerate(y_names) }
    operations = [ sig.operation(parse_name(name, sig).op_name) for name in x_names ]
    port_indices = [ [ y_lookup[port] for port in input_ports(name, sig) ] for name in x_names ]
    owner_index = [ x_lookup[parse_name(name, sig).owner] for name in y_names ]
    entries = []
    for column, row, source in matrix.entries():
        entry = _DenseEntry(y_index=y_lookup[column], x_index=x_lookup[row], name="(" + column + ")#(" + row + ")", source=source)
        if isinstance(source, NodeSource):
            entry.source_index = x_lookup[source.name]
        entries.append(entry)
    return DenseModel(
        program=program,
        x_names=x_names,
        y_names=y_names,
        operations=operations,
        port_indices=port_indices,
        owner_index=owner_index,
        entries=entries
    )


def _coefficients(model: DenseModel, x: np.ndarray, t: int) -> np.ndarray:
    L = np.zeros(model.dimensions, dtype=np.float64)
    for entry in model.entries:
        source = entry.source
        if isinstance(source, ConstantSource):
            value = source.value
        elif isinstance(source, ExternalSource):
            value = source.schedule.value_at(t)
        else:
            value = x[entry.source_index]
        L[entry.y_index, entry.x_index] = value
    return L

def _constrain(model: DenseModel, L: np.ndarray, t: int) -> np.ndarray:
    program = model.program
    if program.policy == ConstraintPolicy.FREE:
        return L
    negative = L < 0.0
    if negative.any():
        if program.violation_mode == ViolationMode.REJECT:
            row = int(np.argwhere(negative)[0][0])
            raise ConstraintViolation(t=t, column=model.y_names[row], detail="negative coefficient")
        L = np.where(negative, 0.0, L)
    if program.policy == ConstraintPolicy.SUBSTOCHASTIC and L.shape[1] > 0:
        sums = np.cumsum(L, axis=1)[:, -1]
        over = sums > 1.0 + COLUMN_SUM_EPSILON
        if over.any():
            if program.violation_mode == ViolationMode.REJECT:
                row = int(np.argwhere(over)[0][0])
                raise ConstraintViolation(t=t, column=model.y_names[row], detail=f"column sum {sums[row]!r} exceeds 1")
            L = L.copy()
            L[over] = L[over] / sums[over][:, None]
    return L

def _activate(model: DenseModel, entry_index: int):
    entry = model.entries[entry_index]
    model.activated[entry_index] = True
    for x_index in (model.owner_index[entry.y_index], entry.x_index):
        model.active_x[x_index] = True
        model.active_y[model.port_indices[x_index]] = True

def dense_step(model: DenseModel, x_t: np.ndarray, y_t: np.ndarray, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    One tick of the dense machine from t to t + 1. The model's activation masks advance with it.

    Parameters
    ----------
    model : DenseModel
        Model from build_dense_model.
    x_t, y_t : np.ndarray
        X and Y vectors at time t (in the model's node order).
    t : int
        Current time.

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        x_{t+1} and y_{t+1}.
    """
    n_y, n_x = model.dimensions
    if x_t.shape != (n_x,) or y_t.shape != (n_y,):
        raise ValueError(f"Expected vectors of shape ({n_x},) and ({n_y},), got {x_t.shape} and {y_t.shape}")
    t1 = t + 1
    seed = model.program.seed

    # F applied to every node; masked below
    fx = np.array([
        eval_operation(op, [ float(y_t[i]) for i in ports ], RngContext(seed, name, t1))
        for name, op, ports in zip(model.x_names, model.operations, model.port_indices)
    ], dtype=np.float64).reshape(n_x)
    x = np.where(model.active_x, fx, 0.0)

    while True:
        L = _constrain(model, _coefficients(model, x, t1), t1)
        newly = [ index for index, entry in enumerate(model.entries) if L[entry.y_index, entry.x_index] != 0.0 and not model.activated[index] ]
        if not newly:
            break
        for index in newly:
            _activate(model, index)
        x = np.where(model.active_x, fx, 0.0)

    # cumsum keeps the row-by-row summation order of the sparse engine
    y = np.cumsum(L * x[None, :], axis=1)[:, -1] if n_x > 0 else np.zeros(n_y)
    y = np.where(model.active_y, y, 0.0)
    return x, y

def dense_init(model: DenseModel) -> Tuple[np.ndarray, np.ndarray]:
    model.reset()
    n_y, n_x = model.dimensions
    x = np.zeros(n_x)
    L = _constrain(model, _coefficients(model, x, 0), 0)
    for index, entry in enumerate(model.entries):
        if L[entry.y_index, entry.x_index] != 0.0:
            _activate(model, index)
    return x, np.zeros(n_y)

def dense_run(program: Program, horizon: int, watch: Iterable[str]) -> Trajectory:
    """
    Dense counterpart of machine.run. Watched nodes outside the model read 0.
    """
    model = build_dense_model(program)
    names = list(dict.fromkeys(watch))
    trajectory = Trajectory(watch=tuple(names))
    lookup = { name: model.index_of(name) for name in names }

    def record(t: int, x: np.ndarray, y: np.ndarray):
        for name in names:
            found = lookup[name]
            if found is None:
                value = 0.0
            elif found[0] == NodeRole.OUTPUT:
                value = float(x[found[1]])
            else:
                value = float(y[found[1]])
            trajectory.points.append(TrajectoryPoint(t=t, node=name, value=value))

    x, y = dense_init(model)
    record(0, x, y)
    for t in range(horizon):
        x, y = dense_step(model, x, y, t)
        record(t + 1, x, y)
    return trajectory

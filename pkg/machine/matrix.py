#
# matrix.py
#
# Programs as sparse matrices. A column is an input (Y) node, a row an output (X) node, and only
# explicitly present entries exist; everything else is a zero-order element. A Program couples the
# matrix with its signature, constraint policy, seed, and groups of inputs that share a column.
#

from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Mapping, Sequence, Tuple

from signature import NodeRole, Signature, ValidationReport, input_ports, parse_name, validate_signature
from operations import check_operation
from elements import ConstraintPolicy, ElementSource, ExternalSource, NodeSource, ConstantSource, ProgramFragment, PolicyError, ViolationMode, check_constant


class ProgramError(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("Invalid program:\n  " + "\n  ".join(violations))
        self.violations = list(violations)


####################################################################################################
# Coefficient Matrix
####################################################################################################

def element_key(column: str, row: str) -> str:
    return "(" + column + ")#(" + row + ")"

class CoefficientMatrix:
    """
    Sparse map column -> row -> ElementSource. Derived views (sorted columns, entry lists) are
    cached and rebuilt after any mutation.
    """

    def __init__(self, columns: Mapping[str, Mapping[str, ElementSource]] | None = None):
        self._columns: Dict[str, Dict[str, ElementSource]] = {}
        self._cache: Dict[str, object] = {}
        if columns is not None:
            for column, rows in columns.items():
                for row, source in rows.items():
                    self.set(column, row, source)

    @staticmethod
    def from_entries(entries: Mapping[Tuple[str, str], ElementSource]) -> CoefficientMatrix:
        matrix = CoefficientMatrix()
        for (column, row), source in entries.items():
            matrix.set(column, row, source)
        return matrix

    def set(self, column: str, row: str, source: ElementSource):
        self._columns.setdefault(column, {})[row] = source
        self._cache.clear()

    def remove_column(self, column: str):
        if self._columns.pop(column, None) is not None:
            self._cache.clear()

    def get(self, column: str, row: str) -> ElementSource | None:
        rows = self._columns.get(column)
        return None if rows is None else rows.get(row)

    def column(self, column: str) -> Dict[str, ElementSource]:
        return dict(self._columns.get(column, {}))

    def columns(self) -> List[str]:
        return sorted(self._columns)

    def has_column(self, column: str) -> bool:
        return column in self._columns

    def entries(self) -> Iterator[Tuple[str, str, ElementSource]]:
        for column in sorted(self._columns):
            rows = self._columns[column]
            for row in sorted(rows):
                yield column, row, rows[row]

    def merge(self, fragment: ProgramFragment):
        for (column, row), source in fragment.entries.items():
            self.set(column, row, source)

    def copy(self) -> CoefficientMatrix:
        return CoefficientMatrix(self._columns)

    def __len__(self) -> int:
        return sum(len(rows) for rows in self._columns.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoefficientMatrix):
            return NotImplemented
        return self._columns == other._columns

    def __repr__(self) -> str:
        return f"CoefficientMatrix(columns={len(self._columns)}, entries={len(self)})"

    #
    # Cached views used by the engine
    #

    def _cached(self, key: str, build):
        value = self._cache.get(key)
        if value is None:
            value = build()
            self._cache[key] = value
        return value

    def sorted_columns(self) -> Dict[str, Tuple[Tuple[str, str], ...]]:
        """
        Column -> ((row, element name), ...) with rows in lexicographic order, the summation order
        of Step 3.
        """
        return self._cached("sorted", lambda: {
            column: tuple((row, element_key(column, row)) for row in sorted(rows))
            for column, rows in self._columns.items()
        })

    def column_elements(self) -> Dict[str, Tuple[str, ...]]:
        return self._cached("column_elements", lambda: {
            column: tuple(element for _, element in entries) for column, entries in self.sorted_columns().items()
        })

    def element_index(self) -> Dict[str, Tuple[str, str]]:
        return self._cached("index", lambda: {
            element_key(column, row): (column, row) for column, row, _ in self.entries()
        })

    def static_entries(self) -> List[Tuple[str, ElementSource]]:
        return self._cached("static", lambda: [
            (element_key(column, row), source) for column, row, source in self.entries() if not isinstance(source, NodeSource)
        ])

    def node_entries(self) -> List[Tuple[str, str]]:
        return self._cached("nodes", lambda: [
            (element_key(column, row), source.name) for column, row, source in self.entries() if isinstance(source, NodeSource)
        ])


####################################################################################################
# Program
####################################################################################################

@dataclass
class Program:
    signature: Signature
    matrix: CoefficientMatrix
    policy: ConstraintPolicy = ConstraintPolicy.FREE
    violation_mode: ViolationMode = ViolationMode.REJECT
    seed: int = 0
    shared_input_groups: Tuple[FrozenSet[str], ...] = ()
    watch: Tuple[str, ...] = ()
    _aliases: Dict[str, str] = field(default_factory=dict, init=False, repr=False, compare=False)
    _members: Dict[str, Tuple[str, ...]] = field(default_factory=dict, init=False, repr=False, compare=False)
    _compiled: object = field(default=None, init=False, repr=False, compare=False)     # engine layout of `matrix`

    def __post_init__(self):
        self.policy = ConstraintPolicy(self.policy)
        self.violation_mode = ViolationMode(self.violation_mode)
        self.shared_input_groups = tuple(frozenset(group) for group in self.shared_input_groups if len(group) > 1)
        self.watch = tuple(self.watch)
        self._normalize_shared_columns()

    def _normalize_shared_columns(self):
        """
        Stores each shared group's column once, under its lexicographically smallest member. Member
        columns given explicitly must all be equal.
        """
        problems = []
        matrix = self.matrix.copy()
        for group in self.shared_input_groups:
            members = tuple(sorted(group))
            representative = members[0]
            contents = [ (member, matrix.column(member)) for member in members if matrix.has_column(member) ]
            if len(contents) > 0:
                reference_member, reference = contents[0]
                for member, content in contents[1:]:
                    if content != reference:
                        problems.append(f"Shared input '{member}' differs from '{reference_member}'")
                for member, _ in contents:
                    matrix.remove_column(member)
                for row, source in reference.items():
                    matrix.set(representative, row, source)
            for member in members:
                if member in self._aliases or member in self._members:
                    problems.append(f"Input '{member}' belongs to more than one shared group")
                if member != representative:
                    self._aliases[member] = representative
            self._members[representative] = members
        if problems:
            raise ProgramError(problems)
        self.matrix = matrix

    def physical_column(self, column: str) -> str:
        return self._aliases.get(column, column)

    def sharing_members(self, column: str) -> Tuple[str, ...]:
        """
        All input nodes reading the physical column `column` (just the column itself if it is not
        shared).
        """
        return self._members.get(column, (column,))

    def materialized_matrix(self) -> CoefficientMatrix:
        """
        Copy of the matrix in which every shared group member carries its own copy of the column.
        """
        matrix = self.matrix.copy()
        for member, representative in self._aliases.items():
            for row, source in self.matrix.column(representative).items():
                matrix.set(member, row, source)
        return matrix

    def with_matrix(self, matrix: CoefficientMatrix, shared_input_groups: Sequence[FrozenSet[str]] | None = None) -> Program:
        return Program(
            signature=self.signature,
            matrix=matrix,
            policy=self.policy,
            violation_mode=self.violation_mode,
            seed=self.seed,
            shared_input_groups=tuple(self.shared_input_groups if shared_input_groups is None else shared_input_groups),
            watch=self.watch
        )

    def with_seed(self, seed: int) -> Program:
        program = self.with_matrix(self.matrix)
        program.seed = seed
        return program

    def node_names(self) -> List[str]:
        """
        Every node the program could ever activate: columns and rows of present entries, node
        sources, and all ports of their operations.
        """
        names = set()
        outputs = set()
        for column, row, source in self.materialized_matrix().entries():
            for name in (column, row) + ((source.name,) if isinstance(source, NodeSource) else ()):
                parsed = parse_name(name, self.signature)
                if parsed.valid:
                    outputs.add(parsed.output_name)
        for output in outputs:
            names.add(output)
            names.update(input_ports(output, self.signature))
        return sorted(names)

    def validate(self) -> ValidationReport:
        report = validate_signature(self.signature)
        if not report.ok:
            return report
        for op in self.signature.operations:
            report.extend(check_operation(op))
        for column, row, source in self.materialized_matrix().entries():
            parsed_column = parse_name(column, self.signature)
            if parsed_column.role != NodeRole.INPUT:
                report.add(f"Column '{column}' is not an input node name: {parsed_column.reason or 'it is an output name'}")
            parsed_row = parse_name(row, self.signature)
            if parsed_row.role != NodeRole.OUTPUT:
                report.add(f"Row '{row}' is not an output node name: {parsed_row.reason or 'it is an input name'}")
            if isinstance(source, NodeSource):
                parsed_source = parse_name(source.name, self.signature)
                if parsed_source.role != NodeRole.OUTPUT:
                    report.add(f"Element ({column})#({row}) is driven by '{source.name}', which is not an output node name")
            elif isinstance(source, ConstantSource):
                try:
                    check_constant(source.value, self.policy)
                except PolicyError as e:
                    report.add(f"Element ({column})#({row}): {e}")
        for group in self.shared_input_groups:
            for member in sorted(group):
                if parse_name(member, self.signature).role != NodeRole.INPUT:
                    report.add(f"Shared input '{member}' is not an input node name")
        for name in self.watch:
            if not parse_name(name, self.signature).valid:
                report.add(f"Watched node '{name}' is not a valid node name")
        return report

    def check(self):
        report = self.validate()
        if not report.ok:
            raise ProgramError(report.violations)

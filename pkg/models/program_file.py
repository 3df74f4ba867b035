#
# program_file.py
#
# Program file format. A program is a JSON document:
#
#   {
#     "signature": [ { "name": "id", "arity": 1, "kind": "deterministic" }, ... ],
#     "elements": [ { "column": "arg1 id s", "row": "one u", "source": { "const": 1.0 } }, ... ],
#     "policy": "free", "violation_mode": "reject", "seed": 7,
#     "shared_input_groups": [ [ "arg1 id a", "arg1 id b" ] ],
#     "watch": [ "arg1 id s" ]
#   }
#
# A source is exactly one of { "const": c }, { "external": { "mode": "step", "points": [[t, v], ...] } }
# or { "node": "<output node>" }.
#

from __future__ import annotations
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, model_validator

from signature import OperationDef, OperationKind, Signature
from elements import ConstantSource, ConstraintPolicy, ElementSource, ExternalSource, Interpolation, NodeSource, Schedule, ViolationMode
from machine import CoefficientMatrix, Program


class OperationSpec(BaseModel):
    name: str
    arity: int
    kind: OperationKind
    params: Dict[str, float] = {}
    rule: str = ""

class ExternalSpec(BaseModel):
    mode: Interpolation = Interpolation.STEP
    points: List[Tuple[int, float]]

class SourceSpec(BaseModel):
    const: Optional[float] = None
    external: Optional[ExternalSpec] = None
    node: Optional[str] = None

    @model_validator(mode="after")
    def check_exactly_one(self) -> SourceSpec:
        given = [ name for name in ("const", "external", "node") if getattr(self, name) is not None ]
        if len(given) != 1:
            raise ValueError(f"A source needs exactly one of const, external, node (got {given or 'none'})")
        return self

    def to_source(self) -> ElementSource:
        if self.const is not None:
            return ConstantSource(value=self.const)
        if self.external is not None:
            return ExternalSource(schedule=Schedule(points=tuple(self.external.points), mode=self.external.mode))
        return NodeSource(name=self.node)

    @staticmethod
    def from_source(source: ElementSource) -> SourceSpec:
        if isinstance(source, ConstantSource):
            return SourceSpec(const=source.value)
        if isinstance(source, ExternalSource):
            return SourceSpec(external=ExternalSpec(mode=source.schedule.mode, points=list(source.schedule.points)))
        return SourceSpec(node=source.name)

class ElementSpec(BaseModel):
    column: str
    row: str
    source: SourceSpec

class ProgramFile(BaseModel):
    signature: List[OperationSpec]
    identity: str = "id"
    elements: List[ElementSpec] = []
    policy: ConstraintPolicy = ConstraintPolicy.FREE
    violation_mode: ViolationMode = ViolationMode.REJECT
    seed: Optional[int] = None
    shared_input_groups: List[List[str]] = []
    watch: List[str] = []

    def to_signature(self) -> Signature:
        return Signature(
            operations=tuple(OperationDef.create(name=op.name, arity=op.arity, kind=op.kind, params=op.params, rule=op.rule) for op in self.signature),
            identity_name=self.identity
        )

    def to_program(self, seed: int | None = None) -> Program:
        """
        Builds and validates the program (ProgramError lists every violation). `seed` overrides
        the file's seed; without either the seed is 0.
        """
        entries = {}
        for element in self.elements:
            key = (element.column, element.row)
            if key in entries:
                raise ValueError(f"Element ({element.column})#({element.row}) is given more than once")
            entries[key] = element.source.to_source()
        program = Program(
            signature=self.to_signature(),
            matrix=CoefficientMatrix.from_entries(entries),
            policy=self.policy,
            violation_mode=self.violation_mode,
            seed=seed if seed is not None else (self.seed if self.seed is not None else 0),
            shared_input_groups=tuple(frozenset(group) for group in self.shared_input_groups),
            watch=tuple(self.watch)
        )
        program.check()
        return program

    @staticmethod
    def from_program(program: Program) -> ProgramFile:
        return ProgramFile(
            signature=[ OperationSpec(name=op.name, arity=op.arity, kind=op.kind, params=op.params_dict(), rule=op.rule) for op in program.signature.operations ],
            identity=program.signature.identity_name,
            elements=[ ElementSpec(column=column, row=row, source=SourceSpec.from_source(source)) for column, row, source in program.matrix.entries() ],
            policy=program.policy,
            violation_mode=program.violation_mode,
            seed=program.seed,
            shared_input_groups=sorted(sorted(group) for group in program.shared_input_groups),
            watch=list(program.watch)
        )


def load_program_file(filepath: str) -> ProgramFile:
    with open(file=filepath, mode="r") as fp:
        text = fp.read()
    return ProgramFile.model_validate_json(json_data=text)

def load_program(filepath: str, seed: int | None = None) -> Program:
    return load_program_file(filepath=filepath).to_program(seed=seed)

def save_program(program: Program, filepath: str):
    text = ProgramFile.from_program(program).model_dump_json(indent=2, exclude_defaults=True)
    with open(file=filepath, mode="w") as fp:
        fp.write(text + "\n")

import os

import pytest
from pydantic import ValidationError

from elements import ExternalSource, NodeSource, Schedule
from machine import CoefficientMatrix, Program, ProgramError, final_state
from models import ProgramFile, SourceSpec, evaluations_by_operation, load_program, save_program


def test_load_geometric(programs_dir):
    program = load_program(os.path.join(programs_dir, "geometric.json"))
    assert program.seed == 7
    assert program.watch == ("arg1 id s",)
    assert [ op.name for op in program.signature.operations ] == [ "id", "one" ]
    assert len(program.matrix) == 2

def test_seed_override(programs_dir):
    assert load_program(os.path.join(programs_dir, "geometric.json"), seed=99).seed == 99
    assert load_program(os.path.join(programs_dir, "morph_a.json")).seed == 0

@pytest.mark.parametrize("name", [ "invalid_prefix.json", "unknown_node.json" ])
def test_invalid_programs(programs_dir, name):
    with pytest.raises(ProgramError) as e:
        load_program(os.path.join(programs_dir, name))
    assert len(e.value.violations) > 0

def test_save_and_load(tmp_path, unit_sig):
    matrix = CoefficientMatrix.from_entries({
        ("arg1 id a", "one u"): ExternalSource(Schedule.ramp([ (0, 0.0), (10, 1.0) ])),
        ("arg1 id b", "id a"): NodeSource("prop c"),
        ("arg1 id c", "one u"): ExternalSource(Schedule.ramp([ (0, 0.0), (10, 1.0) ])),
        ("arg1 prop c", "one u"): ExternalSource(Schedule(points=((0, 0.25), (3, 0.5)))),
    })
    program = Program(
        signature=unit_sig,
        matrix=matrix,
        seed=12,
        shared_input_groups=(frozenset({ "arg1 id a", "arg1 id c" }),),
        watch=("id b",)
    )
    path = str(tmp_path / "program.json")
    save_program(program, path)
    loaded = load_program(path)
    assert loaded.signature == program.signature
    assert loaded.matrix == program.matrix
    assert loaded.shared_input_groups == program.shared_input_groups
    assert (loaded.seed, loaded.watch) == (12, ("id b",))
    assert final_state(loaded, horizon=15) == final_state(program, horizon=15)

def test_source_needs_exactly_one_kind():
    with pytest.raises(ValidationError):
        SourceSpec()
    with pytest.raises(ValidationError):
        SourceSpec(const=1.0, node="id a")
    assert SourceSpec(node="id a").to_source() == NodeSource("id a")

def test_duplicate_elements_are_rejected():
    text = """
    {
      "signature": [ { "name": "id", "arity": 1, "kind": "deterministic" } ],
      "elements": [
        { "column": "arg1 id a", "row": "id b", "source": { "const": 1.0 } },
        { "column": "arg1 id a", "row": "id b", "source": { "const": 0.5 } }
      ]
    }
    """
    with pytest.raises(ValueError):
        ProgramFile.model_validate_json(text).to_program()

def test_evaluations_by_operation(programs_dir):
    program = load_program(os.path.join(programs_dir, "geometric.json"))
    state = final_state(program, horizon=10)
    usage = evaluations_by_operation(state.evaluations, program.signature)
    assert sorted(usage) == [ "id", "one" ]
    assert (usage["id"].nodes, usage["id"].evaluations) == (1, 10)

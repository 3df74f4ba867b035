import os

import pytest

from signature import Signature
from operations import constant, identity, propagator, standard_signature, summation
from elements import ConstantSource
from machine import CoefficientMatrix, Program


PROGRAMS_DIR = os.path.join(os.path.dirname(__file__), "programs")


@pytest.fixture
def programs_dir() -> str:
    return PROGRAMS_DIR

@pytest.fixture
def ca_sig() -> Signature:
    return standard_signature(p=0.995)

@pytest.fixture
def unit_sig() -> Signature:
    return Signature(operations=(identity(), constant("one", 1.0), summation(), propagator(p=0.5)))

@pytest.fixture
def geometric_program(unit_sig) -> Program:
    matrix = CoefficientMatrix.from_entries({
        ("arg1 id s", "one u"): ConstantSource(value=1.0),
        ("arg1 id s", "id s"): ConstantSource(value=0.5),
    })
    return Program(signature=unit_sig, matrix=matrix, seed=7, watch=("arg1 id s",))

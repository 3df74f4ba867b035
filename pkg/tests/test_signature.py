import random

import pytest

from signature import (
    ElementName, NameParseError, NodeRole, OperationDef, OperationKind, Signature, SignatureError,
    element_name, input_node_name, input_ports, output_node_name, parse_element_name, parse_name, validate_signature
)
from operations import constant, identity, product, standard_signature
from elements import controller_node_for


def make_sig(*names: str) -> Signature:
    ops = [ identity() ] + [ OperationDef.create(name=name, arity=1, kind=OperationKind.DETERMINISTIC, rule="id") for name in names ]
    return Signature(operations=tuple(ops))


####################################################################################################
# Signature validation
####################################################################################################

def test_standard_signature_is_valid():
    report = validate_signature(standard_signature())
    assert report.ok, report.violations

def test_prefix_clash_is_reported():
    report = validate_signature(make_sig("plus", "plusone"))
    assert not report.ok
    assert any("'plus' is a prefix of 'plusone'" in violation for violation in report.violations)

@pytest.mark.parametrize("name", [ "arg", "argue", "ar" ])
def test_clash_with_arg_is_reported(name):
    report = validate_signature(make_sig(name))
    assert not report.ok

def test_duplicate_names_are_reported():
    sig = Signature(operations=(identity(), constant("one", 1.0), constant("one", 2.0)))
    report = validate_signature(sig)
    assert any("more than once" in violation for violation in report.violations)

def test_missing_identity_is_reported():
    sig = Signature(operations=(constant("one", 1.0),))
    report = validate_signature(sig)
    assert any("missing" in violation for violation in report.violations)

def test_identity_must_be_unary_identity_rule():
    sig = Signature(operations=(OperationDef.create(name="id", arity=2, kind=OperationKind.DETERMINISTIC, rule="add"),))
    report = validate_signature(sig)
    assert len(report.violations) == 2

@pytest.mark.parametrize("name", [ "f(x)", "a#b", "" ])
def test_reserved_or_empty_names_are_reported(name):
    report = validate_signature(make_sig(name))
    assert not report.ok

def test_constant_with_arguments_is_reported():
    sig = Signature(operations=(identity(), OperationDef.create(name="c", arity=1, kind=OperationKind.CONSTANT, params={ "value": 1.0 })))
    assert not validate_signature(sig).ok


####################################################################################################
# Names
####################################################################################################

def test_output_and_input_names(ca_sig):
    output = output_node_name("prop", "c", ca_sig)
    assert output == "prop c"
    assert input_node_name(output, 1, ca_sig) == "arg1 prop c"
    parsed = parse_name("arg1 prop c", ca_sig)
    assert parsed.role == NodeRole.INPUT
    assert parsed.k == 1
    assert parsed.owner == "prop c"
    assert parsed.op_name == "prop"
    parsed = parse_name("white u", ca_sig)
    assert parsed.role == NodeRole.OUTPUT
    assert parsed.suffix == "u"

def test_suffix_may_be_empty_or_contain_spaces(ca_sig):
    assert parse_name("id ", ca_sig).role == NodeRole.OUTPUT
    assert parse_name("id a b c", ca_sig).suffix == "a b c"

@pytest.mark.parametrize("name", [
    "foo x",            # unknown operation
    "idx",              # no space after operation name
    "arg0 id x",        # k starts at 1
    "arg01 id x",       # no leading zeros
    "arg2 id x",        # beyond arity
    "arg1 arg1 id x",   # owner must be an output
    "arg1 white u",     # constants have no inputs
    "id (x)",           # suffix with reserved characters that is not an element name
    "id café",     # outside printable ASCII
])
def test_invalid_names(ca_sig, name):
    parsed = parse_name(name, ca_sig)
    assert parsed.role == NodeRole.INVALID
    assert not parsed.valid
    assert parsed.reason

def test_input_node_name_checks_index(ca_sig):
    with pytest.raises(SignatureError):
        input_node_name("prop c", 2, ca_sig)
    with pytest.raises(SignatureError):
        input_node_name("white u", 1, ca_sig)

def test_element_name_checks_roles(ca_sig):
    element = element_name("arg1 prop c", "white u", ca_sig)
    assert element.raw == "(arg1 prop c)#(white u)"
    with pytest.raises(SignatureError):
        element_name("white u", "arg1 prop c", ca_sig)

def test_element_round_trip(ca_sig):
    element = parse_element_name("(arg1 prop c)#(white u)", ca_sig)
    assert element == ElementName(column="arg1 prop c", row="white u")
    with pytest.raises(NameParseError):
        parse_element_name("(arg1 prop c)(white u)", ca_sig)
    with pytest.raises(NameParseError):
        parse_element_name("(white u)#(arg1 prop c)", ca_sig)

def test_controller_names_nest(ca_sig):
    element = ElementName(column="arg1 prop c", row="white u")
    controller = controller_node_for(element, ca_sig)
    assert controller == "id (arg1 prop c)#(white u)"
    parsed = parse_name(controller, ca_sig)
    assert parsed.role == NodeRole.OUTPUT
    assert parsed.element == element

    # Controller of an element between controller nodes
    outer = ElementName(column=input_node_name(controller, 1, ca_sig), row=controller)
    nested = controller_node_for(outer, ca_sig)
    parsed = parse_name(nested, ca_sig)
    assert parsed.valid
    assert parsed.element == outer
    assert parse_name(parsed.element.row, ca_sig).element == element

def test_input_ports():
    sig = Signature(operations=(identity(), product(arity=3)))
    assert input_ports("mul x", sig) == ("arg1 mul x", "arg2 mul x", "arg3 mul x")
    with pytest.raises(NameParseError):
        input_ports("arg1 mul x", sig)

def test_randomized_compose_parse_round_trip(ca_sig):
    rng = random.Random(1234)
    alphabet = "abcxyz _-.0123"
    ops = [ "id", "prop", "white", "black" ]

    def random_output(depth: int) -> str:
        op = rng.choice(ops)
        if depth > 0 and rng.random() < 0.5:
            row = random_output(depth - 1)
            column_owner = random_output(depth - 1)
            while parse_name(column_owner, ca_sig).op_name in ("white", "black"):
                column_owner = random_output(depth - 1)
            column = input_node_name(column_owner, 1, ca_sig)
            return output_node_name(op, element_name(column, row, ca_sig).raw, ca_sig)
        w = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 6)))
        return output_node_name(op, w, ca_sig)

    failures = 0
    for _ in range(10000):
        output = random_output(depth=3)
        parsed = parse_name(output, ca_sig)
        if parsed.role != NodeRole.OUTPUT or parsed.op_name + " " + parsed.suffix != output:
            failures += 1
        if parsed.element is not None and parsed.element.raw != parsed.suffix:
            failures += 1
    assert failures == 0

def test_prefix_free_signatures_parse_names_uniquely():
    rng = random.Random(99)
    letters = "abgirx"
    alphabet = "abgirx _-.0"
    checked = 0
    for _ in range(300):
        names = sorted({ "".join(rng.choice(letters) for _ in range(rng.randint(1, 3))) for _ in range(rng.randint(1, 5)) } - { "id" })
        sig = make_sig(*names)
        if not validate_signature(sig).ok:
            continue
        checked += 1
        for _ in range(50):
            op = rng.choice(sig.names())
            w = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))
            output = output_node_name(op, w, sig)
            assert [ name for name in sig.names() if output.startswith(name + " ") ] == [ op ]
            parsed = parse_name(output, sig)
            assert (parsed.role, parsed.op_name, parsed.suffix) == (NodeRole.OUTPUT, op, w)
            column = input_node_name(output, 1, sig)
            parsed = parse_name(column, sig)
            assert (parsed.role, parsed.k, parsed.owner) == (NodeRole.INPUT, 1, output)
            row = output_node_name(rng.choice(sig.names()), w[::-1], sig)
            element = element_name(column, row, sig)
            assert parse_element_name(element.raw, sig) == element
            nested = parse_name(output_node_name(op, element.raw, sig), sig)
            assert (nested.op_name, nested.element) == (op, element)
    assert checked >= 50

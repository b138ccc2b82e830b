"""Canonical text form: determinism, round trips and rejection of
malformed documents."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import power_product, square_plus_input
from eva import generate, passes
from eva.errors import ParseError
from eva.ir import NodeKind, OpCode, Program, ValueType
from eva.serialize import load_program, save_program


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_round_trip_is_identity(seed):
    p = generate.generate_program(seed)
    text = save_program(p)
    q = load_program(text)
    assert save_program(q) == text
    assert q.vec_size == p.vec_size
    assert q.output_ids == p.output_ids
    assert set(q.nodes) == set(p.nodes)
    for i, n in p.nodes.items():
        m = q.nodes[i]
        assert (m.kind, m.opcode, m.params, m.type, m.value, m.scale) == (
            n.kind,
            n.opcode,
            n.params,
            n.type,
            n.value,
            n.scale,
        )


def test_compiled_programs_round_trip():
    compiled = passes.compile(power_product().program).program
    text = save_program(compiled)
    assert save_program(load_program(text)) == text


def test_serialization_is_deterministic_and_id_sorted():
    def build(order):
        p = Program(4)
        for i in order:
            p.add_input(ValueType.CIPHER, 30.0, id=i)
        m = p.add_instruction(OpCode.ADD, [min(order), max(order)], id=9)
        p.add_output(m.id, 30.0, id=10)
        return p

    assert save_program(build([3, 1])) == save_program(build([1, 3]))
    doc = json.loads(save_program(build([3, 1])))
    assert [e["id"] for e in doc["inputs"]] == [1, 3]
    assert doc["version"] == 1
    assert set(doc) == {"version", "vec_size", "constants", "inputs", "outputs", "insts"}


def test_rotate_step_constants_load_as_integer():
    p = generate.generate_program(3)
    q = load_program(save_program(p))
    for n in q.instructions:
        if n.opcode in (OpCode.ROTATE_LEFT, OpCode.ROTATE_RIGHT, OpCode.RESCALE):
            assert q.nodes[n.params[1]].type is ValueType.INTEGER


def _doc(**overrides):
    base = {
        "version": 1,
        "vec_size": 4,
        "constants": [],
        "inputs": [{"id": 0, "type": "VECTOR_CIPHER", "scale": 30.0}],
        "insts": [{"id": 1, "op_code": "NEGATE", "args": [0]}],
        "outputs": [{"id": 2, "args": [1], "scale": 30.0}],
    }
    base.update(overrides)
    return json.dumps(base)


def test_load_rejects_malformed_documents():
    with pytest.raises(ParseError):
        load_program("{not json")
    with pytest.raises(ParseError):
        load_program(_doc(version=2))
    with pytest.raises(ParseError):
        load_program(_doc(vec_size=3))
    with pytest.raises(ParseError):
        load_program(_doc(insts=[{"id": 1, "op_code": "SUM", "args": [0]}]))
    with pytest.raises(ParseError):
        load_program(
            _doc(insts=[{"id": 1, "op_code": "NORMALIZE_SCALE", "args": [0]}])
        )
    with pytest.raises(ParseError):
        load_program(_doc(insts=[{"id": 1, "op_code": "FROBNICATE", "args": [0]}]))
    with pytest.raises(ParseError):
        load_program(_doc(insts=[{"id": 1, "op_code": "NEGATE", "args": [42]}]))
    with pytest.raises(ParseError):
        load_program(_doc(outputs=[{"id": 2, "args": [1, 1], "scale": 30.0}]))
    with pytest.raises(ParseError):
        load_program(
            _doc(constants=[{"id": 3, "type": "VECTOR_CIPHER", "scale": 30.0, "elements": [1.0]}])
        )


def test_rescale_divisor_must_be_one_integer():
    doc = _doc(
        constants=[
            {"id": 3, "type": "SCALAR_CONST", "scale": 0.0, "elements": [1.5]}
        ],
        insts=[{"id": 1, "op_code": "RESCALE", "args": [0, 3]}],
    )
    with pytest.raises(ParseError):
        load_program(doc)


def test_plain_and_const_type_names_both_load():
    doc = _doc(
        constants=[
            {"id": 3, "type": "VECTOR_PLAIN", "scale": 30.0, "elements": [1.0]},
            {"id": 4, "type": "SCALAR_PLAIN", "scale": 30.0, "elements": [2.0]},
        ]
    )
    q = load_program(doc)
    assert q.nodes[3].type is ValueType.VECTOR
    assert q.nodes[4].type is ValueType.SCALAR
    # both re-serialize under the canonical CONST names
    redoc = json.loads(save_program(q))
    names = {e["type"] for e in redoc["constants"]}
    assert names == {"VECTOR_CONST", "SCALAR_CONST"}


def test_scale_matching_constant_survives_round_trip():
    compiled = passes.compile(square_plus_input().program).program
    q = load_program(save_program(compiled))
    ones = [
        n
        for n in q.constants
        if n.type is ValueType.VECTOR and set(n.value) == {1.0}
    ]
    assert len(ones) == 1 and ones[0].scale == 30.0

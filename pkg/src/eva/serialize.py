"""Canonical text serialization of programs.

The on-disk form is a UTF-8 JSON document with a `version` header and the
fields `vec_size`, `constants`, `inputs`, `outputs`, `insts`. Constant and
input entries carry `id`, `type`, `scale` (log2) and, for constants,
`elements`; instruction entries carry `id`, `op_code`, `args`; output
entries carry `id`, `args` (the producing node) and `scale` (desired
output scale, log2). Entries are emitted sorted by id so equal programs
serialize byte-identically.

PLAIN and CONST object types both denote unencrypted values. Rotate step
counts and rescale divisor exponents are stored as scalar constants and
coerced to Integer type when an instruction references them in its second
argument slot; a rescale divisor constant holds the log2 of the divisor.
"""

from __future__ import annotations

import json
from typing import Union

from .errors import GraphError, ParseError
from .ir import Node, NodeKind, OpCode, Program, ValueType

FORMAT_VERSION = 1

#: Serialized opcodes we refuse to load.
UNSUPPORTED_OPCODES = {"SUM", "NORMALIZE_SCALE"}

_TYPE_NAMES = {
    (ValueType.SCALAR, False): "SCALAR_CONST",
    (ValueType.VECTOR, False): "VECTOR_CONST",
    (ValueType.SCALAR, True): "SCALAR_CIPHER",
    (ValueType.VECTOR, True): "VECTOR_CIPHER",
}

_NAME_TYPES = {
    "SCALAR_CONST": ValueType.SCALAR,
    "SCALAR_PLAIN": ValueType.SCALAR,
    "VECTOR_CONST": ValueType.VECTOR,
    "VECTOR_PLAIN": ValueType.VECTOR,
    "SCALAR_CIPHER": ValueType.CIPHER,
    "VECTOR_CIPHER": ValueType.CIPHER,
}


def _type_name(node: Node) -> str:
    if node.type is ValueType.CIPHER:
        return "VECTOR_CIPHER"
    if node.type is ValueType.INTEGER:
        return "SCALAR_CONST"
    return _TYPE_NAMES[(node.type, False)]


def save_program(program: Program) -> str:
    """Serialize to the canonical text form. Deterministic: equal programs
    produce byte-identical documents."""
    constants = []
    inputs = []
    outputs = []
    insts = []
    for n in sorted(program.nodes.values(), key=lambda n: n.id):
        if n.kind is NodeKind.CONSTANT:
            constants.append(
                {
                    "id": n.id,
                    "type": _type_name(n),
                    "scale": n.scale,
                    "elements": n.value,
                }
            )
        elif n.kind is NodeKind.INPUT:
            inputs.append({"id": n.id, "type": _type_name(n), "scale": n.scale})
        elif n.kind is NodeKind.OUTPUT:
            outputs.append({"id": n.id, "args": list(n.params), "scale": n.scale})
        else:
            insts.append({"id": n.id, "op_code": n.opcode.value, "args": list(n.params)})
    doc = {
        "version": FORMAT_VERSION,
        "vec_size": program.vec_size,
        "constants": constants,
        "inputs": inputs,
        "outputs": outputs,
        "insts": insts,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParseError(msg)


def load_program(text: Union[str, bytes]) -> Program:
    """Parse the canonical text form, check all graph invariants, and
    return the Program."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    _require(isinstance(doc, dict), "top level must be an object")
    version = doc.get("version")
    _require(version == FORMAT_VERSION, f"unsupported format version {version!r}")
    vec_size = doc.get("vec_size")
    _require(isinstance(vec_size, int), "vec_size must be an integer")
    try:
        program = Program(vec_size)
    except GraphError as e:
        raise ParseError(str(e)) from None

    for field in ("constants", "inputs", "outputs", "insts"):
        _require(isinstance(doc.get(field, []), list), f"{field} must be a list")

    for entry in doc.get("constants", []):
        tname = entry.get("type")
        _require(tname in _NAME_TYPES, f"unknown object type {tname!r}")
        vtype = _NAME_TYPES[tname]
        _require(vtype is not ValueType.CIPHER, f"constant {entry.get('id')} cannot be cipher")
        elements = entry.get("elements")
        _require(isinstance(elements, list) and elements, "constant needs elements")
        try:
            program.add_constant(vtype, float(entry["scale"]), elements, id=entry["id"])
        except (KeyError, TypeError, ValueError, GraphError) as e:
            raise ParseError(f"bad constant entry: {e}") from None

    for entry in doc.get("inputs", []):
        tname = entry.get("type")
        _require(tname in _NAME_TYPES, f"unknown object type {tname!r}")
        try:
            program.add_input(_NAME_TYPES[tname], float(entry["scale"]), id=entry["id"])
        except (KeyError, TypeError, ValueError, GraphError) as e:
            raise ParseError(f"bad input entry: {e}") from None

    for entry in doc.get("insts", []):
        name = entry.get("op_code")
        if name in UNSUPPORTED_OPCODES:
            raise ParseError(f"unsupported opcode {name}")
        try:
            opcode = OpCode(name)
        except ValueError:
            raise ParseError(f"unknown opcode {name!r}") from None
        try:
            program.add_instruction(opcode, entry["args"], id=entry["id"])
        except (KeyError, TypeError, GraphError) as e:
            raise ParseError(f"bad instruction entry: {e}") from None

    for entry in doc.get("outputs", []):
        try:
            args = entry["args"]
            _require(isinstance(args, list) and len(args) == 1, "output needs one arg")
            program.add_output(args[0], float(entry["scale"]), id=entry["id"])
        except (KeyError, TypeError, ValueError, GraphError) as e:
            raise ParseError(f"bad output entry: {e}") from None

    # Rotate steps and rescale divisor exponents ride on scalar constants;
    # mark them Integer now that the referencing instructions are known.
    for n in program.instructions:
        if n.opcode in (OpCode.ROTATE_LEFT, OpCode.ROTATE_RIGHT, OpCode.RESCALE):
            ref = program.nodes.get(n.params[1])
            _require(ref is not None, f"node {n.id} references missing node {n.params[1]}")
            _require(
                ref.kind is NodeKind.CONSTANT,
                f"node {n.id}: second operand must be a constant node",
            )
            _require(
                len(ref.value) == 1 and float(ref.value[0]).is_integer(),
                f"node {n.id}: step/divisor constant must hold one integer",
            )
            ref.type = ValueType.INTEGER

    try:
        program.check_structure()
    except GraphError as e:
        raise ParseError(str(e)) from None
    return program

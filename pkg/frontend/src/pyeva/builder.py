"""Expression-recording program builder.

Inside a ``with program:`` block every operator application on Expr values
appends a node to the active program. The result serializes to the
canonical program text format consumed by the eva toolchain; the builder
never imports the toolchain, so the file format is the only coupling.
"""

from __future__ import annotations

import json
from typing import Optional, Sequence, Union

FORMAT_VERSION = 1


class BuilderError(Exception):
    """Misuse of the recording API."""


_active: list["Program"] = []


def _current() -> "Program":
    if not _active:
        raise BuilderError("operations are only recorded inside a 'with program:' block")
    return _active[-1]


class Expr:
    """Reference to a recorded node. Operators append new nodes and never
    mutate existing ones."""

    __slots__ = ("program", "node_id")

    def __init__(self, program: "Program", node_id: int):
        self.program = program
        self.node_id = node_id

    def _binary(self, op_code: str, other: "Expr") -> "Expr":
        if not isinstance(other, Expr):
            raise BuilderError(
                f"operand must be an Expr (wrap literals with constant()), got {type(other).__name__}"
            )
        if other.program is not self.program:
            raise BuilderError("cannot mix expressions from different programs")
        return self.program._inst(op_code, [self.node_id, other.node_id])

    def __add__(self, other: "Expr") -> "Expr":
        return self._binary("ADD", other)

    def __sub__(self, other: "Expr") -> "Expr":
        return self._binary("SUB", other)

    def __mul__(self, other: "Expr") -> "Expr":
        return self._binary("MULTIPLY", other)

    def __neg__(self) -> "Expr":
        return self.program._inst("NEGATE", [self.node_id])

    def __pow__(self, k: int) -> "Expr":
        if not isinstance(k, int) or k < 1:
            raise BuilderError(f"power must be a positive integer, got {k!r}")
        out = self
        for _ in range(k - 1):  # left-associative repeated multiply
            out = out * self
        return out

    def _rotate(self, op_code: str, steps: int) -> "Expr":
        if not isinstance(steps, int) or steps < 0:
            raise BuilderError(f"rotation step must be a non-negative integer, got {steps!r}")
        step = self.program._constant_node("SCALAR_CONST", 0.0, [float(steps)])
        return self.program._inst(op_code, [self.node_id, step])

    def __lshift__(self, steps: int) -> "Expr":
        return self._rotate("ROTATE_LEFT", steps)

    def __rshift__(self, steps: int) -> "Expr":
        return self._rotate("ROTATE_RIGHT", steps)


class Program:
    """A program under construction with a fixed power-of-two vector size."""

    def __init__(self, vec_size: int):
        if vec_size < 1 or vec_size & (vec_size - 1):
            raise BuilderError(f"vec_size {vec_size} is not a power of two")
        self.vec_size = vec_size
        self._constants: list[dict] = []
        self._inputs: list[dict] = []
        self._insts: list[dict] = []
        self._outputs: list[dict] = []
        self._next_id = 0

    # -- context management ---------------------------------------------

    def __enter__(self) -> "Program":
        _active.append(self)
        return self

    def __exit__(self, *exc) -> None:
        assert _active and _active[-1] is self
        _active.pop()

    def _require_active(self) -> None:
        if not _active or _active[-1] is not self:
            raise BuilderError("this program's context block is not active")

    # -- node recording -------------------------------------------------

    def _fresh(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def _constant_node(self, type_name: str, scale: float, elements: list[float]) -> int:
        self._require_active()
        i = self._fresh()
        self._constants.append(
            {"id": i, "type": type_name, "scale": float(scale), "elements": elements}
        )
        return i

    def _inst(self, op_code: str, args: list[int]) -> Expr:
        self._require_active()
        i = self._fresh()
        self._insts.append({"id": i, "op_code": op_code, "args": args})
        return Expr(self, i)

    def input_encrypted(self, scale: float) -> Expr:
        self._require_active()
        if scale <= 0:
            raise BuilderError(f"input scale must be positive, got {scale!r}")
        i = self._fresh()
        self._inputs.append({"id": i, "type": "VECTOR_CIPHER", "scale": float(scale)})
        return Expr(self, i)

    def constant(self, scale: float, value: Union[float, int, Sequence[float]]) -> Expr:
        self._require_active()
        if scale <= 0:
            raise BuilderError(f"constant scale must be positive, got {scale!r}")
        if isinstance(value, (int, float)):
            name, elements = "SCALAR_CONST", [float(value)]
        else:
            elements = [float(v) for v in value]
            k = len(elements)
            if k < 1 or k & (k - 1) or k > self.vec_size:
                raise BuilderError(
                    f"constant vector length {k} must be a power of two at most {self.vec_size}"
                )
            name = "VECTOR_CONST"
        return Expr(self, self._constant_node(name, scale, elements))

    def output(self, expr: Expr, scale: float) -> None:
        self._require_active()
        if not isinstance(expr, Expr) or expr.program is not self:
            raise BuilderError("output must name an expression of this program")
        i = self._fresh()
        self._outputs.append({"id": i, "args": [expr.node_id], "scale": float(scale)})

    # -- emission -------------------------------------------------------

    def serialize(self) -> str:
        """Canonical program text; builds of the same script are
        byte-identical."""
        doc = {
            "version": FORMAT_VERSION,
            "vec_size": self.vec_size,
            "constants": self._constants,
            "inputs": self._inputs,
            "outputs": self._outputs,
            "insts": self._insts,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def save(self, path: str) -> str:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.serialize())
        return path

    @property
    def input_ids(self) -> list[int]:
        return [e["id"] for e in self._inputs]

    @property
    def output_ids(self) -> list[int]:
        return [e["id"] for e in self._outputs]


# -- module-level recording surface -------------------------------------


def input_encrypted(scale: float) -> Expr:
    return _current().input_encrypted(scale)


def constant(scale: float, value: Union[float, int, Sequence[float]]) -> Expr:
    return _current().constant(scale, value)


def output(expr: Expr, scale: float) -> None:
    _current().output(expr, scale)

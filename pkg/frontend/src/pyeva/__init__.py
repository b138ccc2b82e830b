"""Embedded DSL for recording encrypted vector-arithmetic programs.

Build a Program, record expressions inside its ``with`` block through the
overloaded operators, then save it in the canonical program text format
and drive the eva CLI via the toolchain helpers.
"""

from .builder import BuilderError, Expr, Program, constant, input_encrypted, output
from . import toolchain

__version__ = "0.1.0"

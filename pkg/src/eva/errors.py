"""Exception hierarchy for the toolchain.

The CLI maps these onto exit codes: validation failures exit 1, parse and
I/O problems exit 2, internal assertion failures exit 3.
"""

from __future__ import annotations


class EvaError(Exception):
    """Base class for all toolchain errors."""


class ParseError(EvaError):
    """Malformed or unsupported serialized program."""


class GraphError(EvaError):
    """Structural problem in a program graph: cycles, dangling edges,
    arity mismatches, bad vector sizes."""


class CompileError(EvaError):
    """Compilation aborted because the transformed program failed
    validation. Carries the violation list."""

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"validation failed: {lines}")


class ExecutionError(EvaError):
    """Reference execution failed: missing inputs, length mismatches,
    non-finite intermediate results."""

"""Shared fixtures driving recorded programs through the toolchain."""

from __future__ import annotations

import pytest

from pyeva import toolchain


@pytest.fixture()
def drive(tmp_path):
    """Save, compile and run a recorded program in one call."""

    def _drive(program, inputs, threads=1):
        src = str(tmp_path / "prog.json")
        compiled = str(tmp_path / "compiled.json")
        program.save(src)
        toolchain.compile(src, compiled)
        assert toolchain.validate(compiled) == []
        return toolchain.run(
            compiled, inputs, str(tmp_path / "inputs.txt"), threads=threads
        )

    return _drive

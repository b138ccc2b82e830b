"""Thin subprocess wrapper around the eva command-line toolchain.

The frontend talks to the compiler exclusively through program files and
the CLI; nothing here imports the compiler package.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from typing import Optional, Sequence


class ToolchainError(Exception):
    """A CLI invocation failed; carries the captured output."""


def _eva_argv() -> list[str]:
    exe = shutil.which("eva")
    if exe:
        return [exe]
    return [sys.executable, "-m", "eva.cli"]


def _invoke(args: Sequence[str]) -> str:
    proc = subprocess.run(
        _eva_argv() + list(args), capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise ToolchainError(
            f"eva {' '.join(args)} exited {proc.returncode}:\n{proc.stdout}{proc.stderr}"
        )
    return proc.stdout


def compile(
    in_path: str,
    out_path: str,
    sf: Optional[float] = None,
    output_scales: Optional[dict[int, float]] = None,
) -> str:
    args = ["compile", "-i", in_path, "-o", out_path]
    if sf is not None:
        args += ["--sf", str(sf)]
    for leaf, scale in (output_scales or {}).items():
        args += ["--so", f"{leaf}={scale}"]
    return _invoke(args)


def validate(path: str) -> list[dict]:
    """Violations as dicts; empty means the program is clean."""
    proc = subprocess.run(
        _eva_argv() + ["validate", "-i", path, "--format", "json-lines"],
        capture_output=True,
        text=True,
    )
    if proc.returncode not in (0, 1):
        raise ToolchainError(f"validate exited {proc.returncode}: {proc.stderr}")
    return [json.loads(line) for line in proc.stdout.splitlines() if line.strip()]


def params(path: str) -> dict:
    merged: dict = {}
    for line in _invoke(["params", "-i", path, "--format", "json-lines"]).splitlines():
        merged.update(json.loads(line))
    return merged


def run(
    path: str,
    inputs: dict[int, Sequence[float]],
    inputs_path: str,
    threads: int = 1,
    quantize: bool = False,
) -> dict[int, list[float]]:
    """Execute a compiled program; returns output values keyed by leaf id."""
    with open(inputs_path, "w", encoding="utf-8") as f:
        for node_id, values in inputs.items():
            f.write(f"{node_id}: {json.dumps(list(values))}\n")
    args = ["run", "-i", path, "--inputs", inputs_path, "--threads", str(threads)]
    if quantize:
        args.append("--quantize")
    outputs: dict[int, list[float]] = {}
    for line in _invoke(args).splitlines():
        key, _, rest = line.partition(":")
        outputs[int(key)] = json.loads(rest)
    return outputs

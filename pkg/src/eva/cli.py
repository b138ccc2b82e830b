"""Command-line entry point.

Exit codes: 0 success, 1 validation failure, 2 parse/I-O error, 3 internal
error. The EVA_SF environment variable overrides the default rescale-cap
exponent (60).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import executor, generate, params, passes, validate
from .errors import CompileError, EvaError, ExecutionError, GraphError, ParseError
from .ir import NodeKind, Program
from .serialize import load_program, save_program

EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


def _default_sf() -> float:
    return float(os.environ.get("EVA_SF", "60"))


def _load(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as f:
        return load_program(f.read())


def _parse_so(pairs: list[str]) -> dict[int, float]:
    out = {}
    for pair in pairs:
        key, _, val = pair.partition("=")
        out[int(key)] = float(val)
    return out


def _params_lines(result, fmt: str) -> list[str]:
    rots = sorted(result.rotation_steps)
    if fmt == "json-lines":
        return [
            json.dumps({"bits": result.bit_sizes}),
            json.dumps({"rotations": rots}),
            json.dumps(
                {"r": result.r, "logQ": result.logQ, "poly_degree": result.poly_degree}
            ),
        ]
    return [
        f"bits: {result.bit_sizes}",
        "rotations: {" + ", ".join(str(s) for s in rots) + "}",
        f"r: {result.r} logQ: {result.logQ}",
    ]


def _print_violations(violations, fmt: str) -> None:
    for v in violations:
        if fmt == "json-lines":
            print(
                json.dumps(
                    {"constraint": v.constraint, "node": v.node, "detail": v.detail}
                )
            )
        else:
            print(str(v))


def _read_inputs(path: str):
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, rest = line.partition(":")
            values[int(key)] = json.loads(rest)
    return values


def cmd_compile(args) -> int:
    program = _load(args.input)
    result = passes.compile(
        program, sf=args.sf, output_scales=_parse_so(args.so or [])
    )
    with open(args.output, "w", encoding="utf-8") as f:
        f.write(save_program(result.program))
    with open(args.output + ".params", "w", encoding="utf-8") as f:
        f.write("\n".join(_params_lines(result, args.format)) + "\n")
    print(f"compiled {args.input} -> {args.output} (r={result.r}, logQ={result.logQ})")
    return 0


def cmd_validate(args) -> int:
    violations = validate.check_all(_load(args.input), sf=args.sf)
    _print_violations(violations, args.format)
    return EXIT_VALIDATION if violations else 0


def cmd_params(args) -> int:
    result = params.select(_load(args.input), sf=args.sf)
    print("\n".join(_params_lines(result, args.format)))
    return 0


def cmd_keys(args) -> int:
    steps = sorted(params.select_rotation_steps(_load(args.input)))
    if args.format == "json-lines":
        print(json.dumps({"rotations": steps}))
    else:
        print("rotations: {" + ", ".join(str(s) for s in steps) + "}")
    return 0


def cmd_run(args) -> int:
    program = _load(args.input)
    inputs = _read_inputs(args.inputs) if args.inputs else {}
    report = executor.execute(
        program,
        inputs,
        threads=args.threads,
        mode="quantized" if args.quantize else "exact",
        collect_trace=args.trace is not None,
    )
    for leaf, value in zip(program.outputs, report.outputs):
        print(f"{leaf.id}: {json.dumps(value.data.tolist())}")
    if args.trace is not None:
        with open(args.trace, "w", encoding="utf-8") as f:
            f.write("node,start,end,worker\n")
            for t in report.trace:
                f.write(f"{t.node},{t.start:.9f},{t.end:.9f},{t.worker}\n")
    return 0


def cmd_export_dot(args) -> int:
    program = _load(args.input)
    lines = ["digraph program {"]
    for n in program.nodes.values():
        if n.kind is NodeKind.INSTRUCTION:
            label = n.opcode.value
        elif n.kind is NodeKind.OUTPUT:
            label = f"OUTPUT@2^{n.scale:g}"
        elif n.kind is NodeKind.INPUT:
            label = f"input@2^{n.scale:g}"
        else:
            label = f"const@2^{n.scale:g}"
        lines.append(f'  n{n.id} [label="{n.id}: {label}"];')
        for p in n.params:
            lines.append(f"  n{p} -> n{n.id};")
    lines.append("}")
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def cmd_gen(args) -> int:
    program = generate.generate_program(
        seed=args.seed,
        n_insts=args.insts,
        vec_size=args.vec_size,
        n_inputs=args.inputs,
        leaf_scale=args.scale,
    )
    text = save_program(program)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eva")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output=False):
        p.add_argument("-i", "--input", required=True)
        p.add_argument("--sf", type=float, default=_default_sf())
        p.add_argument("--format", choices=["text", "json-lines"], default="text")
        if output:
            p.add_argument("-o", "--output", required=True)

    c = sub.add_parser("compile", help="transform, validate and select parameters")
    common(c, output=True)
    c.add_argument("--so", action="append", metavar="ID=LOG2SCALE")
    c.set_defaults(fn=cmd_compile)

    v = sub.add_parser("validate", help="check constraints, print violations")
    common(v)
    v.set_defaults(fn=cmd_validate)

    pr = sub.add_parser("params", help="print parameter selection for a compiled program")
    common(pr)
    pr.set_defaults(fn=cmd_params)

    k = sub.add_parser("keys", help="print rotation key steps")
    common(k)
    k.set_defaults(fn=cmd_keys)

    r = sub.add_parser("run", help="execute under the reference scheme")
    common(r)
    r.add_argument("--inputs")
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--quantize", action="store_true")
    r.add_argument("--trace", metavar="CSV")
    r.set_defaults(fn=cmd_run)

    d = sub.add_parser("export-dot", help="emit a graph description for visualization")
    d.add_argument("-i", "--input", required=True)
    d.add_argument("-o", "--output")
    d.set_defaults(fn=cmd_export_dot)

    g = sub.add_parser("gen", help="generate a random valid program")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--insts", type=int, default=8)
    g.add_argument("--vec-size", type=int, default=8)
    g.add_argument("--inputs", type=int, default=2)
    g.add_argument("--scale", type=float, default=30.0)
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CompileError as e:
        _print_violations(
            [validate.Violation(0, -1, str(v)) for v in e.violations]
            if not all(isinstance(v, validate.Violation) for v in e.violations)
            else e.violations,
            args.format if hasattr(args, "format") else "text",
        )
        return EXIT_VALIDATION
    except (ParseError, GraphError, ExecutionError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (EvaError, AssertionError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

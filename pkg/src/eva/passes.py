"""The graph transformation pipeline.

Main pipeline order is fixed: waterline rescaling, then eager modulus
switching, then scale matching, then relinearization. Always-rescale and
lazy modulus switching are kept as baselines for comparison. Every pass is
idempotent: applied to its own output it changes nothing.
"""

from __future__ import annotations

from typing import Optional

from .errors import CompileError, GraphError
from . import analysis
from .ir import (
    MERGE_OPS,
    NodeKind,
    OpCode,
    Program,
    ValueType,
    COMPILER_ONLY,
    replicate_inputs,
)
from .rewrite import PassDirection, RewriteContext, Rule, rewrite

DEFAULT_SF = 60.0

_INSERTED_AFTER_MULTIPLY = (OpCode.RESCALE, OpCode.RELINEARIZE)


def default_waterline(program: Program) -> float:
    """Largest declared scale over all constants and inputs (log2)."""
    leaves = [
        n.scale
        for n in program.nodes.values()
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT)
        and n.type is not ValueType.INTEGER
    ]
    if not leaves:
        raise GraphError("program has no constants or inputs")
    return max(leaves)


def _multiply_already_processed(ctx: RewriteContext, node_id: int) -> bool:
    """True when a rescale or relinearize was already spliced below this
    multiply. Input programs cannot contain those opcodes, so their presence
    means a previous pass application handled the node; this makes the
    rescale passes idempotent."""
    return any(
        ctx.program.nodes[cid].opcode in _INSERTED_AFTER_MULTIPLY
        for cid, _ in ctx.children[node_id]
    )


class _ScaleTracker:
    """Incremental scale/type bookkeeping for forward rewrite rules.

    Rules splice nodes below the node being visited, so plain recomputation
    would be quadratic; instead each visitor records the scale of the nodes
    it creates.
    """

    def __init__(self, program: Program):
        self.types = analysis.compute_types(program)
        self.scales: dict[int, float] = {}

    def visit(self, program: Program, node) -> float:
        n = node
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            s = float(n.scale)
        elif n.kind is NodeKind.OUTPUT:
            s = self.scales[n.params[0]]
        elif n.opcode is OpCode.MULTIPLY:
            s = self.scales[n.params[0]] + self.scales[n.params[1]]
        elif n.opcode in (OpCode.ADD, OpCode.SUB):
            s = max(self.scales[n.params[0]], self.scales[n.params[1]])
        elif n.opcode is OpCode.RESCALE:
            s = self.scales[n.params[0]] - analysis.rescale_divisor(program, n)
        else:
            s = self.scales[n.params[0]]
        self.scales[n.id] = s
        return s

    def record(self, node_id: int, scale: float, vtype: ValueType) -> None:
        self.scales[node_id] = scale
        self.types[node_id] = vtype


def waterline_rescale(
    program: Program, sf: float = DEFAULT_SF, sw: Optional[float] = None
) -> Program:
    """Insert a Rescale by sf after every cipher multiply whose rescaled
    scale would still sit at or above the waterline sw. The waterline
    defaults to the largest leaf scale, so values never drop below the
    precision their producers were encoded with."""
    if sw is None:
        sw = default_waterline(program)
    tracker = _ScaleTracker(program)

    def visit(ctx: RewriteContext, node) -> None:
        s = tracker.visit(ctx.program, node)
        if (
            node.opcode is OpCode.MULTIPLY
            and tracker.types.get(node.id) is ValueType.CIPHER
            and s - sf >= sw
            and not _multiply_already_processed(ctx, node.id)
        ):
            div = ctx.add_integer_constant(int(sf))
            tracker.record(div.id, 0.0, ValueType.INTEGER)
            r = ctx.splice_after(node.id, OpCode.RESCALE, extra_param=div.id)
            tracker.record(r.id, s - sf, ValueType.CIPHER)

    return rewrite(program, Rule("waterline-rescale", PassDirection.FORWARD, visit))


def always_rescale(program: Program, sf: float = DEFAULT_SF) -> Program:
    """Baseline: rescale after every cipher-cipher multiply by the smaller
    operand scale."""

    tracker = _ScaleTracker(program)

    def visit(ctx: RewriteContext, node) -> None:
        s = tracker.visit(ctx.program, node)
        if (
            node.opcode is OpCode.MULTIPLY
            and all(tracker.types.get(p) is ValueType.CIPHER for p in node.params)
            and not _multiply_already_processed(ctx, node.id)
        ):
            d = min(tracker.scales[p] for p in node.params)
            if d > sf:
                d = sf
            div = ctx.add_integer_constant(int(d))
            tracker.record(div.id, 0.0, ValueType.INTEGER)
            r = ctx.splice_after(node.id, OpCode.RESCALE, extra_param=div.id)
            tracker.record(r.id, s - d, ValueType.CIPHER)

    return rewrite(program, Rule("always-rescale", PassDirection.FORWARD, visit))


def _insert_modswitch_chain(ctx: RewriteContext, parent_id: int, edges, count: int):
    """Splice a chain of `count` ModSwitch nodes between parent and the
    given consumer edges; returns the inserted node ids."""
    inserted = []
    cur = parent_id
    for _ in range(count):
        m = ctx.splice_between(cur, list(edges), OpCode.MOD_SWITCH)
        inserted.append(m.id)
        cur = m.id
    return inserted


def lazy_modswitch(program: Program) -> Program:
    """Baseline: forward pass inserting ModSwitch chains directly on the
    lower-level operand edge of each cipher Add/Sub/Multiply."""
    types = analysis.compute_types(program)
    level: dict[int, float] = {}

    def node_level(ctx, n) -> int:
        if n.kind in (NodeKind.CONSTANT, NodeKind.INPUT):
            return 0
        if n.opcode in (OpCode.RESCALE, OpCode.MOD_SWITCH):
            return level[n.params[0]] + 1
        cipher = [p for p in n.params if types.get(p) is ValueType.CIPHER]
        return max((level[p] for p in cipher), default=0)

    def visit(ctx: RewriteContext, node) -> None:
        if (
            node.kind is NodeKind.INSTRUCTION
            and node.opcode in MERGE_OPS
            and all(types.get(p) is ValueType.CIPHER for p in node.params)
        ):
            la, lb = level[node.params[0]], level[node.params[1]]
            if la != lb:
                slot = 0 if la < lb else 1
                gap = abs(la - lb)
                low = node.params[slot]
                ms = _insert_modswitch_chain(ctx, low, [(node.id, slot)], gap)
                for k, mid in enumerate(ms):
                    level[mid] = level[low] + k + 1
                    types[mid] = ValueType.CIPHER
        level[node.id] = node_level(ctx, node)
        types.setdefault(node.id, types.get(node.params[0]) if node.params else None)

    return rewrite(program, Rule("lazy-modswitch", PassDirection.FORWARD, visit))


def eager_modswitch(program: Program) -> Program:
    """Backward pass pushing ModSwitch insertion as close to the roots as
    possible.

    rlevel(n) is the number of Rescale/ModSwitch nodes on any path from n
    down to an output. Wherever a cipher node's consumers disagree on that
    count, shared ModSwitch chains are inserted toward the lower-count
    consumers; finally cipher inputs themselves are brought to a common
    rlevel. Output leaf edges never receive switches, so output chains are
    not lengthened. Afterwards all operand chains at Add/Sub/Multiply nodes
    conform.
    """
    types = analysis.compute_types(program)
    rlevel: dict[int, int] = {}

    def contribution(cid: int) -> int:
        c = program.nodes[cid]
        own = 1 if c.opcode in (OpCode.RESCALE, OpCode.MOD_SWITCH) else 0
        return rlevel[cid] + own

    def equalize(ctx: RewriteContext, node_id: int) -> int:
        """Insert chains so all non-leaf consumers agree; return the common
        contribution value."""
        groups: dict[int, list[tuple[int, int]]] = {}
        for cid, slot in ctx.children[node_id]:
            c = ctx.program.nodes[cid]
            if c.kind is NodeKind.OUTPUT:
                continue
            groups.setdefault(contribution(cid), []).append((cid, slot))
        if not groups:
            return 0
        vmax = max(groups)
        for v, edges in groups.items():
            if v < vmax:
                ms = _insert_modswitch_chain(ctx, node_id, edges, vmax - v)
                for k, mid in enumerate(ms):
                    rlevel[mid] = vmax - k - 1
                    types[mid] = ValueType.CIPHER
        return vmax

    def visit(ctx: RewriteContext, node) -> None:
        if types.get(node.id) is not ValueType.CIPHER:
            rlevel[node.id] = 0
            return
        rlevel[node.id] = equalize(ctx, node.id)

    rewrite(program, Rule("eager-modswitch", PassDirection.BACKWARD, visit))

    # Bring every cipher input to the deepest input rlevel so chains of
    # values that meet far from the roots still agree.
    roots = [n for n in program.inputs if n.type is ValueType.CIPHER]
    if roots:
        vmax = max(rlevel[n.id] for n in roots)
        ctx = RewriteContext(program)
        for n in roots:
            gap = vmax - rlevel[n.id]
            edges = [
                (cid, slot)
                for cid, slot in ctx.children[n.id]
                if program.nodes[cid].kind is not NodeKind.OUTPUT
            ]
            if gap and edges:
                _insert_modswitch_chain(ctx, n.id, edges, gap)
        program.check_structure()
    return program


def eliminate_dead_code(program: Program) -> Program:
    """Drop instructions and constants no output depends on. Input nodes
    always stay: they are part of the program's calling convention. Dead
    nodes cannot affect outputs, but they would force conservative modulus
    switching that lengthens output chains."""
    live: set[int] = set()
    stack = list(program.output_ids)
    while stack:
        i = stack.pop()
        if i not in live:
            live.add(i)
            stack.extend(program.nodes[i].params)
    dead = [
        i
        for i, n in program.nodes.items()
        if i not in live and n.kind is not NodeKind.INPUT
    ]
    for i in dead:
        del program.nodes[i]
    return program


def match_scale(program: Program, sf: float = DEFAULT_SF) -> Program:
    """At every Add/Sub with a cipher operand whose operand scales differ,
    multiply the lower-scale operand by the constant 1 encoded at the scale
    difference, making the scales equal without changing values."""
    tracker = _ScaleTracker(program)

    def visit(ctx: RewriteContext, node) -> None:
        if (
            node.kind is NodeKind.INSTRUCTION
            and node.opcode in (OpCode.ADD, OpCode.SUB)
            and any(tracker.types.get(p) is ValueType.CIPHER for p in node.params)
        ):
            sa, sb = (tracker.scales[p] for p in node.params)
            if sa != sb:
                slot = 0 if sa < sb else 1
                diff = abs(sa - sb)
                if diff > sf:
                    raise CompileError(
                        [
                            f"C2 node={node.id} operand scale gap 2^{diff:g} "
                            f"exceeds the largest encodable constant scale 2^{sf:g}"
                        ]
                    )
                low = node.params[slot]
                one = ctx.add_vector_constant(diff, [1.0])
                tracker.record(one.id, diff, ValueType.VECTOR)
                m = ctx.splice_between(low, [(node.id, slot)], OpCode.MULTIPLY, one.id)
                tracker.record(
                    m.id, tracker.scales[low] + diff, tracker.types[low]
                )
        tracker.visit(ctx.program, node)

    return rewrite(program, Rule("match-scale", PassDirection.FORWARD, visit))


def relinearize(program: Program) -> Program:
    """Splice a Relinearize after every multiply of two cipher values,
    restoring the two-polynomial form before anything consumes it."""
    types = analysis.compute_types(program)

    def visit(ctx: RewriteContext, node) -> None:
        if node.kind is NodeKind.INSTRUCTION:
            types[node.id] = (
                ValueType.CIPHER
                if any(types.get(p) is ValueType.CIPHER for p in node.params)
                else types.get(node.params[0])
            )
        if (
            node.opcode is OpCode.MULTIPLY
            and all(types.get(p) is ValueType.CIPHER for p in node.params)
            and not any(
                ctx.program.nodes[cid].opcode is OpCode.RELINEARIZE
                for cid, _ in ctx.children[node.id]
            )
        ):
            r = ctx.splice_after(node.id, OpCode.RELINEARIZE)
            types[r.id] = ValueType.CIPHER

    return rewrite(program, Rule("relinearize", PassDirection.FORWARD, visit))


def transform(
    program: Program, sf: float = DEFAULT_SF, sw: Optional[float] = None
) -> Program:
    """Run the main pipeline on a copy of the program (vector constants
    replicated to vec_size first)."""
    for n in program.instructions:
        if n.opcode in COMPILER_ONLY or n.opcode is None:
            raise GraphError(
                f"node {n.id}: opcode {n.opcode.value} is not allowed in input programs"
            )
    q = replicate_inputs(program)
    eliminate_dead_code(q)
    waterline_rescale(q, sf, sw)
    eager_modswitch(q)
    match_scale(q, sf)
    relinearize(q)
    return q


def compile(
    program: Program,
    sf: float = DEFAULT_SF,
    output_scales: Optional[dict[int, float]] = None,
    sw: Optional[float] = None,
):
    """Transform, validate and select parameters. Returns a
    CompilationResult; raises CompileError when the transformed program
    fails validation."""
    from . import params, validate

    if output_scales:
        program = program.copy()
        for leaf_id, so in output_scales.items():
            if leaf_id not in program.output_ids:
                raise GraphError(f"no output leaf with id {leaf_id}")
            program.nodes[leaf_id].scale = float(so)
    q = transform(program, sf, sw)
    violations = validate.check_all(q, sf)
    if violations:
        raise CompileError(violations)
    return params.select(q, sf)

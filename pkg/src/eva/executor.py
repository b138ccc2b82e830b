"""Reference execution under the identity "encryption" scheme.

Values are plain float64 vectors; Rescale, ModSwitch and Relinearize only
update metadata, so a compiled program computes exactly the same numbers as
its source. Scheduling is a ready-set worker pool: a node becomes ready
when all operands are available, each node's result is written only by the
worker that ran it, and results are bit-identical for any thread count
because every node sees fully determined inputs.

Scalar values are materialized as replicated full-length vectors, which
makes broadcasting and rotation uniform.
"""

from __future__ import annotations

import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .errors import ExecutionError
from .ir import MODSWITCH, Node, NodeKind, OpCode, Program, ValueType, replicate_vector


@dataclass
class Value:
    """An executed result: vector data plus the ciphertext metadata the
    static analyses would assign it."""

    data: np.ndarray
    scale: float
    npoly: int = 1
    chain: tuple = ()


@dataclass
class TraceEntry:
    node: int
    start: float
    end: float
    worker: int


@dataclass
class RunReport:
    outputs: list[Value]
    wall_time: float
    peak_live_buffers: int
    nodes_executed: int
    peak_concurrency: int
    trace: list[TraceEntry] = field(default_factory=list)


class _BufferPool:
    """Free-list of result vectors with live-buffer accounting. Only
    instruction and output buffers go through the pool; leaf values are
    owned by the caller."""

    def __init__(self, vec_size: int, enabled: bool):
        self.vec_size = vec_size
        self.enabled = enabled
        self.free: list[np.ndarray] = []
        self.live = 0
        self.peak = 0
        self.lock = threading.Lock()

    def acquire(self) -> np.ndarray:
        with self.lock:
            self.live += 1
            self.peak = max(self.peak, self.live)
            if self.free:
                return self.free.pop()
        return np.empty(self.vec_size, dtype=np.float64)

    def release(self, buf: np.ndarray) -> None:
        if not self.enabled:
            return  # without reuse every buffer stays live to the end
        with self.lock:
            self.live -= 1
            self.free.append(buf)


def _prepare_leaves(program: Program, inputs: dict[int, Sequence[float]]):
    values: dict[int, np.ndarray] = {}
    for n in program.nodes.values():
        if n.kind is NodeKind.CONSTANT:
            values[n.id] = np.asarray(
                replicate_vector(n.value, program.vec_size), dtype=np.float64
            )
        elif n.kind is NodeKind.INPUT:
            if n.id not in inputs:
                raise ExecutionError(f"missing value for input {n.id}")
            raw = np.asarray(inputs[n.id], dtype=np.float64).ravel()
            values[n.id] = np.asarray(
                replicate_vector(raw.tolist(), program.vec_size), dtype=np.float64
            )
    extra = set(inputs) - {n.id for n in program.inputs}
    if extra:
        raise ExecutionError(f"values supplied for non-input nodes {sorted(extra)}")
    return values


def _eval_node(
    program: Program,
    node: Node,
    values: dict[int, np.ndarray],
    out: np.ndarray,
) -> None:
    op = node.opcode
    if node.kind is NodeKind.OUTPUT or op in (
        OpCode.COPY,
        OpCode.RELINEARIZE,
        OpCode.MOD_SWITCH,
    ):
        np.copyto(out, values[node.params[0]])
    elif op is OpCode.RESCALE:
        np.copyto(out, values[node.params[0]])
    elif op is OpCode.NEGATE:
        np.negative(values[node.params[0]], out=out)
    elif op is OpCode.ADD:
        np.add(values[node.params[0]], values[node.params[1]], out=out)
    elif op is OpCode.SUB:
        np.subtract(values[node.params[0]], values[node.params[1]], out=out)
    elif op is OpCode.MULTIPLY:
        np.multiply(values[node.params[0]], values[node.params[1]], out=out)
    elif op is OpCode.ROTATE_LEFT:
        step = analysis.rotation_step(program, node) % program.vec_size
        np.copyto(out, np.roll(values[node.params[0]], -step))
    elif op is OpCode.ROTATE_RIGHT:
        step = analysis.rotation_step(program, node) % program.vec_size
        np.copyto(out, np.roll(values[node.params[0]], step))
    else:
        raise ExecutionError(f"node {node.id}: cannot execute opcode {op}")


def execute(
    program: Program,
    inputs: dict[int, Sequence[float]],
    threads: int = 1,
    mode: str = "exact",
    reuse_buffers: bool = True,
    min_node_seconds: float = 0.0,
    collect_trace: bool = False,
) -> RunReport:
    """Evaluate every node once and return the decoded outputs.

    mode "quantized" snaps each result to the fixed-point grid of its
    scale, approximating encoding loss; "exact" leaves float64 results
    untouched. ``min_node_seconds`` pads node execution, which is only
    useful to make parallelism observable in traces.
    """
    if threads < 1:
        raise ExecutionError("threads must be >= 1")
    if mode not in ("exact", "quantized"):
        raise ExecutionError(f"unknown mode {mode!r}")
    program.check_structure()
    types = analysis.compute_types(program)
    scales = analysis.compute_scales(program)
    values = _prepare_leaves(program, inputs)

    # Exclude integer step/divisor operands from data dependencies; their
    # values are read via the graph, not the value table.
    work = [
        n
        for n in program.nodes.values()
        if n.kind in (NodeKind.INSTRUCTION, NodeKind.OUTPUT)
    ]
    deps = {n.id: len(n.params) for n in work}
    consumers: dict[int, list[int]] = {i: [] for i in program.nodes}
    refcount = {i: 0 for i in program.nodes}
    for n in work:
        for p in n.params:
            consumers[p].append(n.id)
            refcount[p] += 1
    for i in values:  # leaves are ready from the start
        for c in consumers[i]:
            deps[c] -= 1

    pool = _BufferPool(program.vec_size, reuse_buffers)
    ready: queue.Queue = queue.Queue()
    for n in work:
        if deps[n.id] == 0:
            ready.put(n.id)
    total = len(work)

    state_lock = threading.Lock()
    executed = 0
    inflight = 0
    peak_inflight = 0
    trace: list[TraceEntry] = []
    failure: list[Exception] = []
    t0 = time.perf_counter()

    def run_one(nid: int, worker: int) -> None:
        nonlocal executed, inflight, peak_inflight
        node = program.nodes[nid]
        with state_lock:
            inflight += 1
            peak_inflight = max(peak_inflight, inflight)
        start = time.perf_counter()
        buf = pool.acquire()
        _eval_node(program, node, values, buf)
        if mode == "quantized":
            grid = 2.0 ** scales[nid]
            np.divide(np.round(buf * grid), grid, out=buf)
        if not np.all(np.isfinite(buf)):
            raise ExecutionError(f"node {nid}: non-finite result")
        if min_node_seconds:
            time.sleep(min_node_seconds)
        end = time.perf_counter()
        values[nid] = buf
        with state_lock:
            inflight -= 1
            executed += 1
            done = executed == total
            if collect_trace:
                trace.append(TraceEntry(nid, start - t0, end - t0, worker))
            newly_ready = []
            for c in consumers[nid]:
                deps[c] -= 1
                if deps[c] == 0:
                    newly_ready.append(c)
            released = []
            for p in node.params:
                refcount[p] -= 1
                pnode = program.nodes[p]
                if refcount[p] == 0 and pnode.kind in (
                    NodeKind.INSTRUCTION,
                    NodeKind.OUTPUT,
                ):
                    released.append(values[p])
        for r in released:
            pool.release(r)
        for c in newly_ready:
            ready.put(c)
        if done:
            for _ in range(threads):
                ready.put(None)

    def worker_loop(worker: int) -> None:
        while True:
            nid = ready.get()
            if nid is None:
                return
            try:
                run_one(nid, worker)
            except Exception as e:  # propagate first failure, stop workers
                failure.append(e)
                for _ in range(threads):
                    ready.put(None)
                return

    if total == 0:
        pass
    elif threads == 1:
        worker_loop(0)
    else:
        ts = [
            threading.Thread(target=worker_loop, args=(k,), daemon=True)
            for k in range(threads)
        ]
        for t in ts:
            t.start()
        for t in ts:
            t.join()
    if failure:
        raise failure[0]
    if executed != total:
        raise ExecutionError("deadlock: not all nodes became ready")

    chains = analysis.compute_chains(program, types).chains
    npoly = analysis.compute_npoly(program, types)
    outputs = [
        Value(
            data=values[leaf.id].copy(),
            scale=scales[leaf.id],
            npoly=npoly[leaf.id],
            chain=chains[leaf.id] if chains[leaf.id] is not None else (),
        )
        for leaf in program.outputs
    ]
    return RunReport(
        outputs=outputs,
        wall_time=time.perf_counter() - t0,
        peak_live_buffers=pool.peak,
        nodes_executed=total,
        peak_concurrency=peak_inflight,
        trace=sorted(trace, key=lambda t: t.start),
    )

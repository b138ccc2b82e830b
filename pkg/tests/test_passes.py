"""Rewrite pipeline behavior: insertion sites, idempotence and the
compile entry point."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import opcode_nodes, power_product, square_plus_double, square_plus_input
from eva import analysis, generate, passes, validate
from eva.errors import CompileError, GraphError
from eva.ir import OpCode, Program, ValueType
from eva.serialize import save_program


def test_default_waterline_is_max_leaf_scale():
    ex = power_product()
    assert passes.default_waterline(ex.program) == 60.0
    # integer step operands never raise the waterline
    p = Program(4)
    x = p.add_input(ValueType.CIPHER, 20.0)
    step = p.add_constant(ValueType.INTEGER, 0.0, [1.0])
    r = p.add_instruction(OpCode.ROTATE_LEFT, [x.id, step.id])
    p.add_output(r.id, 20.0)
    assert passes.default_waterline(p) == 20.0


def test_waterline_rescale_fires_only_at_or_above_the_line():
    ex = power_product()
    passes.waterline_rescale(ex.program)
    rescales = opcode_nodes(ex.program, OpCode.RESCALE)
    assert [n.params[0] for n in rescales] == [ex.xx.id, ex.top.id]
    for n in rescales:
        assert analysis.rescale_divisor(ex.program, n) == 60.0
    scales = analysis.compute_scales(ex.program)
    assert scales[ex.out.id] == 90.0


def test_waterline_rescale_respects_explicit_waterline():
    ex = power_product()
    passes.waterline_rescale(ex.program, sw=200.0)
    assert opcode_nodes(ex.program, OpCode.RESCALE) == []


def test_always_rescale_covers_every_cipher_multiply():
    ex = power_product()
    passes.always_rescale(ex.program)
    rescales = opcode_nodes(ex.program, OpCode.RESCALE)
    assert {n.params[0] for n in rescales} == {ex.xx.id, ex.yy.id, ex.yyy.id, ex.top.id}
    assert analysis.rescale_divisor(
        ex.program, next(n for n in rescales if n.params[0] == ex.yy.id)
    ) == 30.0


def test_match_scale_inserts_constant_one_multiplier():
    ex = square_plus_input()
    passes.match_scale(ex.program)
    mults = [n for n in opcode_nodes(ex.program, OpCode.MULTIPLY) if n.id != ex.xx.id]
    assert len(mults) == 1
    m = mults[0]
    assert m.params[0] == ex.x.id
    one = ex.program.nodes[m.params[1]]
    assert one.value == [1.0] and one.scale == 30.0
    scales = analysis.compute_scales(ex.program)
    assert scales[ex.total.id] == 60.0


def test_match_scale_errors_when_gap_exceeds_cap():
    p = Program(4)
    a = p.add_input(ValueType.CIPHER, 100.0)
    b = p.add_input(ValueType.CIPHER, 30.0)
    s = p.add_instruction(OpCode.ADD, [a.id, b.id])
    p.add_output(s.id, 30.0)
    with pytest.raises(CompileError, match="C2"):
        passes.match_scale(p)


def test_relinearize_targets_cipher_cipher_multiplies_only():
    p = Program(4)
    x = p.add_input(ValueType.CIPHER, 30.0)
    c = p.add_constant(ValueType.VECTOR, 30.0, [2.0])
    cc = p.add_instruction(OpCode.MULTIPLY, [x.id, x.id])
    cp = p.add_instruction(OpCode.MULTIPLY, [cc.id, c.id])
    p.add_output(cp.id, 30.0)
    passes.relinearize(p)
    relins = opcode_nodes(p, OpCode.RELINEARIZE)
    assert [n.params[0] for n in relins] == [cc.id]
    npoly = analysis.compute_npoly(p)
    assert npoly[p.output_ids[0]] == 2


def test_eager_and_lazy_modswitch_placements_differ():
    eager = square_plus_double()
    passes.waterline_rescale(eager.program)
    passes.eager_modswitch(eager.program)
    ms = opcode_nodes(eager.program, OpCode.MOD_SWITCH)
    assert len(ms) == 1 and ms[0].params[0] == eager.x.id
    assert eager.program.nodes[eager.dbl.id].params == [ms[0].id, ms[0].id]

    lazy = square_plus_double()
    passes.waterline_rescale(lazy.program)
    passes.lazy_modswitch(lazy.program)
    ms = opcode_nodes(lazy.program, OpCode.MOD_SWITCH)
    assert len(ms) == 1 and ms[0].params[0] == lazy.dbl.id


def test_eager_modswitch_levels_cipher_inputs():
    ex = power_product()
    passes.waterline_rescale(ex.program)
    passes.eager_modswitch(ex.program)
    ms = opcode_nodes(ex.program, OpCode.MOD_SWITCH)
    assert len(ms) == 1 and ms[0].params[0] == ex.y.id
    assert validate.check_chains(ex.program) == []


def test_dead_code_elimination_keeps_inputs_and_live_nodes():
    p = Program(4)
    x = p.add_input(ValueType.CIPHER, 30.0)
    unused = p.add_input(ValueType.CIPHER, 30.0)
    live = p.add_instruction(OpCode.NEGATE, [x.id])
    dead = p.add_instruction(OpCode.MULTIPLY, [x.id, x.id])
    dead_const = p.add_constant(ValueType.VECTOR, 30.0, [2.0])
    p.add_output(live.id, 30.0)
    passes.eliminate_dead_code(p)
    assert set(p.nodes) == {x.id, unused.id, live.id, p.output_ids[0]}
    assert dead.id not in p.nodes and dead_const.id not in p.nodes


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_compiled_programs_contain_no_dead_nodes(seed):
    q = passes.transform(generate.generate_program(seed))
    live = set()
    stack = list(q.output_ids)
    while stack:
        i = stack.pop()
        if i not in live:
            live.add(i)
            stack.extend(q.nodes[i].params)
    from eva.ir import NodeKind

    for n in q.nodes.values():
        assert n.id in live or n.kind is NodeKind.INPUT


def test_transform_rejects_compiler_opcodes_in_inputs():
    p = Program(4)
    x = p.add_input(ValueType.CIPHER, 30.0)
    r = p.add_instruction(OpCode.RELINEARIZE, [x.id])
    p.add_output(r.id, 30.0)
    with pytest.raises(GraphError):
        passes.transform(p)


def test_transform_leaves_the_source_program_untouched():
    ex = power_product()
    before = save_program(ex.program)
    passes.transform(ex.program)
    assert save_program(ex.program) == before


def test_compile_applies_output_scale_overrides():
    ex = power_product()
    leaf = ex.out.id
    r30 = passes.compile(ex.program, output_scales={leaf: 30.0})
    r60 = passes.compile(ex.program, output_scales={leaf: 60.0})
    # output scale 2^90 plus decode scale: 120 -> two factors, 150 -> three
    assert r30.r == 5 and r60.r == 6
    with pytest.raises(GraphError):
        passes.compile(ex.program, output_scales={999: 30.0})


_PIPELINE_PASSES = [
    passes.waterline_rescale,
    passes.eager_modswitch,
    passes.match_scale,
    passes.relinearize,
]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_every_pass_is_idempotent(seed):
    p = generate.generate_program(seed)
    for step in _PIPELINE_PASSES:
        step(p)
        once = save_program(p)
        step(p)
        assert save_program(p) == once


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_full_pipeline_is_idempotent_as_a_whole(seed):
    p = generate.generate_program(seed)
    q = passes.transform(p)
    once = save_program(q)
    for step in _PIPELINE_PASSES:
        step(q)
    assert save_program(q) == once


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_compile_always_validates_clean(seed):
    p = generate.generate_program(seed)
    result = passes.compile(p)
    assert validate.check_all(result.program) == []
    assert result.r == len(result.bit_sizes)


def test_lazy_pipeline_also_validates_clean():
    for build in (power_product, square_plus_input, square_plus_double):
        ex = build()
        from eva.ir import replicate_inputs

        q = replicate_inputs(ex.program)
        passes.waterline_rescale(q)
        passes.lazy_modswitch(q)
        passes.match_scale(q)
        passes.relinearize(q)
        assert validate.check_all(q) == []

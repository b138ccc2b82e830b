"""Toolchain for encrypted-vector-arithmetic programs: graph IR with
serialization, the rescale/modswitch/relinearize rewrite pipeline, CKKS
constraint validation, encryption-parameter selection and a parallel
reference executor."""

from .errors import (
    CompileError,
    EvaError,
    ExecutionError,
    GraphError,
    ParseError,
)
from .ir import (
    MODSWITCH,
    Node,
    NodeKind,
    OpCode,
    Program,
    ValueType,
    chains_equal,
    multiplicative_depth,
    replicate_inputs,
)
from .serialize import load_program, save_program
from .passes import (
    always_rescale,
    compile,
    eager_modswitch,
    eliminate_dead_code,
    lazy_modswitch,
    match_scale,
    relinearize,
    transform,
    waterline_rescale,
)
from .params import (
    CompilationResult,
    chain_length_formula,
    select_parameters,
    select_rotation_steps,
)
from .validate import Violation, check_all, check_chains, check_npoly, check_scales
from .executor import RunReport, Value, execute

__version__ = "0.1.0"

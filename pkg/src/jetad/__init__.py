"""Higher-order automatic differentiation of scalar expressions.

Forward sweeps push velocity coordinates, reverse sweeps pull covelocity
coordinates back through explicit component functions, and mixed sweeps
combine one of each for Hessian-vector products and their third-order
relatives.
"""

from .errors import (
    ArityError,
    CycleError,
    DimensionError,
    DomainError,
    JetError,
    ParseError,
    UnknownFunctionError,
)
from .forward import VelocityCoords, dir1, dir2, dir3, project, push_stage, push_velocity, taylor_push
from .mixed import grad_dir2, grad_trace_mh, hessian_by_hvp, hvp
from .parser import ExprGraph, ExprNode, evaluate, parse
from .reverse import (
    CovelocityState,
    dual_pairing,
    gradient,
    hessian_general,
    pull_stage,
    reverse_general,
    third_order_general,
)
from .tape import (
    ComponentFunction,
    SweepCounter,
    Tape,
    TapeNode,
    build_component_functions,
    build_tape,
    compile_expr,
    compose,
    dump,
    eval_primal,
    partials,
)

__all__ = [
    "ArityError", "ComponentFunction", "CovelocityState", "CycleError", "DimensionError",
    "DomainError", "ExprGraph", "ExprNode", "JetError", "ParseError", "SweepCounter", "Tape",
    "TapeNode", "UnknownFunctionError", "VelocityCoords", "build_component_functions",
    "build_tape", "compile_expr", "compose", "dir1", "dir2", "dir3", "dual_pairing", "dump",
    "eval_primal", "evaluate", "grad_dir2", "grad_trace_mh", "gradient", "hessian_by_hvp",
    "hessian_general", "hvp", "parse", "partials", "project", "pull_stage", "push_stage",
    "push_velocity", "reverse_general", "taylor_push", "third_order_general",
]

"""Expression language for f(t, x, u), u(t) and a(t) with exact Jacobians."""

from .parser import FUNCTIONS, to_text
from .problem import (
    Expression,
    JacobianBatch,
    JacobianSample,
    ProblemSpec,
    eval_with_jacobian,
    evaluate_batch,
    parse,
    sample_growth,
    sample_parameter,
    sample_values,
)

__all__ = [
    "FUNCTIONS",
    "Expression",
    "JacobianBatch",
    "JacobianSample",
    "ProblemSpec",
    "eval_with_jacobian",
    "evaluate_batch",
    "parse",
    "sample_growth",
    "sample_parameter",
    "sample_values",
    "to_text",
]

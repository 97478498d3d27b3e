"""Fractional Dirichlet-Laplacian on (0, pi) in the sine eigenbasis.

Solves (-Delta)^beta x = f(t, x, u(t)) by Galerkin discretization and damped
Newton, computes the sensitivity of the solution to the parameter u, and
checks the hypotheses that make the solution unique.
"""

from .conditions import ConditionReport, check_conditions, l1_threshold, shift_compactness_test
from .dsl import ProblemSpec, eval_with_jacobian, parse, sample_parameter
from .errors import (
    ConvergenceError,
    DomainError,
    EvaluationDomainError,
    ExpressionError,
    FracLapError,
    FracLapWarning,
    ParseError,
    ProblemFileError,
    SingularSystemError,
)
from .quadrature import (
    GridFunction,
    QuadratureRule,
    evaluate,
    gauss_legendre_composite,
    integrate_inner,
    project_to_sine,
)
from .solver import (
    LinearizedSystem,
    NewtonConfig,
    SolveReport,
    assemble,
    newton_solve,
    residual,
    sensitivity,
    solve_linear,
)
from .spectral import (
    FractionalOrder,
    SineCoefficients,
    ZetaValue,
    apply_fractional,
    apply_inverse_fractional,
    half_power_identity_check,
    lipschitz_constant,
    norm_l2,
    norm_tilde,
    sup_bound,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "ConditionReport",
    "ConvergenceError",
    "DomainError",
    "EvaluationDomainError",
    "ExpressionError",
    "FracLapError",
    "FracLapWarning",
    "FractionalOrder",
    "GridFunction",
    "LinearizedSystem",
    "NewtonConfig",
    "ParseError",
    "ProblemFileError",
    "ProblemSpec",
    "QuadratureRule",
    "SineCoefficients",
    "SingularSystemError",
    "SolveReport",
    "ZetaValue",
    "apply_fractional",
    "apply_inverse_fractional",
    "assemble",
    "check_conditions",
    "eval_with_jacobian",
    "evaluate",
    "gauss_legendre_composite",
    "half_power_identity_check",
    "integrate_inner",
    "l1_threshold",
    "lipschitz_constant",
    "newton_solve",
    "norm_l2",
    "norm_tilde",
    "parse",
    "project_to_sine",
    "residual",
    "sample_parameter",
    "sensitivity",
    "shift_compactness_test",
    "solve_linear",
    "sup_bound",
    "zeta",
]

"""Galerkin discretization, damped Newton and sensitivity solves.

Unknowns are the sine coefficients a (J x m). The discrete problem is the
Galerkin system

    D_beta a - P_J f(., S a, u) = 0,

with D_beta = diag((j^2)^beta), S the synthesis at quadrature nodes and P_J
the quadrature projection. Its Jacobian is D_beta - M_Lambda where
M_Lambda is the Galerkin matrix of multiplication by Lambda = f_x.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg

from . import _kernels
from .conditions import ConditionReport, check_conditions
from .dsl import ProblemSpec, evaluate_batch, sample_parameter, sample_values
from .errors import EvaluationDomainError, FracLapWarning, SingularSystemError
from .quadrature import (
    GridFunction,
    QuadratureRule,
    check_resolution,
    gauss_legendre_composite,
    project_values,
    sine_basis,
)
from .spectral import (
    SineCoefficients,
    apply_inverse_fractional,
    as_beta,
    eigenvalues,
    norm_tilde,
)

DEFAULT_MODES = 256

# reciprocal condition number below which the system counts as singular
SINGULAR_RCOND = 1e-14
LINEAR_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearizedSystem:
    """Dense Galerkin matrix ``A = D_beta - M_Lambda`` and optional right-hand side.

    Row/column ``(j-1)*m + (i-1)`` belongs to mode j, component i.
    """

    A: np.ndarray
    m: int
    J: int
    rhs: np.ndarray | None = None

    def with_rhs(self, rhs) -> LinearizedSystem:
        if isinstance(rhs, SineCoefficients):
            rhs = rhs.flat
        rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
        if rhs.shape[0] != self.A.shape[0]:
            raise ValueError(f"rhs has {rhs.shape[0]} entries, system has {self.A.shape[0]} unknowns")
        return LinearizedSystem(self.A, self.m, self.J, rhs)


def _lambda_values(lam) -> np.ndarray:
    vals = lam.values if isinstance(lam, GridFunction) else np.asarray(lam, dtype=np.float64)
    if vals.ndim == 2:  # scalar problem given as (n, 1)
        vals = vals[:, :, None]
    if vals.ndim != 3 or vals.shape[1] != vals.shape[2]:
        raise ValueError(f"Lambda must have shape (nodes, m, m), got {vals.shape}")
    return vals


def multiplication_matrix(lam, rule: QuadratureRule, J: int) -> np.ndarray:
    """Galerkin matrix of h -> Lambda(t) h in the sine basis."""
    vals = _lambda_values(lam)
    if vals.shape[0] != rule.size:
        raise ValueError(f"Lambda has {vals.shape[0]} samples, rule has {rule.size} nodes")
    moments = _kernels.cosine_moments(rule.nodes, rule.weights, vals, 2 * J)
    return _kernels.galerkin_fill(moments, J)


def assemble(lam, beta, J: int, rule: QuadratureRule | None = None) -> LinearizedSystem:
    """Matrix of (-Delta)^beta h - Lambda h = g in the sine basis."""
    rule = rule or gauss_legendre_composite()
    vals = _lambda_values(lam)
    m = vals.shape[1]
    diag = np.repeat(eigenvalues(J, beta), m)
    if np.any(vals):
        A = -multiplication_matrix(vals, rule, J)
    else:
        A = np.zeros((J * m, J * m))
    A[np.diag_indices_from(A)] += diag
    return LinearizedSystem(A, m, J)


class Factorization:
    """LU factors of a LinearizedSystem with a condition estimate."""

    def __init__(self, system: LinearizedSystem):
        self.system = system
        A = system.A
        if not np.all(np.isfinite(A)):
            raise SingularSystemError("linearized matrix has non-finite entries")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            self.lu, self.piv = scipy.linalg.lu_factor(A, check_finite=False)
        anorm = float(np.max(np.sum(np.abs(A), axis=0)))
        if anorm == 0.0:
            self.rcond = 0.0
        else:
            (gecon,) = scipy.linalg.get_lapack_funcs(("gecon",), (self.lu,))
            self.rcond = float(gecon(self.lu, anorm, norm="1")[0])
        if not self.rcond > SINGULAR_RCOND:
            raise SingularSystemError(
                f"(-Delta)^beta - Lambda is singular to working precision (rcond={self.rcond:.3e}); "
                "the bijectivity hypotheses fail here: none of ||Lambda||_L1 < pi/(2 zeta(2 beta)), "
                "Lambda(t) <= 0, ||Lambda||_inf < 1 can hold"
            )

    @property
    def condition_number(self) -> float:
        return 1.0 / self.rcond

    def solve(self, rhs) -> SineCoefficients:
        if isinstance(rhs, SineCoefficients):
            rhs = rhs.flat
        rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
        h = scipy.linalg.lu_solve((self.lu, self.piv), rhs, check_finite=False)
        scale = float(np.max(np.abs(rhs)))
        resid = float(np.max(np.abs(self.system.A @ h - rhs))) if h.size else 0.0
        if resid > LINEAR_RESIDUAL_TOL * scale:
            warnings.warn(
                f"linear solve residual {resid:.3e} exceeds {LINEAR_RESIDUAL_TOL:g} * ||rhs||_inf "
                f"(condition number ~{self.condition_number:.2e})",
                FracLapWarning,
                stacklevel=2,
            )
        return SineCoefficients.from_flat(h, self.system.m)


def solve_linear(system: LinearizedSystem) -> SineCoefficients:
    """Solve ``A h = rhs`` by LU with partial pivoting."""
    if system.rhs is None:
        raise ValueError("system has no right-hand side; use with_rhs()")
    return Factorization(system).solve(system.rhs)


# ---------------------------------------------------------------------------
# nonlinear problem

class Residual(NamedTuple):
    """Residual of the discrete problem at one iterate.

    ``l2_norm`` is the L2 norm of the Galerkin residual, i.e. of the sine
    projection of ``grid``; ``pointwise_l2`` is the quadrature L2 norm of the
    full residual, which also contains the part of f beyond J modes.
    """

    grid: GridFunction
    l2_norm: float
    coefficients: np.ndarray
    pointwise_l2: float


def _parameter_values(spec, rule, u_grid):
    if u_grid is None:
        return sample_parameter(spec, rule).values
    vals = u_grid.values if isinstance(u_grid, GridFunction) else np.asarray(u_grid, dtype=np.float64)
    return vals.reshape(rule.size, spec.r)


def _residual(spec, a, rule, uvals, eig):
    S = sine_basis(rule, a.shape[0])
    xv = S.T @ a
    fv = evaluate_batch(spec, rule.nodes, xv, uvals, derivatives=False).value
    da = eig[:, None] * a
    coeffs = da - project_values(fv, rule, a.shape[0])
    rgrid = S.T @ da - fv
    return coeffs, rgrid


def residual(spec: ProblemSpec, x: SineCoefficients, rule: QuadratureRule | None = None, u_grid=None) -> Residual:
    """(-Delta)^beta x - f(t, x, u) at the nodes, with its norms."""
    rule = rule or gauss_legendre_composite()
    eig = eigenvalues(x.J, spec.beta)
    coeffs, rgrid = _residual(spec, x.a, rule, _parameter_values(spec, rule, u_grid), eig)
    pointwise = math.sqrt(float(rule.weights @ np.sum(rgrid * rgrid, axis=1)))
    return Residual(GridFunction(rgrid, rule), float(np.linalg.norm(coeffs)), coeffs, pointwise)


@dataclass(frozen=True)
class NewtonConfig:
    max_iters: int = 50
    residual_tol: float = 1e-10
    step_tol: float = 1e-12
    damping: float = 0.5
    max_backtracks: int = 30

    def __post_init__(self):
        if self.max_iters < 1 or self.max_backtracks < 0:
            raise ValueError("max_iters must be >= 1 and max_backtracks >= 0")
        if not (self.residual_tol > 0 and self.step_tol > 0):
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.damping < 1.0:
            raise ValueError(f"damping must lie in (0, 1), got {self.damping}")


@dataclass
class SolveReport:
    iterations: int = 0
    residual_history: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    final_step_norm: float = math.nan
    converged: bool = False
    condition_verdicts: ConditionReport | None = None
    condition_number: float = math.nan
    pointwise_residual: float = math.nan
    warnings: list = field(default_factory=list)
    runtime_s: float = 0.0
    modes: int = 0
    nodes: int = 0
    beta: float = math.nan

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["condition_verdicts"] = None if self.condition_verdicts is None else self.condition_verdicts.to_dict()
        d["final_residual"] = self.final_residual
        return d


def collect_warnings(records, into: list):
    """Append warning messages (or plain strings) to ``into`` once each, in order."""
    for w in records:
        msg = str(getattr(w, "message", w))
        if msg not in into:
            into.append(msg)


def initial_guess(spec, rule, J, uvals) -> SineCoefficients:
    """(-Delta)^(-beta) of the projection of f(t, 0, u(t))."""
    f0 = evaluate_batch(spec, rule.nodes, np.zeros((rule.size, spec.m)), uvals, derivatives=False).value
    return apply_inverse_fractional(SineCoefficients(project_values(f0, rule, J)), spec.beta)


def newton_solve(
    spec: ProblemSpec,
    config: NewtonConfig | None = None,
    J: int = DEFAULT_MODES,
    rule: QuadratureRule | None = None,
    x0: SineCoefficients | None = None,
    u_grid=None,
    check: bool = False,
):
    """Damped Newton iteration for the Galerkin problem.

    Each step solves (D_beta - M_Lambda(x_k)) h = -R(x_k) and takes the
    largest step ``damping**p`` that decreases the residual. Returns
    ``(x, report)``; a failed solve comes back with ``report.converged``
    False rather than raising.
    """
    config = config or NewtonConfig()
    rule = rule or gauss_legendre_composite()
    report = SolveReport(modes=J, nodes=rule.size, beta=spec.beta.beta)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if not spec.beta.solvability_guaranteed:
            warnings.warn(
                f"beta={spec.beta.beta} <= 1/2: unique solvability is not guaranteed; "
                "results carry no theoretical backing",
                FracLapWarning,
            )
        check_resolution(rule, J)
        uvals = _parameter_values(spec, rule, u_grid)
        eig = eigenvalues(J, spec.beta)
        x = initial_guess(spec, rule, J, uvals) if x0 is None else x0.resized(J)
        if x.m != spec.m:
            raise ValueError(f"initial guess has {x.m} components, problem has m={spec.m}")
        a = np.array(x.a)
        coeffs, _ = _residual(spec, a, rule, uvals, eig)
        norm = float(np.linalg.norm(coeffs))
        report.residual_history.append(norm)

        for _ in range(config.max_iters):
            lam = evaluate_batch(spec, rule.nodes, sine_basis(rule, J).T @ a, uvals).fx
            fac = Factorization(assemble(lam, spec.beta, J, rule))
            report.condition_number = fac.condition_number
            h = fac.solve(-coeffs.reshape(-1)).a
            step = 1.0
            accepted = False
            for _ in range(config.max_backtracks + 1):
                trial = a + step * h
                try:
                    trial_coeffs, _ = _residual(spec, trial, rule, uvals, eig)
                except EvaluationDomainError:
                    step *= config.damping
                    continue
                trial_norm = float(np.linalg.norm(trial_coeffs))
                if trial_norm <= (1.0 - 1e-4 * step) * norm or trial_norm <= config.residual_tol:
                    accepted = True
                    break
                step *= config.damping
            if not accepted:
                warnings.warn(
                    f"line search failed after {config.max_backtracks} backtracks "
                    f"at residual {norm:.3e}",
                    FracLapWarning,
                )
                break
            a = trial
            coeffs, norm = trial_coeffs, trial_norm
            report.iterations += 1
            report.step_sizes.append(step)
            report.residual_history.append(norm)
            report.final_step_norm = norm_tilde(SineCoefficients(h), spec.beta)
            if norm <= config.residual_tol or report.final_step_norm <= config.step_tol:
                report.converged = True
                break
        if not report.converged:
            warnings.warn(
                f"Newton did not converge in {report.iterations} iterations "
                f"(residual {norm:.3e} > {config.residual_tol:g})",
                FracLapWarning,
            )
        x = SineCoefficients(a)
        report.pointwise_residual = residual(spec, x, rule, uvals).pointwise_l2
        if check:
            report.condition_verdicts = check_conditions(spec, x, rule, uvals)
    collect_warnings(caught, report.warnings)
    seen = set()
    for w in caught:
        if str(w.message) not in seen:
            seen.add(str(w.message))
            warnings.warn(w.message, w.category, stacklevel=2)
    report.runtime_s = time.perf_counter() - start
    return x, report


def sensitivity(
    spec: ProblemSpec,
    x_u: SineCoefficients,
    v,
    J: int | None = None,
    rule: QuadratureRule | None = None,
    u_grid=None,
) -> SineCoefficients:
    """lambda'(u) v: solve (-Delta)^beta y - f_x y = f_u v at the solution x_u.

    ``v`` is a GridFunction with r components on ``rule`` (or raw samples of
    shape (nodes, r)).
    """
    rule = rule or gauss_legendre_composite()
    J = x_u.J if J is None else J
    x_u = x_u.resized(J)
    uvals = _parameter_values(spec, rule, u_grid)
    vv = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=np.float64)
    vv = vv.reshape(rule.size, spec.r)
    batch = evaluate_batch(spec, rule.nodes, sine_basis(rule, J).T @ x_u.a, uvals)
    forcing = np.einsum("nik,nk->ni", batch.fu, vv)
    rhs = project_values(forcing, rule, J)
    return Factorization(assemble(batch.fx, spec.beta, J, rule)).solve(rhs.reshape(-1))


def sample_direction(exprs, rule: QuadratureRule) -> GridFunction:
    """Parameter direction v(t) from t-only expressions."""
    return GridFunction(sample_values(exprs, rule.nodes), rule)


__all__ = [
    "DEFAULT_MODES",
    "collect_warnings",
    "Factorization",
    "LinearizedSystem",
    "NewtonConfig",
    "Residual",
    "SolveReport",
    "assemble",
    "multiplication_matrix",
    "newton_solve",
    "residual",
    "sample_direction",
    "sensitivity",
    "solve_linear",
]

"""Problem definitions: right-hand side f(t, x, u), parameter u(t), growth a(t)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..errors import EvaluationDomainError
from ..quadrature import GridFunction, QuadratureRule
from ..spectral import FractionalOrder
from .dual import Dual, Evaluator
from .parser import Call, Node, Var, parse_node, to_text, walk


@dataclass(frozen=True)
class Expression:
    source: str
    root: Node
    m: int
    r: int

    @property
    def uses_x(self) -> bool:
        return any(isinstance(n, Var) and n.kind == "x" for n in walk(self.root))

    @property
    def uses_u(self) -> bool:
        return any(isinstance(n, Var) and n.kind == "u" for n in walk(self.root))

    @property
    def has_kink(self) -> bool:
        """True when ``abs`` appears, i.e. derivatives jump somewhere."""
        return any(isinstance(n, Call) and n.func == "abs" for n in walk(self.root))

    def to_text(self) -> str:
        return to_text(self.root)

    def __str__(self):
        return self.source


def parse(text: str, m: int, r: int, context: str = "this expression") -> Expression:
    """Parse ``text`` with variables t, x1..xm, u1..ur."""
    return Expression(text, parse_node(text, m, r, context), m, r)


class JacobianSample(NamedTuple):
    value: np.ndarray  # (m,)
    fx: np.ndarray  # (m, m)
    fu: np.ndarray  # (m, r)


class JacobianBatch(NamedTuple):
    value: np.ndarray  # (n, m)
    fx: np.ndarray  # (n, m, m)
    fu: np.ndarray  # (n, m, r)


@dataclass(frozen=True)
class ProblemSpec:
    """One instance of (-Delta)^beta x = f(t, x, u(t)) on (0, pi)."""

    beta: FractionalOrder
    m: int
    r: int
    f: tuple
    u: tuple
    growth_a: Expression | None = None

    def __post_init__(self):
        if not isinstance(self.beta, FractionalOrder):
            object.__setattr__(self, "beta", FractionalOrder(self.beta))
        if self.m < 1 or self.r < 1:
            raise ValueError(f"need m >= 1 and r >= 1, got m={self.m}, r={self.r}")
        if len(self.f) != self.m:
            raise ValueError(f"{len(self.f)} f expressions for m={self.m}")
        if len(self.u) != self.r:
            raise ValueError(f"{len(self.u)} u expressions for r={self.r}")
        for e in self.u:
            if e.uses_x or e.uses_u:
                raise ValueError(f"parameter expression {e.source!r} may depend on t only")
        if self.growth_a is not None and (self.growth_a.uses_x or self.growth_a.uses_u):
            raise ValueError("growth bound a(t) may depend on t only")

    @classmethod
    def from_strings(
        cls,
        beta,
        f: Sequence[str],
        u: Sequence[str],
        growth: str | None = None,
    ) -> ProblemSpec:
        m, r = len(f), len(u)
        fe = tuple(parse(s, m, r, "f") for s in f)
        ue = tuple(parse(s, 0, 0, "a parameter expression u(t)") for s in u)
        ge = None if growth is None else parse(growth, 0, 0, "the growth bound a(t)")
        return cls(FractionalOrder(beta), m, r, fe, ue, ge)

    @property
    def x_independent(self) -> bool:
        return not any(e.uses_x for e in self.f)

    def with_parameters(self, u: Sequence[str]) -> ProblemSpec:
        ue = tuple(parse(s, 0, 0, "a parameter expression u(t)") for s in u)
        return ProblemSpec(self.beta, self.m, self.r, self.f, ue, self.growth_a)


def _run(expr: Expression, variables: dict, n: int, ndir: int):
    out = Evaluator(variables, expr.source)(expr.root)
    val = np.broadcast_to(out.val, (n,)).astype(np.float64)
    if out.tan is None:
        tan = np.zeros((ndir, n))
    else:
        tan = np.broadcast_to(out.tan, (ndir, n))
    return val, tan


def _field(expr: Expression, t: np.ndarray) -> np.ndarray:
    val, _ = _run(expr, {("t", 0): Dual(t)}, t.shape[0], 0)
    return val


def evaluate_batch(spec: ProblemSpec, t, x, u, derivatives: bool = True) -> JacobianBatch:
    """f, f_x and f_u at n points.

    ``t`` has shape (n,), ``x`` (n, m) and ``u`` (n, r). All m + r tangent
    directions are carried through a single vectorized forward pass.
    """
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    n = t.shape[0]
    x = np.asarray(x, dtype=np.float64).reshape(n, spec.m)
    u = np.asarray(u, dtype=np.float64).reshape(n, spec.r)
    ndir = spec.m + spec.r if derivatives else 0
    variables = {("t", 0): Dual(t)}
    for i in range(spec.m):
        tan = None
        if derivatives:
            tan = np.zeros((ndir, n))
            tan[i] = 1.0
        variables[("x", i + 1)] = Dual(x[:, i], tan)
    for k in range(spec.r):
        tan = None
        if derivatives:
            tan = np.zeros((ndir, n))
            tan[spec.m + k] = 1.0
        variables[("u", k + 1)] = Dual(u[:, k], tan)

    value = np.empty((n, spec.m))
    grad = np.zeros((n, spec.m, ndir))
    for i, expr in enumerate(spec.f):
        val, tan = _run(expr, variables, n, ndir)
        value[:, i] = val
        grad[:, i, :] = tan.T
    return JacobianBatch(value, grad[:, :, : spec.m], grad[:, :, spec.m :])


def eval_with_jacobian(spec: ProblemSpec, t: float, x, uvals) -> JacobianSample:
    """f(t, x, u) with exact Jacobians at a single point."""
    batch = evaluate_batch(spec, np.array([t]), np.asarray(x)[None, :], np.asarray(uvals)[None, :])
    return JacobianSample(batch.value[0], batch.fx[0], batch.fu[0])


def sample_values(exprs: Sequence[Expression], t) -> np.ndarray:
    """Evaluate t-only expressions; shape (len(t), len(exprs))."""
    t = np.asarray(t, dtype=np.float64).reshape(-1)
    out = np.empty((t.shape[0], len(exprs)))
    for k, e in enumerate(exprs):
        out[:, k] = _field(e, t)
    return out


def sample_parameter(spec: ProblemSpec, rule: QuadratureRule) -> GridFunction:
    """u(t) at the quadrature nodes, r components."""
    return GridFunction(sample_values(spec.u, rule.nodes), rule)


def sample_growth(spec: ProblemSpec, rule: QuadratureRule) -> GridFunction | None:
    if spec.growth_a is None:
        return None
    a = sample_values([spec.growth_a], rule.nodes)
    if np.any(a < 0.0):
        i = int(np.argmax(a < 0.0))
        raise EvaluationDomainError(
            f"growth bound a(t) is negative at t={rule.nodes[i]:.6g}", None, spec.growth_a.source
        )
    return GridFunction(a, rule)


__all__ = [
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
]

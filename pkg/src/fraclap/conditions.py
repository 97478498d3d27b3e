"""A-posteriori checks of the bijectivity and coercivity hypotheses.

The hypotheses quantify over every pair (x, u). What can be checked is the
linearization Lambda(t) = f_x(t, x(t), u(t)) along one computed x, sampled at
the quadrature nodes; the report says exactly that.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .dsl import ProblemSpec, evaluate_batch, sample_growth, sample_parameter
from .errors import DomainError
from .quadrature import (
    GridFunction,
    QuadratureRule,
    evaluate,
    gauss_legendre_composite,
    gauss_legendre_interval,
    synthesize,
)
from .spectral import SineCoefficients, apply_inverse_fractional, as_beta, zeta


def l1_threshold(order) -> float:
    """pi / (2 zeta(2 beta)); the L1 bound on Lambda that keeps the operator bijective."""
    beta = as_beta(order)
    if beta <= 0.5:
        raise DomainError(f"the L1 threshold needs beta > 1/2 (zeta(2*beta) diverges), got beta={beta}")
    return math.pi / (2.0 * zeta(2.0 * beta).value)


def pointwise_threshold(order) -> float:
    """1 / (2 sqrt(2) zeta(2 beta)); a sup-norm bound on Lambda sufficient for the L1 one."""
    beta = as_beta(order)
    if beta <= 0.5:
        raise DomainError(f"the pointwise threshold needs beta > 1/2, got beta={beta}")
    return 1.0 / (2.0 * math.sqrt(2.0) * zeta(2.0 * beta).value)


def embedding_constant(order) -> float:
    """sqrt(2/pi * zeta(4 beta))."""
    return math.sqrt(2.0 / math.pi * zeta(4.0 * as_beta(order)).value)


@dataclass(frozen=True)
class L1Check:
    lhs: float
    threshold: float
    holds: bool


@dataclass(frozen=True)
class NonpositiveCheck:
    max_symmetric_eigenvalue_over_nodes: float
    holds: bool


@dataclass(frozen=True)
class SupCheck:
    sup_frobenius: float
    threshold: float
    holds: bool


@dataclass(frozen=True)
class CoercivityCheck:
    lhs: float
    growth_l2: float
    holds: bool


@dataclass(frozen=True)
class ConditionReport:
    cond_a: L1Check
    cond_b: NonpositiveCheck
    cond_c: SupCheck
    coercivity: CoercivityCheck | None
    beta: float
    sampled_nodes: int
    sampled: str = "f_x along the supplied x at the quadrature nodes"

    @property
    def any_holds(self) -> bool:
        return self.cond_a.holds or self.cond_b.holds or self.cond_c.holds

    def to_dict(self) -> dict:
        d = asdict(self)
        d["any_holds"] = self.any_holds
        return d


def linearization_on_nodes(spec, x, rule, u_grid=None):
    """Lambda(t) = f_x(t, x(t), u(t)) and f_u at the nodes."""
    u = sample_parameter(spec, rule).values if u_grid is None else _grid_values(u_grid)
    xv = evaluate(x, rule).values
    return evaluate_batch(spec, rule.nodes, xv, u)


def _grid_values(g):
    return g.values if isinstance(g, GridFunction) else np.asarray(g, dtype=np.float64)


def check_conditions(
    spec: ProblemSpec,
    x: SineCoefficients,
    rule: QuadratureRule | None = None,
    u_grid=None,
) -> ConditionReport:
    """Evaluate conditions a, b, c (and coercivity when a(t) is given) along ``x``."""
    beta = spec.beta.beta
    rule = rule or gauss_legendre_composite()
    threshold_a = l1_threshold(beta)
    lam = linearization_on_nodes(spec, x, rule, u_grid).fx

    frob = np.sqrt(np.sum(lam * lam, axis=(1, 2)))
    l1 = float(rule.weights @ frob)
    sym = 0.5 * (lam + np.swapaxes(lam, 1, 2))
    max_eig = float(np.max(np.linalg.eigvalsh(sym)[:, -1]))
    sup = float(np.max(frob))

    coercivity = None
    growth = sample_growth(spec, rule)
    if growth is not None:
        a_l2 = math.sqrt(float(rule.weights @ growth.values[:, 0] ** 2))
        lhs = embedding_constant(beta) * a_l2
        coercivity = CoercivityCheck(lhs, a_l2, lhs < 1.0)

    return ConditionReport(
        cond_a=L1Check(l1, threshold_a, l1 < threshold_a),
        cond_b=NonpositiveCheck(max_eig, max_eig <= 0.0),
        cond_c=SupCheck(sup, 1.0, sup < 1.0),
        coercivity=coercivity,
        beta=beta,
        sampled_nodes=rule.size,
    )


class ShiftEstimate(NamedTuple):
    lhs: float
    bound: float


def shift_compactness_test(g: SineCoefficients, beta, h: float, order: int = 16) -> ShiftEstimate:
    """Translation energy of the zero-extended solution of (-Delta)^beta x = g.

    ``lhs`` is the integral over the real line of |x~(t+h) - x~(t)|^2 with x~
    the zero extension of x; ``bound`` is the sum of the three strip
    estimates, ((4/pi) zeta(4 beta) + 4 zeta(4 beta - 1)) ||g||^2 h.
    """
    beta = as_beta(beta)
    if beta <= 0.5:
        raise DomainError(f"shift estimate needs beta > 1/2, got beta={beta}")
    h = float(h)
    if not 0.0 < h < math.pi:
        raise DomainError(f"shift must satisfy 0 < h < pi, got h={h}")
    x = apply_inverse_fractional(g, beta)

    def strip(a, b, fn):
        panels = 1 + math.ceil(x.J * (b - a) / math.pi)
        t, w = gauss_legendre_interval(a, b, panels, order)
        return float(w @ fn(t))

    def sq(t):
        return np.sum(synthesize(x, t) ** 2, axis=1)

    def shifted(t):
        return np.sum((synthesize(x, t + h) - synthesize(x, t)) ** 2, axis=1)

    lhs = strip(0.0, h, sq) + strip(0.0, math.pi - h, shifted) + strip(math.pi - h, math.pi, sq)
    g2 = float(np.sum(g.a * g.a))
    bound = (4.0 / math.pi * zeta(4.0 * beta).value + 4.0 * zeta(4.0 * beta - 1.0).value) * g2 * h
    return ShiftEstimate(lhs, bound)

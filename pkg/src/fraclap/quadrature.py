"""Composite Gauss-Legendre quadrature on (0, pi) and sine transforms."""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import FracLapWarning
from .spectral import SineCoefficients

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

DEFAULT_PANELS = 64
DEFAULT_ORDER = 24


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and weights of a composite rule; nodes never touch 0 or pi."""

    nodes: np.ndarray
    weights: np.ndarray
    panels: int
    order: int

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def resolvable_modes(self) -> int:
        """Rule-of-thumb highest sine mode the rule integrates reliably."""
        return self.panels * self.order // 4

    def same_as(self, other: QuadratureRule) -> bool:
        return self is other or (
            self.size == other.size
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def gauss_legendre_interval(a: float, b: float, panels: int, order: int):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    if int(panels) < 1 or int(order) < 1:
        raise ValueError(f"panels and order must be positive, got {panels}, {order}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    edges = np.linspace(a, b, int(panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@functools.lru_cache(maxsize=64)
def gauss_legendre_composite(panels: int = DEFAULT_PANELS, order: int = DEFAULT_ORDER) -> QuadratureRule:
    """Composite rule on (0, pi) split into equal panels.

    Exact for polynomials of degree ``2*order - 1`` on every panel.
    """
    if int(panels) < 1:
        raise ValueError(f"panels must be >= 1, got {panels}")
    if int(order) < 2:
        raise ValueError(f"order must be >= 2, got {order}")
    nodes, weights = gauss_legendre_interval(0.0, math.pi, panels, order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights, int(panels), int(order))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of an m-component function at the nodes of ``rule``.

    ``values`` has shape (nodes, m); matrix-valued samples use (nodes, m, m).
    """

    values: np.ndarray
    rule: QuadratureRule

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.rule.size:
            raise ValueError(f"{v.shape[0]} sample rows for a rule with {self.rule.size} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def nodes(self) -> np.ndarray:
        return self.rule.nodes


@functools.lru_cache(maxsize=32)
def sine_basis(rule: QuadratureRule, J: int) -> np.ndarray:
    """Orthonormal basis sampled at the nodes, shape (J, nodes)."""
    j = np.arange(1, J + 1, dtype=np.float64)
    basis = SQRT_2_OVER_PI * np.sin(np.outer(j, rule.nodes))
    basis.setflags(write=False)
    return basis


def sine_basis_at(t, J: int) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    j = np.arange(1, J + 1, dtype=np.float64)
    return SQRT_2_OVER_PI * np.sin(np.outer(j, t))


def check_resolution(rule: QuadratureRule, J: int) -> bool:
    """Warn and return False when ``J`` exceeds the rule's resolvable modes."""
    if J > rule.resolvable_modes:
        warnings.warn(
            f"J={J} modes exceed the {rule.resolvable_modes} modes resolvable by a "
            f"{rule.panels}x{rule.order} rule; projections may alias",
            FracLapWarning,
            stacklevel=3,
        )
        return False
    return True


def project_values(values: np.ndarray, rule: QuadratureRule, J: int) -> np.ndarray:
    """Sine coefficients of raw samples with shape (nodes, m)."""
    return sine_basis(rule, J) @ (rule.weights[:, None] * values)


def project_to_sine(g: GridFunction, J: int) -> SineCoefficients:
    check_resolution(g.rule, J)
    return SineCoefficients(project_values(g.values, g.rule, J))


def evaluate(x: SineCoefficients, rule: QuadratureRule) -> GridFunction:
    """Synthesize the truncated series at the rule's nodes."""
    return GridFunction(sine_basis(rule, x.J).T @ x.a, rule)


def synthesize(x: SineCoefficients, t) -> np.ndarray:
    """Evaluate the truncated series at arbitrary points; shape (len(t), m)."""
    return sine_basis_at(t, x.J).T @ x.a


def integrate(g: GridFunction) -> np.ndarray:
    """Componentwise integral over (0, pi)."""
    return g.rule.weights @ g.values


def integrate_inner(g: GridFunction, h: GridFunction) -> float:
    """Quadrature of ``sum_i int g_i h_i dt``."""
    if not g.rule.same_as(h.rule):
        raise ValueError("grid functions live on different quadrature rules")
    if g.values.shape != h.values.shape:
        raise ValueError(f"shape mismatch {g.values.shape} vs {h.values.shape}")
    return float(g.rule.weights @ np.sum(g.values * h.values, axis=1))


def l2_norm(g: GridFunction) -> float:
    return math.sqrt(max(integrate_inner(g, g), 0.0))

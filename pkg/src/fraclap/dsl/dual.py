"""Vectorized forward-mode dual numbers.

A :class:`Dual` holds values at a batch of sample points plus one tangent
row per differentiation direction. ``tan is None`` means an identically
zero tangent, which keeps t-only subexpressions cheap.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import EvaluationDomainError
from .parser import BinOp, Call, Const, Neg, Node, Num, Var, to_text


class Dual:
    __slots__ = ("val", "tan")

    def __init__(self, val, tan=None):
        self.val = val
        self.tan = tan

    def __repr__(self):
        return f"Dual(val={self.val!r}, tan={self.tan!r})"


def _add_tan(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _scale(tan, factor):
    return None if tan is None else tan * factor


class Evaluator:
    """Evaluates an AST over a batch of points.

    ``variables`` maps ``('t', 0)``, ``('x', i)``, ``('u', k)`` to Duals.
    """

    def __init__(self, variables: dict, source: str | None = None):
        self.variables = variables
        self.source = source

    def fail(self, node: Node, message: str):
        raise EvaluationDomainError(f"{message} in '{to_text(node)}'", node.pos, self.source)

    def __call__(self, node: Node) -> Dual:
        with np.errstate(all="ignore"):
            out = self._eval(node)
        if not np.all(np.isfinite(out.val)) or (out.tan is not None and not np.all(np.isfinite(out.tan))):
            self.fail(node, "non-finite result")
        return out

    def _eval(self, node: Node) -> Dual:
        if isinstance(node, Num):
            return Dual(np.float64(node.value))
        if isinstance(node, Const):
            return Dual(np.float64(math.pi if node.name == "pi" else math.e))
        if isinstance(node, Var):
            return self.variables[(node.kind, node.index)]
        if isinstance(node, Neg):
            a = self._eval(node.operand)
            return Dual(-a.val, None if a.tan is None else -a.tan)
        if isinstance(node, BinOp):
            return self._binop(node, self._eval(node.left), self._eval(node.right))
        if isinstance(node, Call):
            return self._call(node, self._eval(node.arg))
        raise TypeError(f"not an expression node: {node!r}")

    def _binop(self, node: BinOp, a: Dual, b: Dual) -> Dual:
        op = node.op
        if op == "+":
            return Dual(a.val + b.val, _add_tan(a.tan, b.tan))
        if op == "-":
            return Dual(a.val - b.val, _add_tan(a.tan, None if b.tan is None else -b.tan))
        if op == "*":
            return Dual(a.val * b.val, _add_tan(_scale(a.tan, b.val), _scale(b.tan, a.val)))
        if op == "/":
            if np.any(b.val == 0.0):
                self.fail(node, "division by zero")
            val = a.val / b.val
            tan = _add_tan(_scale(a.tan, 1.0 / b.val), _scale(b.tan, -val / b.val))
            return Dual(val, tan)
        if op == "^":
            return self._power(node, a, b)
        raise ValueError(f"unknown operator {op!r}")

    def _power(self, node: BinOp, a: Dual, b: Dual) -> Dual:
        integral = b.tan is None and np.all(b.val == np.round(b.val))
        if integral:
            if np.any((a.val == 0.0) & (b.val < 0)):
                self.fail(node, "division by zero (zero base, negative exponent)")
            val = np.power(a.val, b.val)
            if a.tan is None:
                return Dual(val)
            # d(a^n) = n a^(n-1) da, and zero when n == 0
            safe_exp = np.where(b.val == 0, 1.0, b.val - 1.0)
            deriv = np.where(b.val == 0, 0.0, b.val * np.power(a.val, safe_exp))
            return Dual(val, a.tan * deriv)
        if np.any(a.val <= 0.0):
            self.fail(node, "non-integer power of a nonpositive base")
        log_a = np.log(a.val)
        val = np.exp(b.val * log_a)
        tan = _add_tan(_scale(a.tan, b.val * val / a.val), _scale(b.tan, val * log_a))
        return Dual(val, tan)

    def _call(self, node: Call, a: Dual) -> Dual:
        v = a.val
        f = node.func
        if f == "sin":
            return Dual(np.sin(v), _scale(a.tan, np.cos(v)))
        if f == "cos":
            return Dual(np.cos(v), _scale(a.tan, -np.sin(v)))
        if f == "tan":
            # cos never rounds to exactly 0, so poles surface as huge finite values
            c = np.cos(v)
            return Dual(np.tan(v), _scale(a.tan, 1.0 / (c * c)))
        if f == "exp":
            e = np.exp(v)
            return Dual(e, _scale(a.tan, e))
        if f == "ln":
            if np.any(v <= 0.0):
                self.fail(node, "ln of a nonpositive number")
            return Dual(np.log(v), _scale(a.tan, 1.0 / v))
        if f == "abs":
            # sign(0) = 0 at the kink
            return Dual(np.abs(v), _scale(a.tan, np.sign(v)))
        if f == "tanh":
            th = np.tanh(v)
            return Dual(th, _scale(a.tan, 1.0 - th * th))
        if f == "sqrt":
            if np.any(v < 0.0):
                self.fail(node, "sqrt of a negative number")
            root = np.sqrt(v)
            if a.tan is None:
                return Dual(root)
            if np.any((v == 0.0) & np.any(a.tan != 0.0, axis=0)):
                self.fail(node, "sqrt is not differentiable at 0")
            with np.errstate(divide="ignore", invalid="ignore"):
                deriv = np.where(v == 0.0, 0.0, 0.5 / root)
            return Dual(root, a.tan * deriv)
        raise ValueError(f"unknown function {f!r}")

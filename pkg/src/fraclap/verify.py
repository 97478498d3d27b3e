"""Built-in verification suites with closed-form or self-consistency oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conditions import check_conditions, pointwise_threshold
from .dsl import ProblemSpec, parse
from .quadrature import gauss_legendre_composite
from .solver import (
    NewtonConfig,
    assemble,
    newton_solve,
    sample_direction,
    sensitivity,
    solve_linear,
)
from .spectral import (
    SineCoefficients,
    apply_fractional,
    apply_inverse_fractional,
    eigenvalues,
    norm_tilde,
)

EXAMPLE_F = ("0.1*sin(x2) + t^(-1/3)*exp(u1)", "0.1*cos(x1) + t*u2")
EXAMPLE_U = ("0", "0")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _rel(a, b) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) / scale


def _check(name, value, tol, what="error") -> CheckResult:
    return CheckResult(name, bool(value <= tol), f"{what} {value:.3e} (tol {tol:g})")


def example_problem(beta: float = 1.0) -> ProblemSpec:
    return ProblemSpec.from_strings(beta, EXAMPLE_F, EXAMPLE_U, growth="sqrt(0.1^2 + 0.1^2)")


def diagonal_suite() -> list[CheckResult]:
    """Closed forms for operators that act diagonally on sine coefficients."""
    out = []
    x = apply_fractional(SineCoefficients.unit(2, J=8), 1.0)
    out.append(_check("forward e_2, beta=1 gives 4", abs(x.a[1, 0] - 4.0), 1e-15))
    x = apply_inverse_fractional(SineCoefficients.unit(2, J=8), 1.0)
    out.append(_check("inverse e_2, beta=1 gives 1/4", abs(x.a[1, 0] - 0.25), 1e-15))

    rule = gauss_legendre_composite()
    J = 32
    g_src = "sin(t) + 0.5*sin(4*t) - 0.25*sin(7*t)"
    g = np.zeros((J, 1))
    scale = math.sqrt(math.pi / 2)
    g[0, 0], g[3, 0], g[6, 0] = scale, 0.5 * scale, -0.25 * scale
    for beta in (0.75, 1.0):
        lam0 = np.zeros((rule.size, 1, 1))
        h = solve_linear(assemble(lam0, beta, J, rule).with_rhs(g.reshape(-1)))
        out.append(_check(f"linear solve, Lambda=0, beta={beta}", _rel(h.a, g / eigenvalues(J, beta)[:, None]), 1e-10))
        for k in (0.0, 0.3, 1.0):
            spec = ProblemSpec.from_strings(beta, [f"{g_src} - {k}*x1"], ["0"])
            x, rep = newton_solve(spec, J=J, rule=rule, x0=SineCoefficients.zeros(J))
            want = g / (eigenvalues(J, beta)[:, None] + k)
            err = _rel(x.a, want)
            ok = rep.converged and rep.iterations == 1 and err <= 1e-10
            out.append(
                CheckResult(
                    f"affine Newton k={k}, beta={beta}",
                    ok,
                    f"{rep.iterations} step(s), error {err:.3e} (tol 1e-10)",
                )
            )
    return out


def manufactured_suite() -> list[CheckResult]:
    """Nonlinear problems built around a known band-limited solution."""
    rule = gauss_legendre_composite()
    J = 32
    s = math.sqrt(math.pi / 2)
    cases = [
        ("cubic, beta=0.75", 0.75, ["sin(t) + 0.5*(sin(t)^3 - x1^3)"], {(0, 0): s}),
        (
            "coupled pair, beta=1",
            1.0,
            ["sin(t) - 0.3*(x1 - sin(t)) + 0.2*(x2 - sin(2*t))", "4*sin(2*t) + 0.1*sin(x1 - sin(t))"],
            {(0, 0): s, (1, 1): s},
        ),
        ("tanh damping, beta=1.5", 1.5, ["27*sin(3*t) + tanh(sin(3*t) - x1)"], {(2, 0): s}),
    ]
    out = []
    for name, beta, f, nonzero in cases:
        spec = ProblemSpec.from_strings(beta, f, ["0"])
        want = np.zeros((J, spec.m))
        for (j, i), v in nonzero.items():
            want[j, i] = v
        x, rep = newton_solve(spec, J=J, rule=rule)
        err = _rel(x.a, want)
        ok = rep.converged and err <= 1e-10
        out.append(CheckResult(f"manufactured {name}", ok, f"error {err:.3e} after {rep.iterations} step(s)"))
    return out


def example_suite(J: int = 128) -> list[CheckResult]:
    """The two-component example with a = b = 0.1, beta = 1, u = 0."""
    rule = gauss_legendre_composite()
    spec = example_problem()
    out = []
    x, rep = newton_solve(spec, J=J, rule=rule)
    out.append(
        CheckResult(
            "example converges",
            rep.converged and rep.final_residual <= 1e-10,
            f"residual {rep.final_residual:.3e} in {rep.iterations} step(s)",
        )
    )
    cr = check_conditions(spec, x, rule)
    bound = pointwise_threshold(1.0)
    ab = math.hypot(0.1, 0.1)
    out.append(
        CheckResult(
            "example sup-norm bound",
            cr.cond_c.sup_frobenius <= ab + 1e-15 and ab < bound and cr.cond_a.holds,
            f"sup|Lambda| {cr.cond_c.sup_frobenius:.5f} <= sqrt(a^2+b^2) {ab:.5f} < {bound:.5f}",
        )
    )
    rng = np.random.default_rng(2024)
    z = SineCoefficients(rng.standard_normal((J, 2)))
    z = z * (1.0 / norm_tilde(z, 1.0))
    x2, rep2 = newton_solve(spec, J=J, rule=rule, x0=z)
    dist = float(np.max(np.abs(x2.a - x.a)))
    out.append(CheckResult("example multistart agreement", rep2.converged and dist <= 1e-8, f"distance {dist:.3e}"))

    tight = NewtonConfig(residual_tol=1e-14, step_tol=1e-16)
    x0, _ = newton_solve(spec, tight, J=J, rule=rule)
    v = sample_direction(_parse_t(["1", "0"]), rule)
    y = sensitivity(spec, x0, v, J, rule)
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        xe, _ = newton_solve(spec, tight, J=J, rule=rule, u_grid=eps * v.values)
        errs.append(float(np.linalg.norm((xe.a - x0.a) / eps - y.a) / np.linalg.norm(y.a)))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    ok = all(5 <= q <= 20 for q in ratios) and errs[-1] <= 5e-4
    out.append(
        CheckResult(
            "example sensitivity vs finite differences",
            ok,
            "errors " + ", ".join(f"{e:.2e}" for e in errs) + "; ratios " + ", ".join(f"{q:.2f}" for q in ratios),
        )
    )
    return out


def _parse_t(sources):
    return [parse(s, 0, 0, "a direction v(t)") for s in sources]


SUITES = {
    "diagonal": diagonal_suite,
    "manufactured": manufactured_suite,
    "example": example_suite,
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        return [r for fn in SUITES.values() for r in fn()]
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(list(SUITES) + ['all'])}")
    return SUITES[name]()


__all__ = ["CheckResult", "SUITES", "example_problem", "run_suite"]

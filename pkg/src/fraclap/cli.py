"""Command line interface: solve, apply, sens, check, verify.

Exit codes: 0 success, 1 verification failure, 2 file or parse error,
3 solver failure (non-convergence or singular linearization), 4 domain
error in the hypothesis checks.
"""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import _kernels
from .conditions import check_conditions
from .dsl import evaluate_batch, parse, sample_parameter
from .errors import (
    ConvergenceError,
    DomainError,
    ExpressionError,
    FracLapWarning,
    ProblemFileError,
    SingularSystemError,
)
from .io import load_problem, result_paths, write_coefficients, write_report, write_samples
from .quadrature import check_resolution, gauss_legendre_composite, project_values
from .solver import collect_warnings, newton_solve, sample_direction, sensitivity
from .spectral import SineCoefficients, apply_fractional, apply_inverse_fractional, norm_l2, norm_tilde
from .verify import run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_FILE = 2
EXIT_SOLVER = 3
EXIT_DOMAIN = 4


def _setup(args):
    pf = load_problem(args.file)
    numerics = pf.numerics
    J = getattr(args, "modes", None) or numerics.modes
    output = pf.output
    if getattr(args, "out", None):
        output = type(output)(Path(args.out), output.format)
    rule = gauss_legendre_composite(numerics.panels, numerics.order)
    return pf, J, rule, output


def _solve(pf, J, rule, u_grid=None, config=None):
    x, report = newton_solve(pf.spec, config or pf.numerics.newton, J=J, rule=rule, u_grid=u_grid)
    if not report.converged:
        raise ConvergenceError(
            f"Newton did not converge: residual {report.final_residual:.3e} after "
            f"{report.iterations} iterations (history in report)"
        )
    return x, report


def _norms(x, beta):
    return {"l2": norm_l2(x), "tilde_beta": norm_tilde(x, beta)}


def _summary(spec, pf, J, rule):
    return {
        "beta": spec.beta.beta,
        "m": spec.m,
        "r": spec.r,
        "f": [e.source for e in spec.f],
        "u": [e.source for e in spec.u],
        "growth_a": None if spec.growth_a is None else spec.growth_a.source,
        "modes": J,
        "panels": rule.panels,
        "order": rule.order,
        "problem_file": str(pf.source) if pf.source else None,
        "backend": _kernels.backend(),
    }


def cmd_solve(args) -> int:
    pf, J, rule, output = _setup(args)
    start = time.perf_counter()
    x, report = _solve(pf, J, rule)
    if not args.no_check:
        report.condition_verdicts = check_conditions(pf.spec, x, rule)
    paths = result_paths(output)
    paths["samples"].parent.mkdir(parents=True, exist_ok=True)
    write_samples(paths["samples"], x, output.delimiter)
    write_coefficients(paths["coefficients"], x, output.delimiter)
    doc = {
        "command": "solve",
        "problem": _summary(pf.spec, pf, J, rule),
        "solve": report.to_dict(),
        "norms": _norms(x, pf.spec.beta),
        "runtime_s": time.perf_counter() - start,
    }
    args._report = (paths["report"], doc, report.warnings)
    print(f"converged in {report.iterations} iterations, residual {report.final_residual:.3e}")
    print(f"wrote {paths['samples']}, {paths['coefficients']}, {paths['report']}")
    return EXIT_OK


def cmd_apply(args) -> int:
    pf, J, rule, output = _setup(args)
    spec = pf.spec
    start = time.perf_counter()
    if not spec.x_independent:
        warnings.warn("f depends on x; 'apply' uses f(t, 0, u(t)) as data", FracLapWarning)
    check_resolution(rule, J)
    u = sample_parameter(spec, rule).values
    data = evaluate_batch(spec, rule.nodes, np.zeros((rule.size, spec.m)), u, derivatives=False).value
    g = SineCoefficients(project_values(data, rule, J))
    y = apply_inverse_fractional(g, spec.beta) if args.inverse else apply_fractional(g, spec.beta)
    direction = "inverse" if args.inverse else "forward"
    paths = result_paths(output, f"apply-{direction}")
    paths["samples"].parent.mkdir(parents=True, exist_ok=True)
    write_samples(paths["samples"], y, output.delimiter, prefix="y")
    write_coefficients(paths["coefficients"], y, output.delimiter)
    doc = {
        "command": "apply",
        "direction": direction,
        "problem": _summary(spec, pf, J, rule),
        "norms": {"data_l2": norm_l2(g), "result": _norms(y, spec.beta)},
        "runtime_s": time.perf_counter() - start,
    }
    args._report = (paths["report"], doc, [])
    print(f"applied (-Delta)^({'-' if args.inverse else ''}{spec.beta.beta:g}); wrote {paths['coefficients']}")
    return EXIT_OK


def cmd_sens(args) -> int:
    pf, J, rule, output = _setup(args)
    spec = pf.spec
    start = time.perf_counter()
    sources = [s.strip() for s in args.v.split(",")]
    if len(sources) != spec.r:
        raise ProblemFileError(f"--v: expected {spec.r} comma-separated expressions, got {len(sources)}")
    try:
        v_exprs = [parse(s, 0, 0, "a direction v(t)") for s in sources]
    except ExpressionError as exc:
        raise ProblemFileError(f"--v: {exc}") from exc
    v = sample_direction(v_exprs, rule)
    config = pf.numerics.newton
    if args.fd_check:
        # finite differences divide solver noise by eps; converge all solves tightly
        config = type(config)(
            config.max_iters, min(config.residual_tol, 1e-14), min(config.step_tol, 1e-16),
            config.damping, config.max_backtracks,
        )
    x, report = _solve(pf, J, rule, config=config)
    y = sensitivity(spec, x, v, J, rule)
    paths = result_paths(output, "sens")
    paths["samples"].parent.mkdir(parents=True, exist_ok=True)
    write_samples(paths["samples"], y, output.delimiter, prefix="y")
    write_coefficients(paths["coefficients"], y, output.delimiter)
    doc = {
        "command": "sens",
        "problem": _summary(spec, pf, J, rule),
        "direction": sources,
        "solve": report.to_dict(),
        "norms": {"solution": _norms(x, spec.beta), "sensitivity": _norms(y, spec.beta)},
    }
    warn_list = list(report.warnings)
    if args.fd_check:
        u0 = sample_parameter(spec, rule).values
        rows = []
        eps = args.fd_check
        for k in range(3):
            e = eps / 10**k
            xe, rep_e = _solve(pf, J, rule, u_grid=u0 + e * v.values, config=config)
            collect_warnings(rep_e.warnings, warn_list)
            err = float(np.linalg.norm((xe.a - x.a) / e - y.a) / max(np.linalg.norm(y.a), 1e-300))
            rows.append({"eps": e, "relative_error": err})
        for prev, cur in zip(rows, rows[1:]):
            cur["ratio"] = prev["relative_error"] / cur["relative_error"] if cur["relative_error"] else None
        fd_path = Path(str(output.path) + ".sens.fd" + output.suffix)
        with open(fd_path, "w") as fh:
            fh.write(output.delimiter.join(["eps", "relative_error", "ratio"]) + "\n")
            for row in rows:
                ratio = row.get("ratio")
                fh.write(output.delimiter.join(
                    [format(row["eps"], ".17g"), format(row["relative_error"], ".17g"),
                     "" if ratio is None else format(ratio, ".17g")]
                ) + "\n")
        doc["fd_check"] = rows
        for row in rows:
            print(f"eps={row['eps']:.1e}  relative error {row['relative_error']:.3e}")
    doc["runtime_s"] = time.perf_counter() - start
    args._report = (paths["report"], doc, warn_list)
    print(f"wrote {paths['samples']}, {paths['coefficients']}")
    return EXIT_OK


def cmd_check(args) -> int:
    pf, J, rule, output = _setup(args)
    x, report = _solve(pf, J, rule)
    cr = check_conditions(pf.spec, x, rule)
    path = Path(str(output.path) + ".conditions.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"command": "check", "problem": _summary(pf.spec, pf, J, rule), "conditions": cr.to_dict()}
    args._report = (path, doc, report.warnings)
    a, b, c = cr.cond_a, cr.cond_b, cr.cond_c
    print(f"a) ||Lambda||_L1 = {a.lhs:.6g} < {a.threshold:.6g}: {a.holds}")
    print(f"b) max eig sym(Lambda) = {b.max_symmetric_eigenvalue_over_nodes:.6g} <= 0: {b.holds}")
    print(f"c) sup |Lambda| = {c.sup_frobenius:.6g} < 1: {c.holds}")
    if cr.coercivity is not None:
        print(f"coercivity: {cr.coercivity.lhs:.6g} < 1: {cr.coercivity.holds}")
    print(f"any of a/b/c holds: {cr.any_holds}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = run_suite(args.suite)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_FILE
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve the nonlinear problem and check the hypotheses")
    p.add_argument("file")
    p.add_argument("--modes", type=int, help="number of sine modes J")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--no-check", action="store_true", help="skip the hypothesis checks")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("apply", help="apply (-Delta)^beta or its inverse to f(t, 0, u(t))")
    p.add_argument("file")
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--modes", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("sens", help="sensitivity lambda'(u) v at the solution")
    p.add_argument("file")
    p.add_argument("--v", required=True, help="comma-separated v(t) expressions, one per parameter")
    p.add_argument("--fd-check", type=float, metavar="EPS", help="compare with forward differences at EPS, EPS/10, EPS/100")
    p.add_argument("--modes", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sens)

    p = sub.add_parser("check", help="hypothesis checks along the computed solution")
    p.add_argument("file")
    p.add_argument("--modes", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="run a built-in verification suite")
    p.add_argument("suite", help="diagonal, manufactured, example or all")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._report = None
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = args.func(args)
        merged = []
        if args._report is not None:
            path, doc, warn_list = args._report
            merged.extend(warn_list)
            collect_warnings(caught, merged)
            doc["warnings"] = merged
            write_report(path, doc)
        else:
            collect_warnings(caught, merged)
        for msg in merged:
            print(f"warning: {msg}", file=sys.stderr)
        return code
    except (ProblemFileError, ExpressionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (ConvergenceError, SingularSystemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

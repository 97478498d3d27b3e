"""Problem files (TOML) and result files (delimited text + JSON)."""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dsl import ProblemSpec, parse
from .errors import ExpressionError, ProblemFileError
from .quadrature import DEFAULT_ORDER, DEFAULT_PANELS, synthesize
from .solver import DEFAULT_MODES, NewtonConfig
from .spectral import FractionalOrder, SineCoefficients

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

SAMPLE_POINTS = 1001


@dataclass(frozen=True)
class Numerics:
    modes: int = DEFAULT_MODES
    panels: int = DEFAULT_PANELS
    order: int = DEFAULT_ORDER
    newton: NewtonConfig = field(default_factory=NewtonConfig)


@dataclass(frozen=True)
class OutputSpec:
    path: Path
    format: str = "csv"

    @property
    def delimiter(self) -> str:
        return "\t" if self.format == "tsv" else ","

    @property
    def suffix(self) -> str:
        return ".tsv" if self.format == "tsv" else ".csv"


@dataclass(frozen=True)
class ProblemFile:
    spec: ProblemSpec
    numerics: Numerics
    output: OutputSpec
    source: Path | None = None


def _require(table: dict, key: str, kind, where: str):
    if key not in table:
        raise ProblemFileError(f"{where}: missing required field {key!r}")
    return _typed(table[key], kind, f"{where}.{key}")


def _typed(value, kind, where: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ProblemFileError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ProblemFileError(f"{where}: expected an integer, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ProblemFileError(f"{where}: expected a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise ProblemFileError(f"{where}: expected a list of expression strings, got {value!r}")
        return value
    raise TypeError(kind)


def _parse_expr(text, m, r, where, context):
    try:
        return parse(text, m, r, context)
    except ExpressionError as exc:
        raise ProblemFileError(f"{where}: {exc}") from exc


def problem_from_dict(doc: dict, base_dir: Path | None = None, name: str = "problem") -> ProblemFile:
    """Validate a decoded problem document; nothing is computed before this passes."""
    if "problem" not in doc or not isinstance(doc["problem"], dict):
        raise ProblemFileError(f"{name}: missing [problem] section")
    prob = doc["problem"]
    beta = _require(prob, "beta", float, "problem")
    if not (math.isfinite(beta) and beta > 0):
        raise ProblemFileError(f"problem.beta: must be positive, got {beta}")
    f_src = _require(prob, "f", list, "problem")
    u_src = _require(prob, "u", list, "problem")
    m = _typed(prob["m"], int, "problem.m") if "m" in prob else len(f_src)
    r = _typed(prob["r"], int, "problem.r") if "r" in prob else len(u_src)
    if m < 1 or len(f_src) != m:
        raise ProblemFileError(f"problem.f: expected m={m} expressions, got {len(f_src)}")
    if r < 1 or len(u_src) != r:
        raise ProblemFileError(f"problem.u: expected r={r} expressions, got {len(u_src)}")
    f = tuple(_parse_expr(s, m, r, f"problem.f[{i}]", "f") for i, s in enumerate(f_src))
    u = tuple(
        _parse_expr(s, 0, 0, f"problem.u[{k}]", "a parameter expression u(t)") for k, s in enumerate(u_src)
    )
    growth = None
    if "growth" in prob:
        g = prob["growth"]
        if isinstance(g, dict):
            g_src = _require(g, "a", str, "problem.growth")
        else:
            g_src = _typed(g, str, "problem.growth")
        growth = _parse_expr(g_src, 0, 0, "problem.growth.a", "the growth bound a(t)")
    spec = ProblemSpec(FractionalOrder(beta), m, r, f, u, growth)

    num = doc.get("numerics", {})
    if not isinstance(num, dict):
        raise ProblemFileError("numerics: expected a table")
    modes = _typed(num.get("modes", DEFAULT_MODES), int, "numerics.modes")
    panels = _typed(num.get("panels", DEFAULT_PANELS), int, "numerics.panels")
    order = _typed(num.get("order", DEFAULT_ORDER), int, "numerics.order")
    if modes < 1 or panels < 1 or order < 2:
        raise ProblemFileError("numerics: need modes >= 1, panels >= 1, order >= 2")
    nt = num.get("newton", {})
    if not isinstance(nt, dict):
        raise ProblemFileError("numerics.newton: expected a table")
    defaults = NewtonConfig()
    try:
        newton = NewtonConfig(
            max_iters=_typed(nt.get("max_iters", defaults.max_iters), int, "numerics.newton.max_iters"),
            residual_tol=_typed(nt.get("residual_tol", defaults.residual_tol), float, "numerics.newton.residual_tol"),
            step_tol=_typed(nt.get("step_tol", defaults.step_tol), float, "numerics.newton.step_tol"),
            damping=_typed(nt.get("damping", defaults.damping), float, "numerics.newton.damping"),
            max_backtracks=_typed(
                nt.get("max_backtracks", defaults.max_backtracks), int, "numerics.newton.max_backtracks"
            ),
        )
    except ValueError as exc:
        raise ProblemFileError(f"numerics.newton: {exc}") from exc

    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ProblemFileError("output: expected a table")
    fmt = _typed(out.get("format", "csv"), str, "output.format")
    if fmt not in ("csv", "tsv"):
        raise ProblemFileError(f"output.format: expected 'csv' or 'tsv', got {fmt!r}")
    path = Path(_typed(out.get("path", name), str, "output.path"))
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return ProblemFile(spec, Numerics(modes, panels, order, newton), OutputSpec(path, fmt))


def load_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ProblemFileError(f"{path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc
    pf = problem_from_dict(doc, path.parent, path.stem)
    return ProblemFile(pf.spec, pf.numerics, pf.output, path)


# ---------------------------------------------------------------------------
# results

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def uniform_samples(x: SineCoefficients, n: int = SAMPLE_POINTS):
    """x on a uniform grid of [0, pi] with exact zeros at both ends."""
    t = np.linspace(0.0, np.pi, n)
    vals = synthesize(x, t)
    # sin(j*pi) is only ~1e-16 in floating point; the Dirichlet values are exact zeros
    vals[0] = 0.0
    vals[-1] = 0.0
    return t, vals


def write_samples(path, x: SineCoefficients, delimiter: str = ",", n: int = SAMPLE_POINTS, prefix: str = "x"):
    t, vals = uniform_samples(x, n)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["t"] + [f"{prefix}{i + 1}" for i in range(x.m)])
        for k in range(n):
            w.writerow([_fmt(t[k])] + [_fmt(v) for v in vals[k]])


def write_coefficients(path, x: SineCoefficients, delimiter: str = ","):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["j", "i", "a"])
        for j in range(x.J):
            for i in range(x.m):
                w.writerow([j + 1, i + 1, _fmt(x.a[j, i])])


def load_coefficients(path, delimiter: str | None = None) -> SineCoefficients:
    """Read a coefficient dump back; values round-trip bit for bit."""
    path = Path(path)
    if delimiter is None:
        delimiter = "\t" if path.suffix == ".tsv" else ","
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    if not rows or rows[0] != ["j", "i", "a"]:
        raise ProblemFileError(f"{path}: not a coefficient dump (header {rows[:1]!r})")
    entries = [(int(j), int(i), float(a)) for j, i, a in rows[1:]]
    J = max(e[0] for e in entries)
    m = max(e[1] for e in entries)
    a = np.zeros((J, m))
    for j, i, v in entries:
        a[j - 1, i - 1] = v
    return SineCoefficients(a)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_report(path, report: dict):
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, indent=2)
        fh.write("\n")


def result_paths(output: OutputSpec, tag: str = "") -> dict:
    stem = str(output.path) + (f".{tag}" if tag else "")
    return {
        "samples": Path(stem + ".samples" + output.suffix),
        "coefficients": Path(stem + ".coeffs" + output.suffix),
        "report": Path(stem + ".report.json"),
    }

"""Coupled thermostat-type systems: domain types, cone geometry, problem files."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import TYPE_CHECKING

import numpy as np
import tomli
import tomli_w

from . import expr as ex

if TYPE_CHECKING:
    from .discrete import GridPair

__all__ = [
    "BcKind",
    "ComponentParams",
    "Functional",
    "Nonlinearity",
    "Component",
    "SystemProblem",
    "ConeSpec",
    "Violation",
    "ValidationReport",
    "ProblemError",
    "ProblemSyntaxError",
    "UnknownFieldError",
    "ProblemValidationError",
    "validate",
    "norm_Y",
    "in_cone",
    "load_problem",
    "dump_problem",
    "parse_number",
]


class BcKind(enum.Enum):
    """Condition imposed at t = 0 for one component."""

    DIRICHLET0 = "dirichlet0"  # u(0) = lambda H[u]
    NEUMANN0 = "neumann0"  # u'(0) + lambda H[u] = 0


@dataclass(frozen=True)
class ComponentParams:
    beta: Real
    eta: Real
    a: Real
    b: Real

    @property
    def sigma(self) -> Real:
        return self.beta + self.eta


@dataclass(frozen=True)
class Functional:
    """Boundary functional, either affine in point evaluations or a general expression.

    Affine form: ``constant + sum(weight * u_comp(point))``.
    """

    terms: tuple[tuple[int, Real, Real], ...] = ()
    constant: Real = Fraction(0)
    expr: ex.Expr | None = None

    @property
    def is_affine(self) -> bool:
        return self.expr is None

    def __call__(self, u1, u2) -> float:
        """Evaluate on a pair of callables ``u_i(point) -> float``."""
        if self.expr is not None:
            return float(ex.evaluate(self.expr, {"u1": u1, "u2": u2}))
        fns = {1: u1, 2: u2}
        total = float(self.constant)
        for comp, point, weight in self.terms:
            total += float(weight) * float(fns[comp](float(point)))
        return total

    def scaled(self, alpha: Real) -> "Functional":
        if self.expr is not None:
            return Functional(expr=ex.BinOp("*", ex.Num(float(alpha)), self.expr))
        terms = tuple((c, p, w * alpha) for c, p, w in self.terms)
        return Functional(terms, self.constant * alpha)


ZERO = Functional()


@dataclass(frozen=True)
class Nonlinearity:
    expr: ex.Expr

    @classmethod
    def parse(cls, src: str) -> "Nonlinearity":
        return cls(ex.parse(src, ex.Context.F))

    def __call__(self, t, u1, u2):
        return ex.evaluate(self.expr, {"t": t, "u1": u1, "u2": u2})

    def __str__(self) -> str:
        return ex.to_source(self.expr)


@dataclass(frozen=True)
class Component:
    bc: BcKind
    params: ComponentParams
    F: Nonlinearity
    H: Functional = ZERO
    G: Functional = ZERO


@dataclass(frozen=True)
class SystemProblem:
    components: tuple[Component, Component]
    name: str = ""

    def __post_init__(self):
        if len(self.components) != 2:
            raise ValueError("a system has exactly two components")

    def scaled(self, alpha: Real) -> "SystemProblem":
        """Multiply every F, H and G by ``alpha``."""
        comps = tuple(
            Component(
                c.bc,
                c.params,
                Nonlinearity(ex.BinOp("*", ex.Num(float(alpha)), c.F.expr)),
                c.H.scaled(alpha),
                c.G.scaled(alpha),
            )
            for c in self.components
        )
        return SystemProblem(comps, self.name)


@dataclass(frozen=True)
class ConeSpec:
    c_tilde: tuple[Real, Real]
    intervals: tuple[tuple[Real, Real], tuple[Real, Real]]


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    component: int
    field: str
    message: str

    def __str__(self) -> str:
        return f"component {self.component}: {self.field}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _check_functional(i: int, name: str, f: Functional, out: list[Violation]) -> None:
    if f.expr is not None:
        for pe in ex.point_evals(f.expr):
            if not 0 <= pe.point <= 1:
                out.append(Violation(i, name, f"point {pe.point} outside [0,1]"))
        return
    if f.constant < 0:
        out.append(Violation(i, name, f"negative constant {f.constant}"))
    for comp, point, weight in f.terms:
        if comp not in (1, 2):
            out.append(Violation(i, name, f"component index {comp} not in {{1,2}}"))
        if not 0 <= point <= 1:
            out.append(Violation(i, name, f"point {point} outside [0,1]"))
        if weight < 0:
            out.append(Violation(i, name, f"negative weight {weight}"))


def validate(problem: SystemProblem, sample_R: float = 1.0) -> ValidationReport:
    """Collect every violated standing assumption; valid iff no violations."""
    report = ValidationReport()
    v = report.violations
    for i, comp in enumerate(problem.components, start=1):
        p = comp.params
        if p.beta <= 0:
            v.append(Violation(i, "beta", "beta ≤ 0"))
        if not 0 < p.eta < 1:
            v.append(Violation(i, "eta", "eta ∉ (0,1)"))
        if p.beta + p.eta >= 1:
            v.append(Violation(i, "beta+eta", "beta+eta ≥ 1"))
        if p.a <= 0:
            v.append(Violation(i, "a", "a ≤ 0"))
        if p.a >= p.b:
            v.append(Violation(i, "b", "a ≥ b"))
        if p.b >= p.beta + p.eta:
            v.append(Violation(i, "b", "b ≥ beta+eta"))
        if comp.bc is BcKind.NEUMANN0 and p.b < p.eta:
            # K(t,s) = beta for s > max(t, eta), below c*Phi = beta+eta-b
            report.warnings.append(f"component {i}: b < eta, the kernel lower bound fails on [a,b]")
        _check_functional(i, "H", comp.H, v)
        _check_functional(i, "G", comp.G, v)
        for name, f in (("H", comp.H), ("G", comp.G)):
            if not f.is_affine:
                report.warnings.append(
                    f"component {i}: {name} is a general expression; non-rigorous lower bounds"
                )
        bad = ex.variables(comp.F.expr) - set(ex.F_VARIABLES)
        if bad:
            v.append(Violation(i, "F", f"unknown variables {sorted(bad)}"))
            continue
        # sampled, not proved
        grid = np.linspace(0.0, 1.0, 9)
        t, u1, u2 = np.meshgrid(grid, sample_R * grid, sample_R * grid, indexing="ij")
        try:
            vals = np.broadcast_to(comp.F(t, u1, u2), t.shape)
        except ex.EvalError as err:
            v.append(Violation(i, "F", f"evaluation failed: {err}"))
            continue
        if np.any(vals < 0):
            v.append(Violation(i, "F", "negative value on [0,1]x[0,R]^2"))
    kinds = tuple(c.bc for c in problem.components)
    if kinds == (BcKind.DIRICHLET0, BcKind.NEUMANN0):
        report.warnings.append(
            "Dirichlet/Neumann combination (component 1 Dirichlet, component 2 Neumann) "
            "is outside the three treated families"
        )
    return report


# ---------------------------------------------------------------- norm and cone


def norm_Y(u: "GridPair") -> float:
    """Product sup-norm max(||u1||, ||u2||) over the grid nodes."""
    if u.u1.grid != u.u2.grid:
        raise ValueError("components live on different grids")
    return float(max(np.max(np.abs(u.u1.values)), np.max(np.abs(u.u2.values))))


@dataclass(frozen=True)
class ConeCheck:
    ok: bool
    margins: tuple[float, float]

    def __bool__(self) -> bool:
        return self.ok


def in_cone(u: "GridPair", cone: ConeSpec, tol: float | None = None) -> ConeCheck:
    """Sampled membership of ``u`` in the product cone.

    Per component the margin is the smaller of ``min u_i`` and
    ``min_{[a_i,b_i]} u_i - c_i ||u_i||``; membership requires both >= -tol.
    """
    if tol is None:
        tol = 1e-10 * norm_Y(u)
    margins = []
    for f, c, (a, b) in zip((u.u1, u.u2), cone.c_tilde, cone.intervals):
        vals = f.values
        nodes = f.grid.nodes
        mask = (nodes >= float(a) - 1e-14) & (nodes <= float(b) + 1e-14)
        sup = np.max(np.abs(vals))
        strip = np.min(vals[mask]) - float(c) * sup if mask.any() else np.inf
        margins.append(float(min(np.min(vals), strip)))
    return ConeCheck(all(m >= -tol for m in margins), tuple(margins))


# ---------------------------------------------------------------- problem files


class ProblemError(ValueError):
    pass


class ProblemSyntaxError(ProblemError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class UnknownFieldError(ProblemError):
    pass


class ProblemValidationError(ProblemError):
    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(str(v) for v in report.violations))
        self.report = report


_COMPONENT_KEYS = {"bc", "beta", "eta", "a", "b", "F", "H", "G"}
_FUNCTIONAL_KEYS = {"affine", "const", "expr"}


def parse_number(value, where: str) -> Real:
    """Rational strings ("1/4", "0.2") and integers stay exact; floats stay floats."""
    if isinstance(value, bool):
        raise ProblemError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ProblemError(f"{where}: cannot read {value!r} as a number") from None
    raise ProblemError(f"{where}: expected a number, got {value!r}")


def _format_number(x: Real):
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _check_keys(table: dict, allowed: set, where: str) -> None:
    extra = set(table) - allowed
    if extra:
        raise UnknownFieldError(f"{where}: unknown field(s) {', '.join(sorted(extra))}")


def _read_functional(raw, where: str) -> Functional:
    if raw is None:
        return ZERO
    if not isinstance(raw, dict):
        raise ProblemError(f"{where}: expected a table")
    _check_keys(raw, _FUNCTIONAL_KEYS, where)
    if "expr" in raw:
        if "affine" in raw or "const" in raw:
            raise ProblemError(f"{where}: give either expr or affine/const, not both")
        try:
            return Functional(expr=ex.parse(str(raw["expr"]), ex.Context.FUNCTIONAL))
        except ex.ExprError as err:
            raise _rewrap(err, where)
    terms = []
    for k, term in enumerate(raw.get("affine", [])):
        if not isinstance(term, list) or len(term) != 3:
            raise ProblemError(f"{where}.affine[{k}]: expected [component, point, weight]")
        comp = term[0]
        if isinstance(comp, bool) or not isinstance(comp, int):
            raise ProblemError(f"{where}.affine[{k}]: component must be 1 or 2")
        terms.append(
            (comp, parse_number(term[1], f"{where}.affine[{k}]"), parse_number(term[2], f"{where}.affine[{k}]"))
        )
    const = parse_number(raw.get("const", 0), f"{where}.const")
    return Functional(tuple(terms), const)


def _rewrap(err: ex.ExprError, where: str) -> ex.ExprError:
    err.args = (f"{where}: {err.args[0]}",)
    return err


def load_problem(text: str, check: bool = True) -> SystemProblem:
    """Parse a problem definition (TOML) and validate it."""
    if not text.strip():
        raise ProblemSyntaxError("empty problem definition", 1, 1)
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        msg = str(err)
        line = col = None
        if "(at line" in msg:
            msg, _, loc = msg.partition(" (at line ")
            nums = [int(tok) for tok in loc.replace(",", " ").replace(")", " ").split() if tok.isdigit()]
            if len(nums) == 2:
                line, col = nums
        raise ProblemSyntaxError(msg, line, col) from None
    _check_keys(doc, {"name", "component"}, "problem")
    comps_raw = doc.get("component")
    if not isinstance(comps_raw, dict) or set(comps_raw) != {"1", "2"}:
        raise ProblemError("problem must define exactly [component.1] and [component.2]")
    comps = []
    for key in ("1", "2"):
        raw = comps_raw[key]
        where = f"component.{key}"
        _check_keys(raw, _COMPONENT_KEYS, where)
        missing = {"bc", "beta", "eta", "a", "b", "F"} - set(raw)
        if missing:
            raise ProblemError(f"{where}: missing field(s) {', '.join(sorted(missing))}")
        try:
            bc = BcKind(raw["bc"])
        except ValueError:
            raise ProblemError(f"{where}.bc: expected 'dirichlet0' or 'neumann0', got {raw['bc']!r}") from None
        params = ComponentParams(
            *(parse_number(raw[k], f"{where}.{k}") for k in ("beta", "eta", "a", "b"))
        )
        try:
            F = Nonlinearity.parse(str(raw["F"]))
        except ex.ExprError as err:
            raise _rewrap(err, f"{where}.F")
        comps.append(
            Component(bc, params, F, _read_functional(raw.get("H"), f"{where}.H"),
                      _read_functional(raw.get("G"), f"{where}.G"))
        )
    problem = SystemProblem(tuple(comps), str(doc.get("name", "")))
    if check:
        report = validate(problem)
        if not report.ok:
            raise ProblemValidationError(report)
    return problem


def _functional_table(f: Functional) -> dict:
    if f.expr is not None:
        return {"expr": ex.to_source(f.expr)}
    return {
        "affine": [[c, _format_number(p), _format_number(w)] for c, p, w in f.terms],
        "const": _format_number(f.constant),
    }


def dump_problem(problem: SystemProblem) -> str:
    """Serialize to the problem-file format; ``load_problem`` inverts it."""
    doc: dict = {}
    if problem.name:
        doc["name"] = problem.name
    doc["component"] = {}
    for i, c in enumerate(problem.components, start=1):
        p = c.params
        doc["component"][str(i)] = {
            "bc": c.bc.value,
            "beta": _format_number(p.beta),
            "eta": _format_number(p.eta),
            "a": _format_number(p.a),
            "b": _format_number(p.b),
            "F": ex.to_source(c.F.expr),
            "H": _functional_table(c.H),
            "G": _functional_table(c.G),
        }
    return tomli_w.dumps(doc)


def cone_of(problem: SystemProblem) -> ConeSpec:
    from .kernels import kernel_set

    kss = [kernel_set(c.bc, c.params) for c in problem.components]
    return ConeSpec(
        tuple(ks.c_tilde for ks in kss),
        tuple((c.params.a, c.params.b) for c in problem.components),
    )


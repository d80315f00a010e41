"""hameig command line: verify hypotheses, solve for eigenpairs, sweep over R.

Exit codes: 0 success / verdict true, 1 verdict false or solver failure,
2 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import expr as ex
from .discrete import Grid
from .eigensolver import SolverError, solve, sweep
from .presets import PRESETS, get_preset, preset_text
from .problem import ProblemError, SystemProblem, load_problem
from .verifier import verify

SWEEP_COLUMNS = ("R", "lambda", "iterations", "integral_residual", "ode_residual", "cone_ok")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: str | None = None
    R: tuple[float, ...] = (1.0,)
    grid_n: int = 600
    tol: float = 1e-11
    max_iter: int = 10000
    output: str | None = None
    format: str = "text"
    warm_start: bool = True

    def __post_init__(self):
        if self.grid_n < 2 or self.grid_n % 2:
            raise InputError(f"--grid-n must be even and >= 2, got {self.grid_n}")
        if any(not R > 0 for R in self.R):
            raise InputError("R must be positive")


def _canonical(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def dumps_json(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_canonical(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def resolve_problem(source: str | None) -> SystemProblem:
    if not source:
        raise InputError("--problem is required")
    if source in PRESETS:
        return get_preset(source).problem
    path = Path(source)
    if not path.is_file():
        raise InputError(f"{source!r} is neither a preset ({', '.join(PRESETS)}) nor a readable file")
    return load_problem(path.read_text())


def _csv(rows: list[list], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def run_verify(cfg: RunConfig, problem: SystemProblem) -> tuple[str, int]:
    reports = [verify(problem, R) for R in cfg.R]
    ok = all(r.verdict for r in reports)
    if cfg.format == "json":
        body = [r.to_dict() for r in reports]
        return dumps_json(body[0] if len(body) == 1 else body), 0 if ok else 1
    if cfg.format == "csv":
        header = ["R", "component", "c_tilde", "gamma_min", "zeta_H", "zeta_G", "c3_sup",
                  "quoted_bound", "d3_ok", "d4_ok", "rigorous", "verdict"]
        rows = []
        for r in reports:
            for i, c in enumerate(r.components, start=1):
                rows.append([_fmt(r.R), i, str(c.c_tilde), _fmt(c.gamma_min), _fmt(c.zeta_H),
                             _fmt(c.zeta_G), _fmt(c.c3_sup), _fmt(c.quoted_bound), c.d3_ok,
                             c.d4_ok, c.rigorous, r.verdict])
        return _csv(rows, header), 0 if ok else 1
    lines = []
    for r in reports:
        lines.append(f"R = {r.R:g}: verdict {'TRUE' if r.verdict else 'FALSE'} (min C3 = {r.min_c3:.6g})")
        for i, c in enumerate(r.components, start=1):
            bound = "" if c.quoted_bound is None else f", quoted bound {c.quoted_bound:.6g}"
            lines.append(
                f"  component {i}: c~ = {c.c_tilde}, gamma = {c.gamma_min:.6g}, "
                f"zeta_H = {c.zeta_H:.6g}, zeta_G = {c.zeta_G:.6g}, C3 = {c.c3_sup:.6g}{bound}; "
                f"D3 {'ok' if c.d3_ok else 'FAIL'}, D4 {'ok' if c.d4_ok else 'FAIL'}"
                f"{'' if c.rigorous else ' (sampled bounds)'}"
            )
        lines.extend(f"  warning: {w}" for w in r.warnings)
    return "\n".join(lines) + "\n", 0 if ok else 1


def run_solve(cfg: RunConfig, problem: SystemProblem) -> tuple[str, int]:
    R = cfg.R[0]
    pair = solve(problem, R, Grid(cfg.grid_n), cfg.tol, cfg.max_iter)
    if cfg.format == "json":
        return dumps_json(pair.to_dict()), 0
    if cfg.format == "csv":
        rows = zip(pair.u.grid.nodes.tolist(), pair.u.u1.values.tolist(), pair.u.u2.values.tolist())
        return _csv([[_fmt(t), _fmt(a), _fmt(b)] for t, a, b in rows], ["t", "u1", "u2"]), 0
    text = (
        f"lambda = {pair.lam!r}\n"
        f"R = {pair.R!r}, grid n = {cfg.grid_n}, iterations = {pair.iterations}\n"
        f"integral residual = {pair.integral_residual:.3e}\n"
        f"ode residual = {pair.ode_residual:.3e}\n"
        f"bc residuals = {', '.join(f'{x:.3e}' for x in pair.bc_residual)}\n"
        f"cone ok = {pair.cone_ok} (margins {pair.cone_margins[0]:.6g}, {pair.cone_margins[1]:.6g})\n"
    )
    return text, 0


def run_sweep(cfg: RunConfig, problem: SystemProblem) -> tuple[str, int]:
    rows = sweep(problem, sorted(cfg.R), Grid(cfg.grid_n), cfg.tol, cfg.max_iter, cfg.warm_start)
    code = 0 if all(r.error is None for r in rows) else 1
    for r in rows:
        if r.error:
            print(f"R = {r.R:g}: {r.error}", file=sys.stderr)
    if cfg.format == "json":
        return dumps_json([r.as_dict() for r in rows]), code
    if cfg.format == "csv":
        body = [[_fmt(r.R), _fmt(r.lam), _fmt(r.iterations), _fmt(r.integral_residual),
                 _fmt(r.ode_residual), _fmt(r.cone_ok)] for r in rows]
        return _csv(body, list(SWEEP_COLUMNS)), code
    lines = [f"{'R':>10} {'lambda':>22} {'iter':>6} {'int.res':>10} {'ode.res':>10} cone"]
    for r in rows:
        if r.error:
            lines.append(f"{r.R:>10g} failed: {r.error}")
        else:
            lines.append(f"{r.R:>10g} {r.lam:>22.15g} {r.iterations:>6d} "
                         f"{r.integral_residual:>10.2e} {r.ode_residual:>10.2e} {r.cone_ok}")
    return "\n".join(lines) + "\n", code


def run_examples(cfg: RunConfig) -> tuple[str, int]:
    names = [cfg.problem] if cfg.problem else list(PRESETS)
    for name in names:
        if name not in PRESETS:
            raise InputError(f"unknown preset {name!r}")
    if cfg.format == "json":
        return dumps_json({name: preset_text(name) for name in names}), 0
    chunks = []
    for name in names:
        chunks.append(f"# --- {name} ---\n")
        chunks.extend(f"# note: {note}\n" for note in get_preset(name).notes)
        chunks.append(preset_text(name) + "\n")
    return "".join(chunks), 0


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        if cfg.command == "examples":
            out, code = run_examples(cfg)
        else:
            problem = resolve_problem(cfg.problem)
            handler = {"verify": run_verify, "solve": run_solve, "sweep": run_sweep}[cfg.command]
            out, code = handler(cfg, problem)
    except (InputError, ProblemError, ex.ExprError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except SolverError as err:
        print(f"solver: {err}", file=sys.stderr)
        return 1
    if cfg.output:
        Path(cfg.output).write_text(out)
    else:
        sys.stdout.write(out)
    return code


def _radii(values: list[str]) -> tuple[float, ...]:
    out = []
    for v in values:
        for part in v.split(","):
            if part.strip():
                try:
                    out.append(float(Fraction(part.strip())))
                except (ValueError, ZeroDivisionError):
                    raise InputError(f"cannot read R value {part!r}") from None
    if not out:
        raise InputError("no R values given")
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hameig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("verify", "check the positivity hypotheses for radius R"),
        ("solve", "compute an eigenpair on the cone sphere of radius R"),
        ("sweep", "compute lambda(R) over a list of radii"),
        ("examples", "list and dump the built-in presets"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--problem", help="preset name (example1|example2|example3) or problem file")
        p.add_argument("--R", nargs="+", default=["1"], help="radius, or several (space/comma separated)")
        p.add_argument("--grid-n", type=int, default=600, help="number of panels (even; default 600)")
        p.add_argument("--tol", type=float, default=1e-11)
        p.add_argument("--max-iter", type=int, default=10000)
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--format", choices=("json", "csv", "text"), default="text")
        if name == "sweep":
            p.add_argument("--no-warm-start", action="store_true",
                           help="solve radii independently (concurrently, HAMEIG_THREADS caps workers)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            problem=args.problem,
            R=_radii(args.R),
            grid_n=args.grid_n,
            tol=args.tol,
            max_iter=args.max_iter,
            output=args.output,
            format=args.format,
            warm_start=not getattr(args, "no_warm_start", False),
        )
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())

"""Eigenpairs on the cone sphere of radius R by normalised fixed-point iteration.

    u^{k+1} = R S(u^k) / ||S(u^k)||,      lambda = R / ||S(u*)||

An independent damped Newton solve of u - lambda S(u) = 0 with the norm
constraint is provided as a cross-check (``solve_newton``).
"""

from __future__ import annotations

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .discrete import DiscreteOperator, Grid, GridPair, operator_for, point_eval
from .problem import BcKind, SystemProblem, cone_of, in_cone

__all__ = [
    "EigenPair",
    "SolverError",
    "DegenerateOperatorError",
    "ConvergenceError",
    "solve",
    "solve_newton",
    "ode_residual",
    "bc_residual",
    "SweepRow",
    "sweep",
]

log = logging.getLogger(__name__)

STALL_WINDOW = 200


class SolverError(RuntimeError):
    pass


class DegenerateOperatorError(SolverError):
    pass


class ConvergenceError(SolverError):
    def __init__(self, message: str, last: GridPair | None = None, oscillation: float | None = None):
        super().__init__(message)
        self.last = last
        self.oscillation = oscillation


@dataclass
class EigenPair:
    lam: float
    u: GridPair
    iterations: int
    integral_residual: float
    ode_residual: float
    bc_residual: tuple[float, float, float, float]
    cone_ok: bool
    cone_margins: tuple[float, float] = (0.0, 0.0)
    damped: bool = False
    cone_violations: int = 0  # iterates that left the cone
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def R(self) -> float:
        return _norm(self.u.u1.values, self.u.u2.values)

    def to_dict(self, include_nodes: bool = True) -> dict:
        d = {
            "lambda": self.lam,
            "R": self.R,
            "iterations": self.iterations,
            "integral_residual": self.integral_residual,
            "ode_residual": self.ode_residual,
            "bc_residual": list(self.bc_residual),
            "cone_ok": self.cone_ok,
            "cone_margins": list(self.cone_margins),
            "cone_violations": self.cone_violations,
            "damped": self.damped,
            "grid_n": self.u.grid.n,
        }
        if include_nodes:
            d["t"] = self.u.grid.nodes.tolist()
            d["u1"] = self.u.u1.values.tolist()
            d["u2"] = self.u.u2.values.tolist()
        return d


def _norm(v1: np.ndarray, v2: np.ndarray) -> float:
    return float(max(np.max(np.abs(v1)), np.max(np.abs(v2))))


def _finish(problem: SystemProblem, op: DiscreteOperator, R: float, v1, v2, iterations: int,
            damped=False, violations=0, history=None) -> EigenPair:
    u = GridPair.from_arrays(op.grid, v1, v2)
    s1, s2 = op.apply(u)
    norm_s = _norm(s1, s2)
    lam = R / norm_s
    residual = _norm(v1 - lam * s1, v2 - lam * s2)
    check = in_cone(u, cone_of(problem), 1e-9 * R)
    pair = EigenPair(lam, u, iterations, residual, 0.0, (0.0,) * 4, check.ok, check.margins,
                     damped, violations, history or [])
    pair.ode_residual = ode_residual(problem, pair)
    pair.bc_residual = bc_residual(problem, pair)
    return pair


def _check_hypotheses(problem: SystemProblem, R: float) -> None:
    from .verifier import verify

    report = verify(problem, R)
    if not report.verdict:
        warnings.warn(
            f"positivity condition not certified at R={R} (min C3 = {report.min_c3:.3g}); "
            "the iteration may still converge",
            stacklevel=3,
        )


def solve(problem: SystemProblem, R: float, grid: Grid | int = 600, tol: float = 1e-11,
          max_iter: int = 10000, u0: GridPair | None = None, check: bool = True) -> EigenPair:
    """Normalised fixed-point iteration on the sphere of radius R.

    Starts from the constant pair (R, R) unless ``u0`` is given (it is rescaled
    to norm R). Stops when successive iterates differ by at most ``tol * R``.
    If the distance stalls for 200 iterations, averaging damping
    ``u <- (u_new + u)/2`` is switched on.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    n = grid.n if isinstance(grid, Grid) else int(grid)
    op = operator_for(problem, n)
    if check:
        _check_hypotheses(problem, R)
    cone = cone_of(problem)
    if u0 is None:
        v1 = np.full(n + 1, float(R))
        v2 = v1.copy()
    else:
        if u0.grid.n != n:
            raise ValueError("initial iterate lives on a different grid")
        scale = R / _norm(u0.u1.values, u0.u2.values)
        v1, v2 = u0.u1.values * scale, u0.u2.values * scale
    damped = False
    violations = 0
    history: list[float] = []
    best, best_at = np.inf, 0
    for k in range(1, max_iter + 1):
        s1, s2 = op.apply_arrays(v1, v2)
        norm_s = _norm(s1, s2)
        if norm_s < 1e-14 * R:
            raise DegenerateOperatorError(f"||S(u)|| = {norm_s:.3g} vanishes on the sphere (iteration {k})")
        w1, w2 = R * s1 / norm_s, R * s2 / norm_s
        if damped:
            w1, w2 = 0.5 * (w1 + v1), 0.5 * (w2 + v2)
            scale = R / _norm(w1, w2)
            w1, w2 = w1 * scale, w2 * scale
        dist = _norm(w1 - v1, w2 - v2)
        history.append(dist)
        if not in_cone(GridPair.from_arrays(op.grid, w1, w2), cone, 1e-9 * R):
            violations += 1
        v1, v2 = w1, w2
        if dist <= tol * R:
            log.debug("converged after %d iterations", k)
            return _finish(problem, op, R, v1, v2, k, damped, violations, history)
        if dist < 0.999 * best:
            best, best_at = dist, k
        elif not damped and k - best_at >= STALL_WINDOW:
            osc = history[-1] - history[-3] if len(history) >= 3 else np.nan
            log.info("iteration stalled at k=%d (period-2 diagnostic %.3g); damping", k, osc)
            damped = True
            best, best_at = dist, k
    osc = _period2(history)
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (last step {history[-1]:.3g}, period-2 gap {osc:.3g})",
        GridPair.from_arrays(op.grid, v1, v2),
        osc,
    )


def _period2(history: list[float]) -> float:
    if len(history) < 3:
        return float("nan")
    return abs(history[-1] - history[-3])


# ---------------------------------------------------------------- Newton cross-check


def _jacobian(op: DiscreteOperator, v1: np.ndarray, v2: np.ndarray, eps: float = 1e-7) -> np.ndarray:
    """dS/du as a (2N, 2N) matrix; F derivatives and functional gradients by central differences."""
    N = op.grid.n + 1
    J = np.zeros((2 * N, 2 * N))
    base = (v1, v2)
    for i in range(2):
        rows = slice(i * N, (i + 1) * N)
        for c in range(2):
            cols = slice(c * N, (c + 1) * N)
            step = eps * np.maximum(1.0, np.abs(base[c]))
            up = [v.copy() for v in base]
            dn = [v.copy() for v in base]
            up[c] = up[c] + step
            dn[c] = dn[c] - step
            dF = (op.nonlinearity(i, *up) - op.nonlinearity(i, *dn)) / (2 * step)
            J[rows, cols] += op.weights[i] * dF[None, :]
        # functional gradients: they only see nodes adjacent to their points
        for c in range(2):
            for j in range(N):
                h = eps * max(1.0, abs(base[c][j]))
                up = [v.copy() for v in base]
                dn = [v.copy() for v in base]
                up[c][j] += h
                dn[c][j] -= h
                Hu, Gu = op.functionals(i, GridPair.from_arrays(op.grid, *up))
                Hd, Gd = op.functionals(i, GridPair.from_arrays(op.grid, *dn))
                dH, dG = (Hu - Hd) / (2 * h), (Gu - Gd) / (2 * h)
                if dH or dG:
                    J[rows, c * N + j] += op.psi0[i] * dH + op.psi1[i] * dG
    return J


def solve_newton(problem: SystemProblem, R: float, grid: Grid | int = 600, tol: float = 1e-12,
                 max_iter: int = 50, lam0: float | None = None, u0: GridPair | None = None) -> tuple[float, GridPair]:
    """Damped Newton on (u - lam S(u), u[k] - R) with k the position of the sup norm.

    Returns ``(lam, u)``. The Jacobian of S is assembled from finite differences
    of F and the functionals; the residual itself is exact.
    """
    n = grid.n if isinstance(grid, Grid) else int(grid)
    op = operator_for(problem, n)
    N = n + 1
    if u0 is None:
        # shape of S on the constant pair; a constant start leaves the norm position undetermined
        s = np.concatenate(op.apply_arrays(np.full(N, float(R)), np.full(N, float(R))))
        x = R * s / np.max(np.abs(s))
    else:
        x = u0.stacked() * (R / _norm(u0.u1.values, u0.u2.values))
    s = np.concatenate(op.apply_arrays(x[:N], x[N:]))
    lam = R / np.max(np.abs(s)) if lam0 is None else lam0
    k = int(np.argmax(np.abs(x)))

    def residual(x, lam, k):
        s = np.concatenate(op.apply_arrays(x[:N], x[N:]))
        return np.concatenate([x - lam * s, [x[k] - R]]), s

    r, s = residual(x, lam, k)
    for it in range(max_iter):
        rn = np.max(np.abs(r))
        if rn <= tol * max(1.0, R):
            if abs(np.max(np.abs(x)) - R) <= 10 * tol * max(1.0, R):
                return lam, GridPair.from_arrays(op.grid, x[:N], x[N:])
            k = int(np.argmax(np.abs(x)))
            r, s = residual(x, lam, k)
            continue
        A = np.zeros((2 * N + 1, 2 * N + 1))
        A[: 2 * N, : 2 * N] = np.eye(2 * N) - lam * _jacobian(op, x[:N], x[N:])
        A[: 2 * N, -1] = -s
        A[-1, k] = 1.0
        delta = np.linalg.solve(A, -r)
        step = 1.0
        while step > 1e-6:
            xt, lt = x + step * delta[:-1], lam + step * delta[-1]
            try:
                rt, st = residual(xt, lt, k)
            except Exception:  # expression domain errors on a trial point
                step *= 0.5
                continue
            if lt > 0 and np.max(np.abs(rt)) < (1 - 1e-4 * step) * rn:
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"Newton line search failed at iteration {it}",
                                   GridPair.from_arrays(op.grid, x[:N], x[N:]))
        x, lam, r, s = xt, lt, rt, st
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations")


# ---------------------------------------------------------------- residual diagnostics


def ode_residual(problem: SystemProblem, pair: EigenPair) -> float:
    """max over interior nodes of |-D2 u_i - lam F_i| (central differences)."""
    grid = pair.u.grid
    h = grid.h
    t = grid.nodes
    v1, v2 = pair.u.u1.values, pair.u.u2.values
    worst = 0.0
    for i, v in enumerate((v1, v2)):
        d2 = (v[:-2] - 2 * v[1:-1] + v[2:]) / h**2
        F = np.broadcast_to(problem.components[i].F(t[1:-1], v1[1:-1], v2[1:-1]), d2.shape)
        worst = max(worst, float(np.max(np.abs(-d2 - pair.lam * F))))
    return worst


def bc_residual(problem: SystemProblem, pair: EigenPair) -> tuple[float, float, float, float]:
    """|LHS - RHS| of the four boundary conditions, ordered (u1 at 0, u1 at 1, u2 at 0, u2 at 1)."""
    u = pair.u
    h = u.grid.h
    lam = pair.lam
    out = []
    for i, comp in enumerate(problem.components):
        v = u[i].values
        H = comp.H(u.u1, u.u2)
        G = comp.G(u.u1, u.u2)
        d0 = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h)
        d1 = (3 * v[-1] - 4 * v[-2] + v[-3]) / (2 * h)
        if comp.bc is BcKind.DIRICHLET0:
            out.append(abs(v[0] - lam * H))
        else:
            out.append(abs(d0 + lam * H))
        p = comp.params
        out.append(abs(float(p.beta) * d1 + point_eval(u[i], float(p.eta)) - lam * G))
    return tuple(float(x) for x in out)


# ---------------------------------------------------------------- sweep


@dataclass
class SweepRow:
    R: float
    lam: float | None
    iterations: int | None
    integral_residual: float | None
    ode_residual: float | None
    cone_ok: bool | None
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "R": self.R,
            "lambda": self.lam,
            "iterations": self.iterations,
            "integral_residual": self.integral_residual,
            "ode_residual": self.ode_residual,
            "cone_ok": self.cone_ok,
            "error": self.error,
        }


def _row(R: float, pair: EigenPair | None, err: Exception | None) -> SweepRow:
    if pair is None:
        return SweepRow(R, None, None, None, None, None, f"{type(err).__name__}: {err}")
    return SweepRow(R, pair.lam, pair.iterations, pair.integral_residual, pair.ode_residual, pair.cone_ok)


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("HAMEIG_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def sweep(problem: SystemProblem, R_values, grid: Grid | int = 600, tol: float = 1e-11,
          max_iter: int = 10000, warm_start: bool = True) -> list[SweepRow]:
    """One solve per R. With warm starts (default) runs sequentially, reusing the
    previous eigenfunction rescaled to the next radius; otherwise radii run
    concurrently on up to HAMEIG_THREADS threads."""
    R_values = [float(R) for R in R_values]
    if any(R <= 0 for R in R_values):
        raise ValueError("radii must be positive")
    if R_values != sorted(R_values):
        raise ValueError("radii must be sorted")

    def one(R, u0):
        try:
            return solve(problem, R, grid, tol, max_iter, u0=u0, check=False), None
        except (SolverError, ArithmeticError, ValueError) as err:
            return None, err

    if warm_start:
        rows, prev = [], None
        for R in R_values:
            pair, err = one(R, prev)
            if pair is not None:
                prev = pair.u
            rows.append(_row(R, pair, err))
        return rows
    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        results = list(pool.map(lambda R: one(R, None), R_values))
    return [_row(R, *res) for R, res in zip(R_values, results)]

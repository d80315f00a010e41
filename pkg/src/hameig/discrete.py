"""Uniform grids, point evaluation and the discretised Hammerstein operator.

The integral term of S_i is approximated Nystrom-style from node values of
F_i. On every panel pair [t_{2k}, t_{2k+2}] F is replaced by its quadratic
interpolant; the kernel is linear in s between the breakpoints s = eta and
s = t, so each panel (split again at eta when eta is not a node) carries a
cubic integrand and Simpson's rule integrates it exactly. The result is a
dense weight matrix W with ``integral(t_j) = W[j] @ F(nodes)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import expr as ex
from .kernels import KernelSet, kernel_set, kernel_value, psi0, psi1
from .problem import SystemProblem, norm_Y

__all__ = [
    "Grid",
    "GridFunction",
    "GridPair",
    "point_eval",
    "simpson_weights",
    "integral_weights",
    "DiscreteOperator",
    "operator_for",
    "apply_S",
    "integral_residual",
]

NODE_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    n: int

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError(f"grid needs an even number of panels >= 2, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n + 1,):
            raise ValueError(f"expected {self.grid.n + 1} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, grid: Grid, f) -> "GridFunction":
        return cls(grid, np.broadcast_to(np.asarray(f(grid.nodes), float), (grid.n + 1,)).copy())

    def __call__(self, x: float) -> float:
        return point_eval(self, x)


@dataclass(frozen=True, eq=False)
class GridPair:
    u1: GridFunction
    u2: GridFunction

    def __post_init__(self):
        if self.u1.grid != self.u2.grid:
            raise ValueError("components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.u1.grid

    @classmethod
    def from_arrays(cls, grid: Grid, v1, v2) -> "GridPair":
        return cls(GridFunction(grid, v1), GridFunction(grid, v2))

    @classmethod
    def constant(cls, grid: Grid, c1: float, c2: float) -> "GridPair":
        return cls.from_arrays(grid, np.full(grid.n + 1, float(c1)), np.full(grid.n + 1, float(c2)))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.u1.values, self.u2.values])

    def __getitem__(self, i: int) -> GridFunction:
        return (self.u1, self.u2)[i]


def point_eval(f: GridFunction, x: float) -> float:
    """Node value when x is (within 1e-14 of) a node, else linear interpolation."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"evaluation point {x} outside [0, 1]")
    n = f.grid.n
    pos = x * n
    k = round(pos)
    if abs(pos - k) <= NODE_TOL * n:
        return float(f.values[k])
    k = min(int(np.floor(pos)), n - 1)
    w = pos - k
    return float((1.0 - w) * f.values[k] + w * f.values[k + 1])


def simpson_weights(n: int) -> np.ndarray:
    """Composite Simpson weights on the uniform grid with n panels."""
    if n < 2 or n % 2:
        raise ValueError("Simpson's rule needs an even panel count")
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * n)


def _lagrange3(x: np.ndarray, x0: np.ndarray, h: float) -> np.ndarray:
    """Quadratic Lagrange basis on nodes x0, x0+h, x0+2h evaluated at x; shape (..., 3)."""
    r = (x - x0) / h
    return np.stack([(r - 1) * (r - 2) / 2, -r * (r - 2), r * (r - 1) / 2], axis=-1)


def integral_weights(ks: KernelSet, grid: Grid, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Matrix W with ``W @ f(nodes)`` approximating ``int_lo^hi K(t_j, s) f(s) ds``."""
    n, h = grid.n, grid.h
    nodes = grid.nodes
    eta = ks.eta
    starts, ends, pair0 = [], [], []
    for k in range(n):
        p, q = nodes[k], nodes[k + 1]
        p, q = max(p, lo), min(q, hi)
        if q <= p:
            continue
        cuts = [p, *(x for x in (eta,) if p + NODE_TOL < x < q - NODE_TOL), q]
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            starts.append(x0)
            ends.append(x1)
            pair0.append(2 * (k // 2))
    x0 = np.asarray(starts)
    x1 = np.asarray(ends)
    base = np.asarray(pair0)
    pts = np.stack([x0, 0.5 * (x0 + x1), x1], axis=1)  # (pieces, 3)
    rule = np.array([1.0, 4.0, 1.0]) / 6.0
    L = _lagrange3(pts, nodes[base][:, None], h)  # (pieces, 3 pts, 3 basis)
    Kv = kernel_value(ks, nodes[:, None, None], np.clip(pts, 0.0, 1.0)[None])  # (N, pieces, 3)
    # per piece and basis: sum over points of rule * K * L, scaled by length
    contrib = np.einsum("jpk,pkq,k->jpq", Kv, L, rule) * (x1 - x0)[None, :, None]
    W = np.zeros((n + 1, n + 1))
    for q in range(3):
        cols = base + q
        np.add.at(W.T, cols, contrib[:, :, q].T)
    return W


class DiscreteOperator:
    """S discretised on a fixed grid; weights are built once."""

    def __init__(self, problem: SystemProblem, grid: Grid):
        self.problem = problem
        self.grid = grid
        self.kernels = tuple(kernel_set(c.bc, c.params) for c in problem.components)
        t = grid.nodes
        self.weights = tuple(integral_weights(ks, grid) for ks in self.kernels)
        self.psi0 = tuple(np.asarray(psi0(ks, t), float) for ks in self.kernels)
        self.psi1 = tuple(np.asarray(psi1(ks, t), float) for ks in self.kernels)

    def nonlinearity(self, i: int, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
        t = self.grid.nodes
        try:
            vals = self.problem.components[i].F(t, v1, v2)
        except ex.EvalError as err:
            raise ex.EvalError(f"F{i + 1}: {err}") from None
        return np.broadcast_to(np.asarray(vals, float), t.shape)

    def functionals(self, i: int, u: GridPair) -> tuple[float, float]:
        comp = self.problem.components[i]
        try:
            return comp.H(u.u1, u.u2), comp.G(u.u1, u.u2)
        except ex.EvalError as err:
            raise ex.EvalError(f"H{i + 1}/G{i + 1}: {err}") from None

    def apply_arrays(self, v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = GridPair.from_arrays(self.grid, v1, v2)
        return self.apply(u)

    def apply(self, u: GridPair) -> tuple[np.ndarray, np.ndarray]:
        if u.grid != self.grid:
            raise ValueError("grid mismatch")
        v1, v2 = u.u1.values, u.u2.values
        out = []
        for i in range(2):
            H, G = self.functionals(i, u)
            f = self.nonlinearity(i, v1, v2)
            out.append(self.psi0[i] * H + self.psi1[i] * G + self.weights[i] @ f)
        return out[0], out[1]


@lru_cache(maxsize=16)
def operator_for(problem: SystemProblem, n: int) -> DiscreteOperator:
    return DiscreteOperator(problem, Grid(n))


def apply_S(problem: SystemProblem, u: GridPair) -> GridPair:
    """S(u) sampled at the nodes of ``u``'s grid."""
    s1, s2 = operator_for(problem, u.grid.n).apply(u)
    return GridPair.from_arrays(u.grid, s1, s2)


def integral_residual(problem: SystemProblem, lam: float, u: GridPair) -> float:
    """||u - lam S(u)||_Y on the grid."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    s = apply_S(problem, u)
    r = GridPair.from_arrays(u.grid, u.u1.values - lam * s.u1.values, u.u2.values - lam * s.u2.values)
    return norm_Y(r)

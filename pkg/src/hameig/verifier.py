"""Numerical certificates for the hypotheses of the cone eigenvalue theorem.

For each component i the report carries a constant lower bound gamma for F_i
on [a_i,b_i] x box, lower bounds zeta_H, zeta_G for the functionals on the
cone sphere, and the left-hand side

    sup_{t in [a_i,b_i]} psi0(t) zeta_H + psi1(t) zeta_G + gamma int_{a_i}^{b_i} K(t,s) ds,

whose positivity (for both i) gives inf ||S|| > 0 on the sphere of radius R.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from numbers import Real

import numpy as np

from . import expr as ex
from .discrete import Grid, integral_weights
from .kernels import KernelSet, kernel_integral, kernel_set, kernel_value, phi_upper, psi0, psi1
from .presets import PRESETS
from .problem import ConeSpec, Functional, Nonlinearity, SystemProblem, cone_of, validate

__all__ = [
    "KernelBoundCheck",
    "Bound",
    "ComponentReport",
    "VerificationReport",
    "VerifyOptions",
    "check_kernel_bounds",
    "gamma_lower",
    "zeta_lower",
    "c3_value",
    "verify",
]

SLACK_TOL = 1e-12
DEGENERATE_C = 1e-6


@dataclass(frozen=True)
class KernelBoundCheck:
    d3_upper: float  # min of Phi(s) - K(t,s)
    d3_lower: float  # min of K(t,s) - c Phi(s), t in [a,b]
    d4_psi0: float
    d4_psi1: float
    degenerate: bool

    @property
    def d3_ok(self) -> bool:
        return min(self.d3_upper, self.d3_lower) >= -SLACK_TOL

    @property
    def d4_ok(self) -> bool:
        return min(self.d4_psi0, self.d4_psi1) >= -SLACK_TOL

    @property
    def ok(self) -> bool:
        return self.d3_ok and self.d4_ok

    @property
    def slack(self) -> float:
        return min(self.d3_upper, self.d3_lower, self.d4_psi0, self.d4_psi1)


def check_kernel_bounds(ks: KernelSet, m: int = 200) -> KernelBoundCheck:
    """Sample the envelope and positivity bounds on an m x m grid."""
    if m < 50:
        raise ValueError("use at least 50 samples per axis")
    a, b = float(ks.params.a), float(ks.params.b)
    t_all = np.linspace(0.0, 1.0, m)
    t_ab = np.linspace(a, b, m)
    s = np.linspace(0.0, 1.0, m)
    phi = phi_upper(ks, s)
    upper = np.min(phi[None, :] - kernel_value(ks, t_all[:, None], s[None, :]))
    lower = np.min(kernel_value(ks, t_ab[:, None], s[None, :]) - float(ks.c) * phi[None, :])
    d4 = []
    for psi, c in ((psi0, ks.c0), (psi1, ks.c1)):
        norm = np.max(psi(ks, t_all))
        d4.append(float(np.min(psi(ks, t_ab)) - float(c) * norm))
    return KernelBoundCheck(float(upper), float(lower), d4[0], d4[1], float(ks.c_tilde) < DEGENERATE_C)


@dataclass(frozen=True)
class Bound:
    value: float
    rigorous: bool


def _box(i: int, cone: ConeSpec, R: float) -> dict[str, tuple[float, float]]:
    a, b = cone.intervals[i - 1]
    c = float(cone.c_tilde[i - 1])
    lo = {k: (c * R if k == i else 0.0) for k in (1, 2)}
    return {"t": (float(a), float(b)), "u1": (lo[1], R), "u2": (lo[2], R)}


def gamma_lower(F: Nonlinearity, i: int, cone: ConeSpec, R: float, m: int = 50) -> Bound:
    """Constant lower bound for F on [a_i,b_i] x prod_k [delta_ik c_i R, R].

    Exact corner value when F is structurally monotone in (t, u1, u2);
    otherwise the minimum over an m^3 sample, flagged non-rigorous.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    box = _box(i, cone, R)
    mono = ex.monotonicity(F.expr)
    if mono is not None:
        corner = {k: (hi if mono.get(k, 0) < 0 else lo) for k, (lo, hi) in box.items()}
        return Bound(float(F(corner["t"], corner["u1"], corner["u2"])), True)
    axes = [np.linspace(lo, hi, m) for lo, hi in box.values()]
    t, u1, u2 = np.meshgrid(*axes, indexing="ij")
    vals = np.broadcast_to(F(t, u1, u2), t.shape)
    return Bound(float(np.min(vals)), False)


def _cone_point_samples(atoms, cone: ConeSpec, R: float, rng, count: int):
    """Point values of sampled cone-sphere elements, including all corners."""
    def ranges(norms):
        out = []
        for comp, p in atoms:
            a, b = cone.intervals[comp - 1]
            inside = float(a) <= p <= float(b)
            lo = float(cone.c_tilde[comp - 1]) * norms[comp - 1] if inside else 0.0
            out.append((lo, norms[comp - 1]))
        return out

    samples = []
    for norms in ((R, R), (R, 0.0), (0.0, R)):
        rg = ranges(norms)
        samples.extend(itertools.product(*rg))
    for _ in range(count):
        norms = [R, R]
        norms[rng.integers(2)] = R * rng.random()
        samples.append(tuple(lo + (hi - lo) * rng.random() for lo, hi in ranges(norms)))
    return samples


def zeta_lower(f: Functional, cone: ConeSpec | None = None, R: float | None = None,
               samples: int = 2000, seed: int = 0) -> Bound:
    """Lower bound for a functional over the cone sphere of radius R.

    Affine nonnegative functionals return their constant term. Expressions that
    are monotone in every point evaluation are evaluated at the lower corner
    (point values 0, or R where decreasing). Anything else falls back to a
    Monte Carlo minimum over sampled cone elements, flagged non-rigorous.
    """
    if f.is_affine:
        return Bound(float(f.constant), True)
    mono = ex.monotonicity(f.expr)
    atoms = sorted((pe.component, pe.point) for pe in ex.point_evals(f.expr))
    if mono is not None and (R is not None or all(v >= 0 for v in mono.values())):
        values = {atom: (R if mono.get(atom, 0) < 0 else 0.0) for atom in atoms}
        return Bound(_eval_at(f, values), True)
    if cone is None or R is None:
        raise ValueError("non-monotone functional needs a cone and a radius for sampling")
    rng = np.random.default_rng(seed)
    best = np.inf
    for vals in _cone_point_samples(atoms, cone, R, rng, samples):
        best = min(best, _eval_at(f, dict(zip(atoms, vals))))
    return Bound(float(best), False)


def _eval_at(f: Functional, values: dict) -> float:
    def comp(k):
        return lambda p: values[(k, p)]
    return float(ex.evaluate(f.expr, {"u1": comp(1), "u2": comp(2)}))


def c3_value(ks: KernelSet, gamma: float, zeta_h: float, zeta_g: float, grid: Grid) -> float:
    """Left side of the positivity condition, maximised over t in [a,b].

    The t samples are the grid nodes inside [a,b] plus both endpoints; the
    s-integral over [a,b] is exact for the piecewise linear kernel.
    """
    a, b = float(ks.params.a), float(ks.params.b)
    nodes = grid.nodes
    inside = np.flatnonzero((nodes >= a) & (nodes <= b))
    W = integral_weights(ks, grid, a, b)
    ones = np.ones(grid.n + 1)
    t = nodes[inside]
    integral = W[inside] @ ones
    vals = list(psi0(ks, t) * zeta_h + psi1(ks, t) * zeta_g + gamma * integral)

    for te in (a, b):
        vals.append(float(psi0(ks, te)) * zeta_h + float(psi1(ks, te)) * zeta_g
                    + gamma * kernel_integral(ks, te, a, b))
    return float(max(vals))


@dataclass
class ComponentReport:
    c: Real
    c0: Real
    c1: Real
    c_tilde: Real
    gamma_min: float
    gamma_rigorous: bool
    zeta_H: float
    zeta_G: float
    zeta_rigorous: bool
    c3_sup: float
    d3_ok: bool
    d4_ok: bool
    kernel_slack: float
    degenerate: bool
    quoted_bound: float | None = None

    @property
    def rigorous(self) -> bool:
        return self.gamma_rigorous and self.zeta_rigorous


@dataclass
class VerificationReport:
    R: float
    components: tuple[ComponentReport, ComponentReport]
    warnings: list[str] = field(default_factory=list)

    @property
    def min_c3(self) -> float:
        return min(c.c3_sup for c in self.components)

    @property
    def verdict(self) -> bool:
        return self.min_c3 > 0 and all(c.d3_ok and c.d4_ok for c in self.components)

    def to_dict(self) -> dict:
        comps = []
        for c in self.components:
            d = asdict(c)
            for k in ("c", "c0", "c1", "c_tilde"):
                d[k] = float(c.__dict__[k])
                d[k + "_exact"] = str(c.__dict__[k])
            d["rigorous"] = c.rigorous
            comps.append(d)
        return {
            "R": float(self.R),
            "components": comps,
            "min_c3": self.min_c3,
            "verdict": self.verdict,
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class VerifyOptions:
    kernel_m: int = 200
    box_m: int = 50
    c3_n: int = 600
    zeta_samples: int = 2000


def _matching_preset(problem: SystemProblem):
    preset = PRESETS.get(problem.name)
    if preset is not None and preset.problem == problem:
        return preset
    return None


def verify(problem: SystemProblem, R: float, opts: VerifyOptions | None = None) -> VerificationReport:
    """Evaluate every machine-checkable hypothesis for radius R."""
    if R <= 0:
        raise ValueError("R must be positive")
    opts = opts or VerifyOptions()
    warnings = list(validate(problem, sample_R=R).warnings)
    cone = cone_of(problem)
    preset = _matching_preset(problem)
    grid = Grid(opts.c3_n)
    comps = []
    for i, comp in enumerate(problem.components, start=1):
        ks = kernel_set(comp.bc, comp.params)
        kb = check_kernel_bounds(ks, opts.kernel_m)
        gamma = gamma_lower(comp.F, i, cone, R, opts.box_m)
        zh = zeta_lower(comp.H, cone, R, opts.zeta_samples)
        zg = zeta_lower(comp.G, cone, R, opts.zeta_samples)
        if not gamma.rigorous:
            warnings.append(f"component {i}: gamma from sampling (F not recognised as monotone)")
        if not (zh.rigorous and zg.rigorous):
            warnings.append(f"component {i}: functional lower bound from sampling")
        if kb.degenerate:
            warnings.append(f"component {i}: cone constant {float(ks.c_tilde):.3g} is nearly degenerate")
        c3 = c3_value(ks, gamma.value, zh.value, zg.value, grid)
        comps.append(
            ComponentReport(
                ks.c, ks.c0, ks.c1, ks.c_tilde,
                gamma.value, gamma.rigorous,
                zh.value, zg.value, zh.rigorous and zg.rigorous,
                c3, kb.d3_ok, kb.d4_ok, kb.slack, kb.degenerate,
                preset.bounds[i - 1](R) if preset else None,
            )
        )
    if preset is not None:
        for i, (quoted, comp) in enumerate(zip(preset.quoted_c_tilde, comps), start=1):
            if quoted != comp.c_tilde:
                warnings.append(
                    f"component {i}: computed c_tilde {comp.c_tilde} differs from quoted {quoted}"
                )
    return VerificationReport(R, tuple(comps), warnings)

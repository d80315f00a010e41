from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hameig.discrete import (
    Grid,
    GridFunction,
    GridPair,
    apply_S,
    integral_residual,
    integral_weights,
    point_eval,
    simpson_weights,
)
from hameig.kernels import kernel_set
from hameig.presets import PRESETS, constant_neumann_problem
from hameig.problem import BcKind, Component, ComponentParams, Nonlinearity, SystemProblem, cone_of, in_cone


def test_grid_validation():
    assert Grid(6).nodes[-1] == 1.0
    for n in (0, 3, 7):
        with pytest.raises(ValueError):
            Grid(n)


def test_point_eval():
    g = Grid(10)
    f = GridFunction.sample(g, lambda t: t**2)
    assert point_eval(f, 0.3) == pytest.approx(0.09, abs=1e-15)
    assert point_eval(f, 0.05) == pytest.approx(0.005)  # chord between 0 and 0.01
    assert f(1.0) == 1.0
    with pytest.raises(ValueError):
        point_eval(f, 1.2)


def test_grid_function_is_read_only():
    f = GridFunction(Grid(4), np.zeros(5))
    with pytest.raises(ValueError):
        f.values[0] = 1.0
    with pytest.raises(ValueError):
        GridFunction(Grid(4), np.zeros(4))


@given(st.floats(0, 1), st.floats(-3, 3), st.floats(-3, 3))
def test_point_eval_exact_on_lines(x, p, q):
    f = GridFunction.sample(Grid(12), lambda t: p + q * t)
    assert point_eval(f, x) == pytest.approx(p + q * x, abs=1e-12)


def test_simpson_weights():
    w = simpson_weights(6)
    t = Grid(6).nodes
    assert w.sum() == pytest.approx(1.0)
    assert w @ t**3 == pytest.approx(0.25)


def test_constant_F_is_exact():
    p = constant_neumann_problem()
    g = Grid(60)
    s = apply_S(p, GridPair.constant(g, 0.3, 0.9))
    w = 0.77 - g.nodes**2 / 2
    np.testing.assert_allclose(s.u1.values, w, rtol=0, atol=1e-13)
    np.testing.assert_allclose(s.u2.values, w, rtol=0, atol=1e-13)


@pytest.mark.parametrize("n", [2, 6, 14])
@pytest.mark.parametrize("eta", [Fr(1, 4), Fr(1, 5), Fr(3, 7)])
def test_constant_F_exact_with_off_node_eta(n, eta):
    for kind in BcKind:
        ks = kernel_set(kind, ComponentParams(Fr(1, 4), eta, Fr(1, 10), Fr(1, 5)))
        t = Grid(n).nodes
        W = integral_weights(ks, Grid(n))
        C = ks.beta + ks.eta**2 / 2
        exact = C - t**2 / 2 if kind is BcKind.NEUMANN0 else C / ks.sigma * t - t**2 / 2
        np.testing.assert_allclose(W.sum(axis=1), exact, atol=1e-13)


def test_example1_at_zero():
    g = Grid(60)
    s = apply_S(PRESETS["example1"].problem, GridPair.constant(g, 0, 0))
    assert s.u1.values[0] == pytest.approx(1 / 3, abs=1e-15)
    assert s.u2.values[0] == pytest.approx(1 / 5, abs=1e-15)


def test_zero_problem_gives_zero():
    comp = Component(BcKind.NEUMANN0, ComponentParams(Fr(1, 4), Fr(1, 4), Fr(1, 6), Fr(1, 3)), Nonlinearity.parse("0"))
    s = apply_S(SystemProblem((comp, comp)), GridPair.constant(Grid(12), 1.0, 2.0))
    assert not s.u1.values.any() and not s.u2.values.any()


def test_quadrature_order():
    from scipy.integrate import quad

    from hameig.kernels import kernel_value

    ks = kernel_set(BcKind.DIRICHLET0, ComponentParams(Fr(1, 4), Fr(1, 5), Fr(1, 10), Fr(1, 5)))
    f = np.exp

    def exact(t):
        pts = sorted({ks.eta, t} - {0.0, 1.0})
        return quad(lambda s: kernel_value(ks, t, s) * f(s), 0, 1, points=pts, epsabs=1e-14, epsrel=1e-14)[0]

    errs = []
    for n in (12, 24, 48):
        g = Grid(n)
        approx = integral_weights(ks, g) @ f(g.nodes)
        ref = np.array([exact(t) for t in g.nodes])
        errs.append(np.max(np.abs(approx - ref)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.5), (errs, rates)


def test_monotone_on_positivity_interval():
    p = PRESETS["example1"].problem
    g = Grid(60)
    rng = np.random.default_rng(3)
    mask = (g.nodes >= 1 / 6) & (g.nodes <= 1 / 3)
    for _ in range(20):
        v = rng.random((2, g.n + 1))
        bump = rng.random((2, g.n + 1)) * 0.5
        lo = apply_S(p, GridPair.from_arrays(g, *v))
        hi = apply_S(p, GridPair.from_arrays(g, *(v + bump)))
        for i in range(2):
            assert np.all(hi[i].values[mask] >= lo[i].values[mask] - 1e-14)


def _random_cone_pairs(cone, grid, rng, count):
    t = grid.nodes
    for _ in range(count):
        comps = []
        for c in cone.c_tilde:
            # positive concave profile plus a floor that keeps the strip bound
            peak = rng.random()
            v = 1 - (t - peak) ** 2 * rng.random() + float(c)
            comps.append(v)
        yield GridPair.from_arrays(grid, *comps)


@pytest.mark.xfail(
    strict=True,
    reason="S does not preserve the cone for example2: the Neumann kernel and psi0 "
    "are negative for t near 1, so S(u) can dip below zero",
)
def test_cone_invariance_example2():
    p = PRESETS["example2"].problem
    g = Grid(60)
    cone = cone_of(p)
    rng = np.random.default_rng(0)
    for u in _random_cone_pairs(cone, g, rng, 10):
        assert in_cone(u, cone)
        assert in_cone(apply_S(p, u), cone)


def test_integral_residual():
    p = constant_neumann_problem()
    g = Grid(60)
    w = (0.77 - g.nodes**2 / 2) / 0.77
    u = GridPair.from_arrays(g, w, w)
    assert integral_residual(p, 1 / 0.77, u) < 1e-13
    zero = GridPair.constant(g, 0, 0)
    assert integral_residual(p, 1.0, zero) == pytest.approx(0.77)
    with pytest.raises(ValueError):
        integral_residual(p, 0.0, u)

from fractions import Fraction as Fr

import numpy as np
import pytest

from hameig.discrete import Grid
from hameig.kernels import kernel_set
from hameig.presets import PRESETS
from hameig.problem import (
    BcKind,
    Component,
    ComponentParams,
    Functional,
    Nonlinearity,
    SystemProblem,
    cone_of,
)
from hameig import expr as ex
from hameig.verifier import VerifyOptions, c3_value, gamma_lower, verify, zeta_lower

EX1 = PRESETS["example1"].problem
EX2 = PRESETS["example2"].problem


@pytest.mark.parametrize("R", [0.5, 1.0, 10.0])
def test_gamma_example1(R):
    cone = cone_of(EX1)
    g = gamma_lower(EX1.components[0].F, 1, cone, R)
    assert g.rigorous
    assert g.value == pytest.approx((R / 12 + 2) / 2)
    g2 = gamma_lower(EX1.components[1].F, 2, cone, R)
    assert g2.value == pytest.approx(((2 / 21 * R) ** 2 + 1) / 2)


@pytest.mark.parametrize("R", [0.5, 1.0, 10.0])
def test_gamma_example2_cubic(R):
    g = gamma_lower(EX2.components[1].F, 2, cone_of(EX2), R)
    assert g.rigorous
    assert g.value == pytest.approx((3 / 7 * R) ** 3 + 2)


def test_gamma_sampled_for_non_monotone_F():
    g = gamma_lower(EX2.components[0].F, 1, cone_of(EX2), 1.0)
    assert not g.rigorous
    assert g.value == pytest.approx((1 / 3) ** 2 + 1)


def test_gamma_decreasing_uses_upper_corner():
    F = Nonlinearity.parse("2 - u1/4")
    g = gamma_lower(F, 1, cone_of(EX1), 4.0)
    assert g.rigorous and g.value == pytest.approx(1.0)


def test_zeta():
    c1 = EX1.components[0]
    assert zeta_lower(c1.H).value == pytest.approx(1 / 3)
    assert zeta_lower(c1.G, cone_of(EX1), 1.0).value == 0.0
    assert zeta_lower(EX1.components[1].H).value == pytest.approx(1 / 5)
    zg = zeta_lower(EX2.components[0].G, cone_of(EX2), 1.0)
    assert zg.rigorous and zg.value == pytest.approx(1 / 5)


def test_zeta_sampled_is_upper_estimate_of_infimum():
    f = Functional(expr=ex.parse("(u1(1/4) - 1/2)^2 + 1/10", ex.Context.FUNCTIONAL))
    z = zeta_lower(f, cone_of(EX1), 1.0)
    assert not z.rigorous
    assert 0.1 <= z.value < 0.1 + 1e-3


def test_c3_against_quadrature():
    from oracles import kernel_integral_quad
    from hameig.kernels import psi0, psi1

    comp = EX2.components[1]
    ks = kernel_set(comp.bc, comp.params)
    gamma, zh, zg = 2.5, 0.1, 1 / 6
    best = max(
        float(psi0(ks, t)) * zh + float(psi1(ks, t)) * zg + gamma * kernel_integral_quad(ks, t, 1 / 6, 1 / 3)
        for t in np.linspace(1 / 6, 1 / 3, 101)
    )
    assert c3_value(ks, gamma, zh, zg, Grid(600)) == pytest.approx(best, abs=1e-12)


def test_c3_example1_first_component_exact():
    """Hand value: the max over [1/6,1/3] sits at t = 1/6, giving 2/9 + (25/24)(13/864)."""
    rep = verify(EX1, 1.0)
    exact = 4933 / 20736
    assert rep.components[0].c3_sup == pytest.approx(exact, abs=1e-13)
    # the closed-form estimate stored with the preset overshoots the true supremum
    assert rep.components[0].quoted_bound > exact


@pytest.mark.parametrize("name", list(PRESETS))
@pytest.mark.parametrize("R", [0.5, 1.0, 10.0])
def test_presets_verify(name, R):
    rep = verify(PRESETS[name].problem, R)
    assert rep.verdict
    assert all(c.d3_ok and c.d4_ok for c in rep.components)


def test_quoted_constant_discrepancy_warned():
    rep = verify(EX1, 1.0)
    assert any("2/21" in w and "1/9" in w for w in rep.warnings)
    assert rep.components[1].c_tilde == Fr(2, 21)


def test_zero_problem_is_rejected():
    comp = Component(BcKind.NEUMANN0, ComponentParams(Fr(1, 4), Fr(1, 4), Fr(1, 6), Fr(1, 3)), Nonlinearity.parse("0"))
    rep = verify(SystemProblem((comp, comp)), 1.0)
    assert not rep.verdict
    assert rep.min_c3 == 0.0


@pytest.mark.parametrize("name", list(PRESETS))
def test_c3_nondecreasing_in_R(name):
    vals = [verify(PRESETS[name].problem, R).min_c3 for R in (0.5, 1, 2, 5, 10)]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))


def test_refinement_stable():
    a = verify(EX2, 1.0, VerifyOptions(kernel_m=100, box_m=30))
    b = verify(EX2, 1.0, VerifyOptions(kernel_m=400, box_m=80))
    assert a.verdict == b.verdict
    for ca, cb in zip(a.components, b.components):
        assert ca.c3_sup == pytest.approx(cb.c3_sup, rel=1e-6)


def test_near_degenerate_flag():
    comp = Component(
        BcKind.DIRICHLET0, ComponentParams(Fr(1, 4), Fr(1, 4), Fr(1, 10**7), Fr(1, 3)), Nonlinearity.parse("1")
    )
    rep = verify(SystemProblem((comp, comp)), 1.0)
    assert rep.components[0].degenerate
    assert any("degenerate" in w for w in rep.warnings)


def test_report_dict_exact_strings():
    d = verify(EX1, 1.0).to_dict()
    assert d["components"][1]["c_tilde_exact"] == "2/21"
    assert d["verdict"] is True


def test_negative_radius():
    with pytest.raises(ValueError):
        verify(EX1, 0.0)

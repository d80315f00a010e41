"""The three worked examples, transcribed with F_i(t, u1, u2) argument order.

Each preset also records the constants and closed-form lower estimates quoted
alongside the example, so reports can compare against them. Where a quoted
constant disagrees with what the formulas give, both are kept: ``quoted_*``
holds the figure quoted with the example.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction as Fr
from typing import Callable

from .problem import BcKind, ComponentParams, SystemProblem, dump_problem, load_problem

__all__ = ["Preset", "PRESETS", "get_preset", "preset_names"]


@dataclass(frozen=True)
class Preset:
    name: str
    problem: SystemProblem
    # closed-form lower estimates of the C3 left-hand side, per component, as functions of R
    bounds: tuple[Callable[[float], float], Callable[[float], float]]
    quoted_c_tilde: tuple[Fr, Fr]
    quoted_gamma: tuple[str, str]
    notes: tuple[str, ...] = field(default=())


_EXAMPLE1 = """
name = "example1"

[component.1]
bc = "dirichlet0"
beta = "1/4"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "0.5*(u1 + u2^3 + 2)"
H = { affine = [[1, "1/3", "1/12"], [2, "1", "1/12"]], const = "1/3" }
G = { expr = "0.5*sqrt(u1(1/6)) + sqrt(2)/20*u2(1/5)^3" }

[component.2]
bc = "dirichlet0"
beta = "1/3"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "0.5*(u1^2 + u2^2 + 1)"
H = { affine = [[1, "1/3", "1/6"], [2, "1", "1/10"]], const = "1/5" }
G = { affine = [[1, "1/3", "1"], [2, "1/3", "1"]], const = "0" }
"""

# the second condition at t = 1 is printed for u1; beta = 1/3 belongs to u2
_EXAMPLE2 = """
name = "example2"

[component.1]
bc = "neumann0"
beta = "1/4"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "u1^2 + sin(u2)^2 + 1"
H = { affine = [[1, "1", "1/10"], [2, "1", "1/10"]], const = "1/5" }
G = { expr = "1/4*sqrt(u1(1/4)) + 1/8*u2(1)^2 + 1/5" }

[component.2]
bc = "neumann0"
beta = "1/3"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "exp(u1) + u2^3 + 1"
H = { affine = [[1, "1/2", "1/10"], [2, "1", "1/20"]], const = "1/10" }
G = { affine = [[1, "1/3", "1/6"], [2, "1/4", "1/6"]], const = "1/6" }
"""

_EXAMPLE3 = """
name = "example3"

[component.1]
bc = "neumann0"
beta = "1/4"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "u1^2 + sin(u2)^2 + 1"
H = { affine = [[1, "1", "1/10"], [2, "1", "1/10"]], const = "1/5" }
G = { expr = "1/4*sqrt(u1(1/4)) + 1/8*u2(1)^2 + 1/5" }

[component.2]
bc = "dirichlet0"
beta = "1/3"
eta = "1/4"
a = "1/6"
b = "1/3"
F = "0.5*(u1^2 + u2^2 + 1)"
H = { affine = [[1, "1/3", "1/6"], [2, "1", "1/10"]], const = "1/5" }
G = { affine = [[1, "1/3", "1"], [2, "1/3", "1"]], const = "0" }
"""


def _ex1_bound1(R):
    return 5 / 18 + (R + 2) / 3456


def _ex1_bound2(R):
    return 4 / 35 + 3 * (R**2 + 1) / 17496


def _ex2_bound1(R):
    return 7 / 30 + (R**2 + 9) / 324


def _ex2_bound2(R):
    return 37 / 210 + (9 * R**2 + 98) / 1372


PRESETS: dict[str, Preset] = {
    "example1": Preset(
        "example1",
        load_problem(_EXAMPLE1),
        (_ex1_bound1, _ex1_bound2),
        (Fr(1, 12), Fr(1, 9)),
        ("(c1*R + 2)/2", "((c2*R)^2 + 1)/2"),
        ("quoted c_tilde_2 = 1/9; the cone-constant formulas give 2/21",),
    ),
    "example2": Preset(
        "example2",
        load_problem(_EXAMPLE2),
        (_ex2_bound1, _ex2_bound2),
        (Fr(1, 3), Fr(3, 7)),
        ("(c1*R)^2 + 1", "(c2*R)^2 + 2"),
        (
            "quoted gamma_2 uses a square although F2 contains u2^3; corner value is (c2*R)^3 + 2",
            "fourth boundary line printed for u1, transcribed as the u2 condition",
        ),
    ),
    "example3": Preset(
        "example3",
        load_problem(_EXAMPLE3),
        (_ex2_bound1, _ex1_bound2),
        (Fr(1, 3), Fr(1, 9)),
        ("(c1*R)^2 + 1", "((c2*R)^2 + 1)/2"),
        ("quoted c_tilde_2 = 1/9; the cone-constant formulas give 2/21",),
    ),
}


def preset_names() -> list[str]:
    return list(PRESETS)


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def preset_text(name: str) -> str:
    return dump_problem(get_preset(name).problem)


def constant_neumann_problem(beta=Fr(3, 4), eta=Fr(1, 5), a=Fr(1, 6), b=Fr(1, 3)) -> SystemProblem:
    """F = 1, H = G = 0, Neumann at zero in both components (closed-form test case)."""
    from .problem import Component, Nonlinearity

    comp = Component(BcKind.NEUMANN0, ComponentParams(beta, eta, a, b), Nonlinearity.parse("1"))
    return SystemProblem((comp, comp), "constant_neumann")

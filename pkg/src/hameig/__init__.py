"""Eigenvalues of coupled thermostat-type systems via Hammerstein integral equations."""

from .discrete import Grid, GridFunction, GridPair, apply_S, integral_residual, point_eval
from .eigensolver import EigenPair, solve, solve_newton, sweep
from .kernels import cone_constants, kernel_set
from .presets import PRESETS, get_preset
from .problem import (
    BcKind,
    ComponentParams,
    SystemProblem,
    dump_problem,
    in_cone,
    load_problem,
    norm_Y,
    validate,
)
from .verifier import verify

__all__ = [
    "BcKind",
    "ComponentParams",
    "EigenPair",
    "Grid",
    "GridFunction",
    "GridPair",
    "PRESETS",
    "SystemProblem",
    "apply_S",
    "cone_constants",
    "dump_problem",
    "get_preset",
    "in_cone",
    "integral_residual",
    "kernel_set",
    "load_problem",
    "norm_Y",
    "point_eval",
    "solve",
    "solve_newton",
    "sweep",
    "validate",
    "verify",
]

__version__ = "0.1.0"

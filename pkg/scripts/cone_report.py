"""Cone margins of the computed eigenfunctions and of S applied to sampled cone elements.

A negative margin means the function leaves the cone: either its minimum is
negative or its minimum over [a_i, b_i] falls below c_i times its sup norm.
"""

import argparse

import numpy as np

from hameig.discrete import Grid, GridPair, apply_S
from hameig.eigensolver import SolverError, solve
from hameig.presets import PRESETS
from hameig.problem import cone_of, in_cone


def sample_cone(cone, grid, rng):
    t = grid.nodes
    comps = []
    for c in cone.c_tilde:
        peak = rng.random()
        comps.append(1 - (t - peak) ** 2 * rng.random() + float(c))
    return GridPair.from_arrays(grid, *comps)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R", type=float, nargs="*", default=[0.5, 1.0, 10.0])
    ap.add_argument("--n", type=int, default=600)
    ap.add_argument("--samples", type=int, default=200)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    for name, preset in PRESETS.items():
        p = preset.problem
        cone = cone_of(p)
        print(f"\n{name}: c_tilde = {tuple(str(c) for c in cone.c_tilde)}")
        for R in args.R:
            try:
                pair = solve(p, R, args.n, check=False)
            except SolverError as err:
                print(f"  R = {R:<6g} no eigenpair found: {err}")
                continue
            m1, m2 = pair.cone_margins
            print(f"  R = {R:<6g} lambda = {pair.lam:.10f}  margins ({m1:+.4f}, {m2:+.4f})  "
                  f"iterates outside cone: {pair.cone_violations}/{pair.iterations}")
        g = Grid(120)
        kept = sum(bool(in_cone(apply_S(p, sample_cone(cone, g, rng)), cone)) for _ in range(args.samples))
        print(f"  S maps {kept}/{args.samples} sampled cone elements back into the cone")


if __name__ == "__main__":
    main()

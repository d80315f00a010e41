"""Grid refinement for each preset at fixed R.

Prints lambda(n), the difference to the finest grid, the observed order of the
lambda sequence, and the ratio of ODE residuals between successive grids
(second-order differencing puts it near 4).
"""

import argparse

import numpy as np

from hameig.eigensolver import solve
from hameig.presets import PRESETS


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--grids", type=int, nargs="*", default=[30, 60, 120, 240, 480, 960])
    args = ap.parse_args()

    for name, preset in PRESETS.items():
        pairs = [solve(preset.problem, args.R, n, check=False) for n in args.grids]
        lams = np.array([p.lam for p in pairs])
        ref = lams[-1]
        print(f"\n{name}, R = {args.R:g}")
        print(f"{'n':>6} {'lambda':>20} {'|lam - lam_ref|':>16} {'order':>7} {'ode res':>10} {'ratio':>6}")
        for k, (n, p) in enumerate(zip(args.grids, pairs)):
            order = ratio = ""
            if 1 <= k < len(pairs) - 1:
                d0, d1 = abs(lams[k - 1] - ref), abs(lams[k] - ref)
                if d1 > 0:
                    order = f"{np.log2(d0 / d1):.2f}"
            if k:
                ratio = f"{pairs[k - 1].ode_residual / p.ode_residual:.2f}"
            print(f"{n:>6} {p.lam:>20.15f} {abs(p.lam - ref):>16.3e} {order:>7} {p.ode_residual:>10.2e} {ratio:>6}")


if __name__ == "__main__":
    main()

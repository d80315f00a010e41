"""Trace lambda(R) for the built-in presets and write one CSV per preset.

    python scripts/spectrum_curve.py --out results --n 240 --rmin 0.05 --rmax 20 --count 40
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from hameig.presets import PRESETS
from hameig.eigensolver import sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--n", type=int, default=240)
    ap.add_argument("--rmin", type=float, default=0.05)
    ap.add_argument("--rmax", type=float, default=20.0)
    ap.add_argument("--count", type=int, default=40)
    ap.add_argument("--presets", nargs="*", default=list(PRESETS))
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    radii = np.geomspace(args.rmin, args.rmax, args.count)
    for name in args.presets:
        rows = sweep(PRESETS[name].problem, radii, args.n)
        path = out / f"spectrum_{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["R", "lambda", "iterations", "integral_residual", "cone_ok", "error"])
            for r in rows:
                w.writerow([r.R, r.lam, r.iterations, r.integral_residual, r.cone_ok, r.error or ""])
        ok = [r for r in rows if r.error is None]
        lams = [r.lam for r in ok]
        print(f"{name}: {len(ok)}/{len(rows)} solved, lambda in [{min(lams):.4g}, {max(lams):.4g}] -> {path}")


if __name__ == "__main__":
    main()

"""Curves behind the two panels of the relaxation figure, plus the t-scan for
the window in which the alpha = 2 density has two maxima.

    python scripts/fig1.py --out-dir results/fig1
"""

import argparse
from pathlib import Path

import numpy as np

from kfeller.cauchy import solve
from kfeller.initial import GammaLike
from kfeller.params import ModelParams


def local_maxima(v, floor=1e-6):
    i = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    return i[v[i] > floor * v.max()]


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out-dir", type=Path, default=Path("results/fig1"))
    ap.add_argument("--k", type=float, default=0.2)
    ap.add_argument("--n", type=int, default=2048)
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)

    x = np.linspace(0.0, 40.0, args.n)
    phi = GammaLike(1.0, 1.0)
    for alpha, tag in ((1.0, "left"), (2.0, "right")):
        p = ModelParams.from_alpha(alpha, 1.0, args.k)
        cols = [x]
        for t in (0.0, 1.0, 2.0, 10.0):
            v = solve(p, phi, t, x).regular_values
            cols.append(v)
            print(f"alpha={alpha:g} t={t:>4g}: argmax {x[np.argmax(v)]:.4f}, "
                  f"maxima at {np.round(x[local_maxima(v)], 3).tolist()}")
        np.savetxt(args.out_dir / f"fig1_{tag}.csv", np.column_stack(cols), delimiter=",",
                   header="x,t0,t1,t2,t10", comments="")

    p2 = ModelParams.from_alpha(2.0, 1.0, args.k)
    rows = []
    for t in np.round(np.arange(0.1, 10.0 + 1e-9, 0.1), 10):
        m = local_maxima(solve(p2, phi, t, x).regular_values)
        rows.append((t, len(m), x[m[0]], x[m[-1]]))
    rows = np.array(rows)
    two = rows[rows[:, 1] >= 2, 0]
    print(f"alpha=2: two local maxima for t in [{two.min():.1f}, {two.max():.1f}]")
    np.savetxt(args.out_dir / "fig1_right_scan.csv", rows, delimiter=",",
               header="t,n_maxima,first_max,last_max", comments="")


if __name__ == "__main__":
    main()

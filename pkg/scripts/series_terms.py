"""How many series terms the regular part needs as t grows (non-integer alpha).

    python scripts/series_terms.py --alpha 1.5 --k 1
"""

import argparse
import math

import numpy as np

from kfeller.green import laguerre_series
from kfeller.params import SeriesConfig, SeriesConvergenceError


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--alpha", type=float, default=1.5)
    ap.add_argument("--k", type=float, default=1.0)
    ap.add_argument("--tol", type=float, default=1e-12)
    args = ap.parse_args()
    cfg = SeriesConfig(rel_tol=args.tol)
    z = args.k * np.linspace(0.0, 20.0 / args.k, 50)
    print(f"{'beta t':>7} {'|q|':>9} {'terms':>7}")
    for bt in (0.1, 0.5, 1, 2, 3, 5, 8, 10):
        q = math.expm1(-bt)
        try:
            _, n = laguerre_series(args.alpha, q, z, 1, 0, cfg)
        except SeriesConvergenceError as e:
            print(f"{bt:7g} {abs(q):9.6f}  > {e.terms} (not converged)")
            continue
        print(f"{bt:7g} {abs(q):9.6f} {n:7d}")


if __name__ == "__main__":
    main()

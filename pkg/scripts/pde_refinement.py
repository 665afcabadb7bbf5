"""Grid-refinement study of the finite-volume solver against the closed form.

    python scripts/pde_refinement.py --alphas 1 2 --t 2 --cells 256 512 1024 2048 4096
"""

import argparse
import math
import time

from kfeller.initial import GammaLike
from kfeller.params import ModelParams
from kfeller.validation import pde_l1_error


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--alphas", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--k", type=float, default=0.2)
    ap.add_argument("--t", type=float, default=2.0)
    ap.add_argument("--cells", type=int, nargs="+", default=[256, 512, 1024, 2048, 4096])
    args = ap.parse_args()

    phi = GammaLike(1.0, 1.0)
    print(f"{'alpha':>6} {'cells':>6} {'L1 error':>11} {'order':>6} {'mass drift':>11} {'sec':>6}")
    for a in args.alphas:
        if not float(a).is_integer():
            raise SystemExit("the closed-form reference needs integer alpha")
        p = ModelParams.from_alpha(a, 1.0, args.k)
        prev = None
        for n in args.cells:
            t0 = time.perf_counter()
            err, st = pde_l1_error(p, phi, args.t, n)
            order = f"{math.log2(prev / err):6.3f}" if prev else "     -"
            print(f"{a:6g} {n:6d} {err:11.3e} {order} {st.mass_drift:11.2e} "
                  f"{time.perf_counter() - t0:6.2f}")
            prev = err


if __name__ == "__main__":
    main()

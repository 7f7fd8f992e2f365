"""Compare the compiled and pure-Python theta lattice sums.

Usage::

    python benchmarks/bench_theta.py [--points 2000] [--repeat 5]

Prints one line per genus with the best wall time of each backend, the
speed-up and the largest relative difference between the two results.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hyperdelta.curve import build_curve
from hyperdelta.periods import period_matrix, reduce_normalized
from hyperdelta.theta import BACKEND, ThetaConfig, evaluator, riemann_characteristic

CURVES = {
    2: [1, 0, 0, 0, 0, -1],
    3: [1, 0, 0, 0, 0, 0, -1, 0],
    4: [1, 0, 0, 0, 0, 0, 0, 0, 0, -1],
}


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--tol", type=float, default=1e-14)
    args = ap.parse_args()
    if BACKEND != "compiled":
        print("compiled kernel not built; run `python setup.py build_ext --inplace` first")
        return
    rng = np.random.default_rng(0)
    print(f"{'genus':>5} {'lattice':>8} {'python s':>10} {'compiled s':>11} {'speed-up':>9} {'max rel diff':>13}")
    for g, coeffs in CURVES.items():
        per = period_matrix(build_curve(coefficients=coeffs))
        ev = evaluator(per.tau, ThetaConfig(args.tol))
        ch = riemann_characteristic(per)
        w = rng.normal(size=(args.points, g)) + 1j * rng.normal(size=(args.points, g))
        wr, _ = reduce_normalized(w, per.tau)
        ev.points(ch, True)
        res = {}
        times = {}
        for b in ("python", "compiled"):
            times[b] = best_time(lambda: res.__setitem__(b, ev.normalized_sum(wr, ch, True, b)),
                                 args.repeat)
        diff = float(np.max(np.abs(res["python"] - res["compiled"]) / np.abs(res["python"])))
        n = len(ev.points(ch, True)[0])
        print(f"{g:>5} {n:>8} {times['python']:>10.4f} {times['compiled']:>11.4f} "
              f"{times['python'] / times['compiled']:>8.2f}x {diff:>13.2e}")


if __name__ == "__main__":
    main()

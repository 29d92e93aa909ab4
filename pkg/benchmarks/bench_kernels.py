"""Compare the numba and numpy backends on the two hot loops.

    python benchmarks/bench_kernels.py [--repeat 5] [--m 400] [--n 8 --mn 24]

Reports the best wall time of each backend (after one warm-up call that
absorbs JIT compilation), the speed-up, and the largest disagreement between
the two outputs relative to the largest output.
"""
import argparse
import time

import numpy as np

from infostab import _kernels
from infostab.domain import GridSpec, grid_d2_array, grid_simplex_array


def best_time(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--m", type=int, default=400, help="defect lattice size")
    ap.add_argument("--h", type=float, default=1e-4)
    ap.add_argument("--n", type=int, default=8, help="simplex dimension for the recursion")
    ap.add_argument("--mn", type=int, default=24, help="simplex lattice denominator")
    args = ap.parse_args(argv)

    if _kernels.NUMBA is None:
        raise SystemExit("numba is not installed; nothing to compare (pip install numba)")

    pts = grid_d2_array(GridSpec(args.m, args.h))
    xs, ys = np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1])
    P = np.ascontiguousarray(grid_simplex_array(args.n, args.mn))
    theta = np.array([1e-3, -2e-3, 5e-4, 0.0, 1e-4, 3e-4])
    c, d, fa, alpha = 1.3, -0.7, -1.0, -1.0

    cases = {
        f"defect sweep ({len(xs)} points)": lambda k: k.defect_terms(xs, ys, alpha, c, d, fa, theta)[0],
        f"defect sup ({len(xs)} points)": lambda k: np.array([k.defect_sup(xs, ys, alpha, c, d, fa, theta)]),
        f"recursion n={args.n} ({len(P)} points)": lambda k: k.recursion(P, alpha, c, d, fa, theta),
    }

    print(f"{'kernel':<36} {'numpy [s]':>11} {'numba [s]':>11} {'speed-up':>9} {'max diff/max':>13}")
    for name, call in cases.items():
        t_np = best_time(lambda: call(_kernels.NUMPY), args.repeat)
        t_nb = best_time(lambda: call(_kernels.NUMBA), args.repeat)
        a, b = call(_kernels.NUMPY), call(_kernels.NUMBA)
        diff = float(np.max(np.abs(a - b)) / np.max(np.abs(a)))
        print(f"{name:<36} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>8.1f}x {diff:>13.2e}")


if __name__ == "__main__":
    main()

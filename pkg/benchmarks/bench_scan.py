"""Time the compiled scan kernel against the pure-Python fallback.

    python3 benchmarks/bench_scan.py [--terms 20000] [--depth 2] [--repeat 3]

Both backends walk the same widening chain over the same indices; the script
reports the best wall time of each, the speedup, and the largest relative
disagreement between their block sums.
"""
import argparse
import time

import gmpy2
from gmpy2 import mpfr

from carleman import _scan

FAMILIES = {"log": gmpy2.exp(1), "factorial": mpfr(1), "constant": mpfr("1.5")}


def best_time(fn, repeat):
    best, out = None, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        dt = time.perf_counter() - t0
        best = dt if best is None or dt < best else best
    return best, out


def max_rel_diff(a, b):
    worst = mpfr(0)
    for row_a, row_b in zip(a, b):
        for la, lb in zip(row_a, row_b):
            for x, y in zip(la, lb):
                worst = max(worst, abs(x - y) / max(abs(y), 1))
    return worst


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", choices=sorted(FAMILIES), default="log")
    ap.add_argument("--terms", type=int, default=20_000)
    ap.add_argument("--depth", type=int, default=2)
    ap.add_argument("--stride", type=int, default=1000)
    ap.add_argument("--start", type=int, default=1)
    ap.add_argument("--precision", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    gmpy2.get_context().precision = args.precision
    nblocks = max(1, args.terms // args.stride)
    # any positive starting accumulators will do for timing
    mu0 = [mpfr(i + 1) for i in range(args.depth)]
    param = FAMILIES[args.family]

    def run(backend):
        return lambda: _scan.scan(args.family, param, args.depth, args.start, args.stride,
                                  nblocks, mu0, backend=backend)

    n = nblocks * args.stride
    print(f"{args.family} chain, depth {args.depth}, {n} terms, best of {args.repeat}")
    t_py, rows_py = best_time(run("python"), args.repeat)
    print(f"  python    {t_py:9.4f} s  ({n / t_py:12.0f} terms/s, {args.precision}-bit MPFR)")
    if "compiled" not in _scan.available_backends():
        print("  compiled  unavailable (kernel not built)")
        return
    t_c, rows_c = best_time(run("compiled"), args.repeat)
    print(f"  compiled  {t_c:9.4f} s  ({n / t_c:12.0f} terms/s, quad precision)")
    print(f"  speedup   {t_py / t_c:9.1f}x")
    print(f"  max relative difference {float(max_rel_diff(rows_c, rows_py)):.2e}")


if __name__ == "__main__":
    main()

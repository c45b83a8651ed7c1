"""Compare the compiled and pure-Python table-fill kernels.

    python benchmarks/bench_kernel.py --sizes 8,16,24 --repeat 3

For each support size a random vector is normed with both backends; the
script checks that certificates agree exactly and prints the best-of-N wall
time per backend and the speedup.
"""
from __future__ import annotations

import argparse
import random
import sys
import time

from bcl import make_space
from bcl.engine import COMPILED_AVAILABLE, norm
from bcl.functionals import SparseVector


def random_vector(n: int, seed: int) -> SparseVector:
    rng = random.Random(seed)
    # a few squared gaps so order-k nodes are in play
    pos, p = [], rng.randint(2, 4)
    for q in range(n):
        pos.append(p)
        p = p * p + 1 if q % 5 == 4 and p < 10**6 else p + rng.randint(1, 3)
    return SparseVector(tuple(pos), tuple(rng.uniform(-2.0, 2.0) for _ in pos))


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="8,16,24,32")
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--theta", default="1/4")
    parser.add_argument("--ps", default="1,3/2,2")
    args = parser.parse_args(argv)
    if not COMPILED_AVAILABLE:
        print("compiled kernel not built; only the pure-Python backend is available",
              file=sys.stderr)
        return 1
    params = make_space(args.theta, args.ps.split(","))
    print(f"{'n':>4} {'python_s':>10} {'cython_s':>10} {'speedup':>8}  identical")
    for n in (int(s) for s in args.sizes.split(",")):
        x = random_vector(n, args.seed + n)
        a = norm(x, params, backend="python", budget=10**12)
        b = norm(x, params, backend="cython", budget=10**12)
        same = a.lower == b.lower and a.upper == b.upper and a.witness == b.witness
        tp = best_time(lambda: norm(x, params, backend="python", budget=10**12), args.repeat)
        tc = best_time(lambda: norm(x, params, backend="cython", budget=10**12), args.repeat)
        print(f"{n:>4} {tp:>10.4f} {tc:>10.4f} {tp / tc:>8.1f}  {'yes' if same else 'NO'}")
        if not same:
            return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

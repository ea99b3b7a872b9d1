"""Time each hot kernel under the numba and pure-numpy backends.

    python3 benchmarks/bench_kernels.py [--n 14000] [--brute-n 20] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from npverify import _kernels
from npverify.satgen import gen_balanced_planted, perturb


def cases(n, brute_n, rng):
    f = gen_balanced_planted(n, 4, seed=0)
    cl = f.zero_based
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    u = rng.random(n)
    outcomes = rng.integers(0, 4, size=n, dtype=np.uint8)
    values = rng.integers(-1, 2, size=n).astype(np.int8)
    small = perturb(gen_balanced_planted(brute_n, 4, seed=1), brute_n, seed=1)
    mid = perturb(gen_balanced_planted(2000, 4, seed=2), 500, seed=2)
    x0 = rng.integers(0, 2, size=2000, dtype=np.uint8)
    walk_u = rng.random(3 * 4096)
    return {
        f"classify_clicks n={n}": lambda k: k.classify_clicks(u, bits, 0.79, 0.012, 0.096),
        f"assign_values n={n}": lambda k: k.assign_values(outcomes, u),
        f"tally_clauses n={n}": lambda k: k.tally_clauses(values, cl),
        f"count_satisfied n={n}": lambda k: k.count_satisfied(bits, cl),
        f"exhaustive_min_unsat n={brute_n}": lambda k: k.exhaustive_min_unsat(small.zero_based, brute_n),
        "hill_climb n=2000": lambda k: k.hill_climb(x0, mid.zero_based),
        "walk_chunk n=2000, 4096 flips": lambda k: k.walk_chunk(x0, mid.zero_based, walk_u, 0.4),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=14000)
    ap.add_argument("--brute-n", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = _kernels.backends()
    if "numba" not in impls:
        print("numba not importable; timing the numpy backend only")
    rng = np.random.default_rng(0)
    names = sorted(impls)
    print(f"{'kernel':40s}" + "".join(f"{b:>14s}" for b in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(args.n, args.brute_n, rng).items():
        times = {}
        for b in names:
            fn(impls[b])  # warm-up, includes JIT load
            times[b] = min(timeit.repeat(lambda: fn(impls[b]), number=1, repeat=args.repeat))
        row = f"{label:40s}" + "".join(f"{times[b] * 1e3:12.3f}ms" for b in names)
        if len(names) > 1:
            row += f"{times['numpy'] / times['numba']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

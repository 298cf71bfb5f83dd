"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 2048] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from spdbridge import _fallback
from spdbridge.graph import generate_random_regular

try:
    from spdbridge import _kernels
except ImportError:
    _kernels = None


def cases(n, seed):
    g = generate_random_regular(n, 6, seed=seed)
    rng = np.random.default_rng(seed)
    src = np.arange(n, dtype=np.int64)
    m = 200_000
    y = np.sort(rng.random(m)) + rng.normal(0, 0.3, m)
    w = rng.integers(1, 50, m).astype(float)
    mind = rng.integers(0, 30, n).astype(np.int64)
    dist = rng.integers(0, 30, n).astype(np.int32)
    return {
        f"bfs_multi all-pairs n={n}": lambda mod: mod.bfs_multi(g.indptr, g.indices, src),
        f"pava m={m}": lambda mod: mod.pava(y, w),
        f"min_update_argmax x1000 n={n}":
            lambda mod: [mod.min_update_argmax(mind.copy(), dist) for _ in range(1000)],
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2048)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    mods = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    if _kernels is None:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':34s}" + "".join(f"{name:>12s}" for name, _ in mods) + "     speedup")
    for label, fn in cases(args.n, args.seed).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for _, mod in mods]
        speed = f"{times[0] / times[1]:10.1f}x" if len(times) == 2 else ""
        print(f"{label:34s}" + "".join(f"{t:11.4f}s" for t in times) + speed)


if __name__ == "__main__":
    main()

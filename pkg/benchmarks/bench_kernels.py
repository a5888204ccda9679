"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Each kernel runs on the same inputs under every available backend; the
results are checked for equality before timings are reported.
"""

import argparse
import timeit

import numpy as np

from plantmatch import kernels
from plantmatch.graph import embedding_order, sample_gnq


def cases(seed):
    rng = np.random.default_rng(seed)
    big = sample_gnq(2000, 0.05, int(rng.integers(2 ** 32)))
    dense = sample_gnq(22, 0.5, int(rng.integers(2 ** 32)))
    host = sample_gnq(60, 0.3, int(rng.integers(2 ** 32)))
    H = sample_gnq(16, 0.4, int(rng.integers(2 ** 32)))
    words = np.ascontiguousarray(dense.rows[:, 0])
    _, back = embedding_order(4, [(0, 1), (1, 2), (2, 3)])
    back = np.asarray(back, dtype=np.int64)
    hwords = np.ascontiguousarray(H.rows[:, 0]).astype(np.uint64)
    return {
        "pair_degrees n=2000": lambda k: k.pair_degrees(big.pairs, big.n),
        "matching_poly n=22": lambda k: k.matching_poly(words, dense.n),
        "perfect_matchings n=22": lambda k: k.perfect_matchings(words, dense.n),
        "count_embeddings P4 in n=60": lambda k: k.count_embeddings(host.rows, host.n, back),
        "connected_signed_sum m=16": lambda k: k.connected_signed_sum(hwords, H.n),
    }


def _same(a, b):
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    header = f"{'kernel':30s}" + "".join(f"{name:>14s}" for name in backends)
    if "cython" in backends:
        header += f"{'speedup':>10s}"
    print(header)
    for label, fn in cases(args.seed).items():
        results = {name: fn(k) for name, k in backends.items()}
        ref = results["python"]
        if not all(_same(ref, r) for r in results.values()):
            raise SystemExit(f"{label}: backends disagree")
        best = {}
        for name, k in backends.items():
            timer = timeit.Timer(lambda: fn(k))
            loops, _ = timer.autorange()
            best[name] = min(timer.repeat(args.repeat, loops)) / loops
        line = f"{label:30s}" + "".join(f"{best[name] * 1e3:12.3f}ms" for name in backends)
        if "cython" in best:
            line += f"{best['python'] / best['cython']:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

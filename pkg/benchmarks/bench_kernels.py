"""Numba kernels against their fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. Each row times the
compiled kernel (after a warm-up call) and the path used when
``CAPCONSENSUS_DISABLE_NUMBA=1``: the numpy twin where one exists, the
interpreted ``py_func`` otherwise. Results are also checked for agreement.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from capconsensus import kernels
from capconsensus.circulant import CirculantSpec, build_circulant
from capconsensus.treesearch import random_bfs_tree


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def tree_case(n, gens, seed=0):
    cg = build_circulant(CirculantSpec(n, gens))
    eu, ev, cl = cg.arrays
    mask = random_bfs_tree(n, eu, ev, np.random.default_rng(seed))
    return eu, ev, cl, mask


def bench_wiener(repeat):
    eu, ev, _, mask = tree_case(200, (1, 7, 19))
    tu, tv = eu[mask], ev[mask]
    fast = lambda: kernels._tree_wiener_loops(200, tu, tv)  # noqa: E731
    slow = lambda: kernels._tree_wiener_numpy(200, tu, tv)  # noqa: E731
    return "tree_wiener n=200", fast, slow, lambda a, b: a == b


def bench_exchanges(repeat):
    eu, ev, _, mask = tree_case(60, (1, 4, 11))
    fast = lambda: kernels._all_exchanges_loops(60, eu, ev, mask)  # noqa: E731
    slow = lambda: kernels._all_exchanges_numpy(60, eu, ev, mask)  # noqa: E731

    def same(a, b):
        key = lambda r: sorted(zip(r[0].tolist(), r[1].tolist(), r[2].tolist()))  # noqa: E731
        return key(a) == key(b)

    return "all_exchanges n=60", fast, slow, same


def bench_search(repeat):
    spec = CirculantSpec(9, (1, 2), (4, 4))
    eu, ev, cl = build_circulant(spec).arrays
    h = np.asarray(spec.h, dtype=np.int64)
    args = (np.int64(9), eu, ev, cl, h, np.int64(1 << 40), True, np.int64(0))
    fast = lambda: kernels._tree_search(*args)  # noqa: E731
    slow = lambda: kernels._tree_search.py_func(*args)  # noqa: E731
    return "tree_search n=9 (interpreted)", fast, slow, lambda a, b: a[0] == b[0]


def bench_em(repeat):
    rng = np.random.default_rng(0)
    n, trials, steps = 5, 8, 20000
    lap = n * np.eye(n) - np.ones((n, n))
    noise = rng.standard_normal((steps, trials, n))
    x0 = rng.standard_normal((trials, n))

    def run(fn):
        x, acc = x0.copy(), np.zeros(trials)
        fn(lap, x, noise, 0.01, 0, acc)
        return acc

    fast = lambda: run(kernels._em_accumulate_loops)  # noqa: E731
    slow = lambda: run(kernels._em_accumulate_numpy)  # noqa: E731
    return "em_accumulate K5 8x20000", fast, slow, lambda a, b: np.allclose(a, b, rtol=1e-9)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if not kernels.HAS_NUMBA:
        print("numba unavailable or disabled; nothing to compare")
        return 1
    print(f"{'kernel':32s} {'numba [s]':>11s} {'fallback [s]':>13s} {'speed-up':>9s}  agree")
    ok = True
    for make in (bench_wiener, bench_exchanges, bench_search, bench_em):
        name, fast, slow, same = make(args.repeat)
        fast()  # compile
        tf, a = best_of(fast, args.repeat)
        ts, b = best_of(slow, args.repeat)
        agree = bool(same(a, b))
        ok &= agree
        print(f"{name:32s} {tf:11.5f} {ts:13.5f} {ts / tf:9.1f}  {agree}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

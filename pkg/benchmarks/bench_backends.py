"""Compare the compiled and pure-Python tree kernels.

Runs tree growth and prediction on identical inputs through both backends,
verifies the outputs match bit for bit, and reports wall-clock timings.

Usage: python3 benchmarks/bench_backends.py [--n 2000] [--p 30] [--trees 20]
"""

import argparse
import time

import numpy as np

from rfvimp._kernels import py_backend

try:
    from rfvimp._kernels import _tree_cy
except ImportError:
    _tree_cy = None


def make_problem(rng, n, p, mtry):
    X = np.ascontiguousarray(rng.normal(size=(n, p)))
    y = (X[:, 0] + rng.normal(size=n) > 0).astype(np.int8)
    y[:2] = [0, 1]
    in_bag = rng.integers(0, n, size=n).astype(np.int32)
    words = rng.integers(0, 1 << 62, size=(2 * n + 1, mtry), dtype=np.int64)
    return X, y, in_bag, words


def bench(backend, problems, mtry, probe_rows):
    t0 = time.perf_counter()
    trees = [backend.build_tree(X, y, in_bag, words, mtry, 1)
             for X, y, in_bag, words in problems]
    t_build = time.perf_counter() - t0
    t0 = time.perf_counter()
    preds = [backend.predict_rows(tree, problems[i][0], probe_rows)
             for i, tree in enumerate(trees)]
    t_predict = time.perf_counter() - t0
    return trees, preds, t_build, t_predict


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--p", type=int, default=30)
    parser.add_argument("--trees", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _tree_cy is None:
        raise SystemExit("compiled extension not built; reinstall the package")

    mtry = max(1, int(np.sqrt(args.p)))
    rng = np.random.default_rng(args.seed)
    problems = [make_problem(rng, args.n, args.p, mtry)
                for _ in range(args.trees)]
    probe_rows = np.arange(args.n, dtype=np.int64)

    trees_py, preds_py, build_py, pred_py = bench(py_backend, problems, mtry,
                                                  probe_rows)
    trees_cy, preds_cy, build_cy, pred_cy = bench(_tree_cy, problems, mtry,
                                                  probe_rows)

    for t1, t2 in zip(trees_py, trees_cy):
        for a, b in zip(t1, t2):
            np.testing.assert_array_equal(a, b)
    for a, b in zip(preds_py, preds_cy):
        np.testing.assert_array_equal(a, b)
    print(f"outputs bitwise identical over {args.trees} trees "
          f"(n={args.n}, p={args.p}, mtry={mtry})")
    print(f"{'stage':<10} {'python':>10} {'cython':>10} {'speedup':>9}")
    print(f"{'build':<10} {build_py:>9.3f}s {build_cy:>9.3f}s "
          f"{build_py / build_cy:>8.1f}x")
    print(f"{'predict':<10} {pred_py:>9.3f}s {pred_cy:>9.3f}s "
          f"{pred_py / pred_cy:>8.1f}x")


if __name__ == "__main__":
    main()

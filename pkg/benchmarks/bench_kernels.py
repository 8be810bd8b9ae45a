"""Compare the numba and numpy kernel paths.

Usage::

    python benchmarks/bench_kernels.py            # kernel micro-benchmarks
    python benchmarks/bench_kernels.py --sweep    # plus a full 1..60 x 5 sweep per backend

The sweep comparison runs each backend in a fresh interpreter because the
backend is fixed at import time by ELMSOL_DISABLE_NUMBA.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from elmsol import _kernels

SWEEP_SNIPPET = """
import time
from elmsol import BACKEND, ElmConfig, SynthSpec, generate, split, sweep
tr, te = split(generate(SynthSpec(5000, 42, 0.05)), 0.75, 42)
sweep(tr, te, [5], 1)  # warm-up (JIT compile / cache load)
t0 = time.perf_counter()
rep = sweep(tr, te, range(1, 61), 5, ElmConfig(seed=42))
print(BACKEND, f"{time.perf_counter() - t0:.3f}", rep.selected_nodes)
"""


def best_of(fn, repeat=7, number=5):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_table():
    rng = np.random.default_rng(0)
    rows = []
    for n_rows, n_hidden in ((3750, 30), (3750, 60), (20000, 60)):
        X = rng.uniform(-1, 1, size=(n_rows, 8))
        W = rng.uniform(-1, 1, size=(n_hidden, 8))
        b = rng.uniform(-1, 1, size=n_hidden)
        rows.append((f"sigmoid_hidden {n_rows}x{n_hidden}",
                     lambda X=X, W=W, b=b: _kernels.sigmoid_hidden_numpy(X, W, b),
                     lambda X=X, W=W, b=b: _kernels.sigmoid_hidden_numba(X, W, b)))
    Q = rng.normal(size=(5000, 8))
    rows.append(("row_sq_norms 5000x8", lambda: _kernels.row_sq_norms_numpy(Q),
                 lambda: _kernels.row_sq_norms_numba(Q)))
    x, y = rng.normal(size=5000), rng.normal(size=5000)
    rows.append(("pearson n=5000", lambda: _kernels.pearson_numpy(x, y), lambda: _kernels.pearson_numba(x, y)))

    print(f"{'kernel':<28} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}")
    for name, f_np, f_nb in rows:
        f_nb()  # compile outside the timing
        t_np, t_nb = best_of(f_np), best_of(f_nb)
        print(f"{name:<28} {t_np * 1e3:>11.3f} {t_nb * 1e3:>11.3f} {t_np / t_nb:>8.2f}")


def sweep_table():
    print(f"\n{'backend':<8} {'sweep 1..60 x 5 [s]':>20} {'selected':>9}")
    for flag in ("0", "1"):
        env = dict(os.environ, ELMSOL_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", SWEEP_SNIPPET], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"{out[0]:<8} {out[1]:>20} {out[2]:>9}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sweep", action="store_true")
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        sys.exit("numba is not importable; nothing to compare")
    kernel_table()
    if args.sweep:
        sweep_table()


if __name__ == "__main__":
    main()

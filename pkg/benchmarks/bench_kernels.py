"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--trial]

``--trial`` also times one full default-size trial under each backend by
re-running this interpreter with ``BORDA_AE_BACKEND`` set.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from borda_ae import _fallback

try:
    from borda_ae import _native
except ImportError:
    _native = None

TRIAL_SNIPPET = (
    "import time; from borda_ae import harness;"
    "c = harness.ExperimentConfig(); t = time.perf_counter();"
    "harness.run_trial(c, 'borda-ae', 0); print(time.perf_counter() - t)"
)


def cases(rng):
    X, Y = rng.random((500, 2)), rng.random((4096, 2))
    inv_ls = np.full(2, 1 / 0.3)
    n, G = 300, 4096
    V = np.ascontiguousarray(rng.standard_normal((n + 1, G)))
    l = rng.standard_normal(n)
    kz = rng.standard_normal(G)
    mean, std = rng.random((64, 64)), rng.random((64, 64))
    env = np.full((64, 64), -np.inf)

    def append(mod):
        m, v = np.zeros(G), np.ones(G) * 10
        mod.grid_append(V, n, l, kz, 1.3, 0.2, m, v)

    return {
        "cross_kernel se 500x4096": lambda mod: mod.cross_kernel(_fallback.SE, X, Y, inv_ls, 1.0),
        "cross_kernel matern52 500x4096":
            lambda mod: mod.cross_kernel(_fallback.MATERN52, X, Y, inv_ls, 1.0),
        "grid_append n=300 G=4096": append,
        "context_widths 64x64": lambda mod: mod.context_widths(mean, std, 2.0),
        "envelope_absorb 64x64": lambda mod: mod.envelope_absorb(env, mean, std, 2.0),
    }


def best_of(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def trial_seconds(backend):
    env = dict(os.environ, BORDA_AE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", TRIAL_SNIPPET], env=env, check=True,
                         capture_output=True, text=True)
    return float(out.stdout.strip())


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--trial", action="store_true")
    args = p.parse_args(argv)
    if _native is None:
        print("compiled extension not built; only the fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'python us':>11s} {'native us':>11s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        py = best_of(lambda: fn(_fallback), args.repeat) * 1e6
        if _native is None:
            print(f"{name:34s} {py:11.1f}")
            continue
        nat = best_of(lambda: fn(_native), args.repeat) * 1e6
        print(f"{name:34s} {py:11.1f} {nat:11.1f} {py / nat:7.2f}x")
    if args.trial:
        py = trial_seconds("python")
        line = f"{'full trial (T=500, 64x64)':34s} {py * 1e6:11.0f}"
        if _native is not None:
            nat = trial_seconds("native")
            line += f" {nat * 1e6:11.0f} {py / nat:7.2f}x"
        print(line)


if __name__ == "__main__":
    main()

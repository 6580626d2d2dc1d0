"""Time the pairwise Kendall's tau kernel on both backends.

Runs the accelerated (numba) and pure-numpy implementations over a grid of
panel sizes, prints per-call timings and the speedup, and verifies that the
two backends agree to rounding. The active default backend follows the
ROBUSTFACTORS_BACKEND environment variable; this script times each backend
explicitly regardless of the default.

Usage: python benchmarks/benchmark_kendall.py [--repeats 5] [--workers N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from robustfactors._kernels import available_backends
from robustfactors.kendall import sample_kendall_tau_parallel

SIZES = [(100, 50), (200, 100), (500, 100), (1000, 200), (2000, 100)]


def time_backend(Y, backend, workers, repeats):
    best = []
    for _ in range(repeats):
        start = time.perf_counter()
        sample_kendall_tau_parallel(Y, workers=workers, backend=backend)
        best.append(time.perf_counter() - start)
    return min(best)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (default 5)")
    parser.add_argument("--workers", type=int, default=None, help="threads for the kernel")
    args = parser.parse_args()

    backends = available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "numba" in backends:
        # warm the JIT cache outside the timed region
        warm = np.random.default_rng(0).standard_normal((50, 10))
        sample_kendall_tau_parallel(warm, backend="numba")

    header = f"{'T':>6} {'N':>5}" + "".join(f"{b + ' (s)':>14}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}{'max |diff|':>12}"
    print(header)

    gen = np.random.default_rng(42)
    for T, N in SIZES:
        Y = gen.standard_normal((T, N))
        times = {b: time_backend(Y, b, args.workers, args.repeats) for b in backends}
        row = f"{T:>6} {N:>5}" + "".join(f"{times[b]:>14.4f}" for b in backends)
        if len(backends) == 2:
            a = sample_kendall_tau_parallel(Y, workers=args.workers, backend=backends[0]).matrix
            b = sample_kendall_tau_parallel(Y, workers=args.workers, backend=backends[1]).matrix
            diff = float(np.abs(a - b).max())
            row += f"{times['numpy'] / times['numba']:>10.1f}{diff:>12.2e}"
            if diff > 1e-12:
                print(row)
                print("backend disagreement exceeds 1e-12")
                return 1
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

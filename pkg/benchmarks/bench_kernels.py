"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--points N] [--repeat R]
"""

import argparse
import math
import timeit

import numpy as np

from lticap import kernels
from lticap.capacity import DetectionScheme, capacity
from lticap.filters import Butterworth4, FilterStage, cascade
from lticap.physics import PhysicalEnvironment


def kernel_cases(n):
    rng = np.random.default_rng(0)
    w = rng.uniform(0.0, 4.0, n)
    h2 = kernels.butterworth_sq(w, 1.0, 1.0, False)
    sn = rng.uniform(0.0, 2.0, n)
    x = np.geomspace(1e-30, 1e15, n)
    stages = np.vstack([h2, 100.0 * h2])
    noise = np.vstack([sn, sn])
    return {
        "g_array": lambda: kernels.g_array(x),
        "butterworth_sq": lambda: kernels.butterworth_sq(w, 1.0, 100.0, False),
        "cascade_accumulate": lambda: kernels.cascade_accumulate(stages, noise),
        "hsw_alloc": lambda: kernels.hsw_alloc(h2, sn, 0.5, 1e-30),
        "classical_alloc": lambda: kernels.classical_alloc(h2, sn, 5.0, 2, 1e-30),
    }


def solve_case():
    env = PhysicalEnvironment.from_wavelength(1550e-9, 300.0)
    shape = Butterworth4.from_hz(20e9)
    ch = cascade([FilterStage(shape, -20.0), FilterStage(shape, 20.0)], env)
    return lambda: [capacity(ch, s, p) for s in DetectionScheme for p in (1e10, 1e12, 1e14)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    previous = kernels.BACKEND
    results = {}
    try:
        for name in backends:
            kernels.set_backend(name)
            cases = kernel_cases(args.points)
            cases["solve (9 points)"] = solve_case()
            for label, fn in cases.items():
                fn()
                reps = 1 if label.startswith("solve") else args.repeat
                results[label, name] = min(timeit.repeat(fn, number=1, repeat=reps))
    finally:
        kernels.set_backend(previous)

    labels = list(dict.fromkeys(k[0] for k in results))
    head = f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        head += f"{'speedup':>10}"
    print(f"{args.points} points, best of {args.repeat} (seconds)")
    print(head)
    for label in labels:
        row = f"{label:<22}" + "".join(f"{results[label, b]:>12.4f}" for b in backends)
        if len(backends) == 2:
            row += f"{results[label, 'python'] / results[label, 'compiled']:>9.1f}x"
        print(row)
    if len(backends) < 2:
        print("compiled extension not built; only the python backend was timed")


if __name__ == "__main__":
    main()

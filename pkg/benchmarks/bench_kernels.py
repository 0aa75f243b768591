"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import timeit

import numpy as np

from gctubes.kernels import compiled_backend, python_backend
from gctubes.sphere import uniform_sphere_samples


def cases(rng):
    samples = uniform_sphere_samples(rng, 250_000)
    poles = uniform_sphere_samples(rng, 64)
    sin_w = math.sin(1 / 64)
    z = rng.uniform(-sin_w, sin_w, 250_000)
    phi = rng.uniform(0, 2 * math.pi, 250_000)
    cands = uniform_sphere_samples(rng, 4096)
    max_dot = 1 - 0.5 * (0.5 / math.sqrt(256)) ** 2
    return {
        "tube_counts (250k x 64)": lambda b: b.tube_counts(samples, poles, sin_w),
        "pair_hits (250k)": lambda b: b.pair_hits(samples, poles[0], poles[1], sin_w),
        "band_hits (250k)": lambda b: b.band_hits(z, phi, math.sin(0.01), math.cos(0.01), sin_w),
        "greedy_fill (4096 -> 256)": lambda b: b.greedy_fill(cands, np.zeros((256, 3)), 0, max_dot, 0, 10**6),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if compiled_backend is None:
        print("compiled extension not built; only the fallback is available")
    backends = [("python", python_backend)] + ([("cython", compiled_backend)] if compiled_backend else [])
    print(f"{'kernel':28s}" + "".join(f"{name:>12s}" for name, _ in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, fn in cases(np.random.default_rng(0)).items():
        times = [min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) for _, b in backends]
        row = f"{label:28s}" + "".join(f"{1e3 * t:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()

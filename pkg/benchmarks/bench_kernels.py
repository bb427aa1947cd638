"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Prints one line per kernel with the best wall time of each backend, the
speedup and the largest relative difference between the two outputs.
"""
import argparse
import timeit

import numpy as np

from kahlerenv.core import available_backends


def workloads(size: int, rng: np.random.Generator):
    x3 = rng.uniform(1e-3, 1.0, (size, 3))
    t3 = rng.uniform(1e-6, 1 - 1e-6, (size, 3))
    return {
        "kahan_sum": (rng.normal(size=size),),
        "psi_moduli": (x3, 4.0),
        "reduction_points": (x3, 2, 2),
        "tian_integrand": (x3 * 10.0, 0.5),
        "tian_sample": (t3, 0.5, 2.0),
        "tian_psi_weights": (t3, 0.5, 2.0),
    }


def max_rel_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(max_rel_diff(u, v) for u, v in zip(a, b))
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available")
    loads = workloads(args.size, np.random.default_rng(args.seed))
    print(f"{'kernel':<18}{'python [ms]':>13}{'cython [ms]':>13}{'speedup':>9}{'max rel diff':>14}")
    for name, call_args in loads.items():
        times, outs = {}, {}
        for label, mod in backends.items():
            fn = getattr(mod, name)
            outs[label] = fn(*call_args)
            times[label] = min(timeit.repeat(lambda: fn(*call_args), number=1,
                                             repeat=args.repeat)) * 1e3
        if "cython" in times:
            print(f"{name:<18}{times['python']:>13.2f}{times['cython']:>13.2f}"
                  f"{times['python'] / times['cython']:>9.1f}"
                  f"{max_rel_diff(outs['cython'], outs['python']):>14.1e}")
        else:
            print(f"{name:<18}{times['python']:>13.2f}{'-':>13}{'-':>9}{'-':>14}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

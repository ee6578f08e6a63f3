"""Compare the compiled kernels with the numpy fallback on the same inputs.

Usage: python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from meanlab import _kernels_py, catalog, kernels

CALLS = {
    "log_ratio": lambda m, a, b, v: kernels.log_ratio(a, b, m),
    "weighted_geometric": lambda m, a, b, v: kernels.weighted_geometric(a, b, v, m),
    "log_mean": lambda m, a, b, v: kernels.log_mean(a, b, m),
    "weighted_log_mean": lambda m, a, b, v: kernels.weighted_log_mean(a, b, v, m),
    "heinz": lambda m, a, b, v: kernels.heinz(a, b, v, m),
    "power_mean_third": lambda m, a, b, v: kernels.power_mean_third(a, b, m),
    "identric": lambda m, a, b, v: kernels.identric(a, b, m),
}

CASES = ("polya", "four_means_order", "wlog_half_mix", "heinz_refined", "conjecture_nested_L")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    a = np.exp(rng.uniform(-13.8, 13.8, args.n))
    b = np.exp(rng.uniform(-13.8, 13.8, args.n))
    v = rng.uniform(0.0, 1.0, args.n)

    if not kernels.compiled_available():
        print("compiled extension not built; only the fallback can be timed")
    impls = [("numpy", _kernels_py)]
    if kernels.compiled_available():
        from meanlab import _kernels
        impls.insert(0, ("cython", _kernels))

    print(f"{args.n} points, best of {args.repeat} runs (ms)")
    print(f"{'kernel':<20}" + "".join(f"{name:>10}" for name, _ in impls) + ("   speedup" if len(impls) > 1 else ""))
    for label, call in CALLS.items():
        times = []
        for _, mod in impls:
            t = min(timeit.repeat(lambda: call(mod, a, b, v), number=1, repeat=args.repeat))
            times.append(1e3 * t)
        row = f"{label:<20}" + "".join(f"{t:>10.1f}" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)
        if len(impls) > 1:
            x, y = (call(mod, a, b, v) for _, mod in impls)
            np.testing.assert_allclose(x, y, rtol=1e-13)

    print()
    print("whole-case batch evaluation (ms)")
    for cid in CASES:
        pts = catalog.sample_domain(cid, args.n, rng)
        times = [1e3 * min(timeit.repeat(lambda: catalog.evaluate_batch(cid, pts, impl=mod), number=1,
                                          repeat=args.repeat)) for _, mod in impls]
        row = f"{cid:<20}" + "".join(f"{t:>10.1f}" for t in times)
        if len(times) > 1:
            row += f"{times[1] / times[0]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

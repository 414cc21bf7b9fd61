"""Time the compiled and pure-Python kernels on the same workloads.

    python benchmarks/bench_kernels.py [--trials 200000] [--repeat 3]
"""
import argparse
import math
import time

import numpy as np

from radar_sg import _pykernels
from radar_sg.channels import mixture_weights

try:
    from radar_sg import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads(trials):
    thresholds = np.array([0.1, 1.0, 10.0])
    mix = mixture_weights(5.0, 2.0, 1.0)
    weights = np.ascontiguousarray(mix.weights)
    xs = np.logspace(-3, 6, 2000)

    def sim(module, kind, kappa, mu, m, alpha, r_max, n=trials):
        def go():
            rng = np.random.Generator(np.random.Philox(1))
            module.simulate_batch(rng, n, 1.0, 1.0, r_max, 0.0, alpha, 1.0, kind, kappa, mu, m, True,
                                  1.0, 1.0, 0.0, thresholds)
        return go

    def hyp(module):
        def go():
            for x in xs:
                module.mixture_hyp_sum(0.25, mix.shapes[0], weights, x)
        return go

    return [
        (f"simulate, Rayleigh, alpha=4, {trials} trials",
         lambda mod: sim(mod, mod.GAMMA, 0.0, 1.0, math.inf, 4.0, 15.0)),
        (f"simulate, shadowed k-mu, alpha=4, {trials} trials",
         lambda mod: sim(mod, mod.NEGBIN_GAMMA, 5.0, 2.0, 1.0, 4.0, 15.0)),
        (f"simulate, Rayleigh, alpha=2, r_max=100, {trials // 10} trials",
         lambda mod: sim(mod, mod.GAMMA, 0.0, 1.0, math.inf, 2.0, 100.0, trials // 10)),
        (f"2F1 mixture sum, {len(weights)} terms x {len(xs)} points", hyp),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled kernels are not built; only the Python backend is timed")
    print(f"{'workload':<52} {'cython s':>10} {'python s':>10} {'speedup':>8}")
    for name, make in workloads(args.trials):
        py = best_of(args.repeat, make(_pykernels))
        if _ckernels is None:
            print(f"{name:<52} {'-':>10} {py:10.3f} {'-':>8}")
            continue
        cy = best_of(args.repeat, make(_ckernels))
        print(f"{name:<52} {cy:10.3f} {py:10.3f} {py / cy:8.1f}x")


if __name__ == "__main__":
    main()

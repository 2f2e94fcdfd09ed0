"""Compare the compiled and pure-Python filter loops.

Usage: python benchmarks/bench_kernels.py [--L 512] [--samples 2000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from zapvss import kernel, signalgen
from zapvss.kernel import FilterSpec
from zapvss.sparsity import MeasureSpec
from zapvss.stepsize import VssParams


def specs(L):
    mu = 0.7 / L
    return {
        "LMS": FilterSpec(mu=mu),
        "ZAP_FIXED_L0": FilterSpec(mu=mu, attractor="L0", beta=50.0, vss=VssParams(kappa0=1e-6)),
        "ZAP_YOU_L1": FilterSpec(mu=mu, attractor="L1", controller="YOU", vss=VssParams(kappa0=5e-5)),
        "ZAP_VSS1_L0": FilterSpec(mu=mu, attractor="L0", beta=50.0, controller="PROPOSED",
                                  measure=MeasureSpec("M3", sigma=50.0), vss=VssParams(gamma=1e-6)),
        "ZAP_VSS2_L1": FilterSpec(mu=mu, attractor="L1", controller="PROPOSED",
                                  measure=MeasureSpec("HOYER"), vss=VssParams(gamma=3e-3)),
    }


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=512)
    ap.add_argument("--samples", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    x = signalgen.white_noise(args.samples, 1)
    h = signalgen.sparse_impulse(args.L, 16, 2)
    d = signalgen.add_noise_at_snr(signalgen.synthesize_echo(x, h), 30.0, 3)
    if not kernel.compiled_available():
        print("compiled extension not built; showing the Python loop only")
    from zapvss._pykernel import run_filter as py_run

    print(f"L={args.L} samples={args.samples}  (microseconds per sample, best of {args.repeat})")
    print(f"{'algorithm':14s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, spec in specs(args.L).items():
        t_py = best_time(lambda: py_run(x, d, h, h, 0, spec), args.repeat)
        if kernel.compiled_available():
            from zapvss._ckernel import run_filter as c_run

            t_c = best_time(lambda: c_run(x, d, h, h, 0, spec), args.repeat)
            print(f"{name:14s} {1e6 * t_c / args.samples:10.2f} {1e6 * t_py / args.samples:10.2f} "
                  f"{t_py / t_c:7.1f}x")
        else:
            print(f"{name:14s} {'-':>10s} {1e6 * t_py / args.samples:10.2f} {'-':>8s}")


if __name__ == "__main__":
    main()

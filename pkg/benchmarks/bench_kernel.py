"""Throughput comparison of the compiled and pure-Python simulation kernels.

Both kernels tabulate the same pre-drawn uniforms, so the timing isolates the
tabulation work and the outputs can be checked for bit equality. Run as

    python3 benchmarks/bench_kernel.py [--subjects N] [--reps R] [--seed S]
"""

import argparse
import time

import numpy as np

from raterbench._backend import available_kernels
from raterbench.generator import rng_stream, scenario_params
from raterbench.truth import Scenario

SCENARIO = Scenario(theta=0.4, p1=0.5, p2=0.3, m1=0.3, m2=0.2, rho_u=0.5, rho_c=0.5)


def time_kernel(kernel, u, params, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = kernel.tabulate(u, params)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--subjects", type=int, default=200, help="subjects per table")
    parser.add_argument("--reps", type=int, default=2000, help="tables per batch")
    parser.add_argument("--seed", type=int, default=0, help="master seed for the uniforms")
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best is kept)")
    args = parser.parse_args()

    u = np.empty((args.reps, args.subjects, 5))
    for rep in range(args.reps):
        rng_stream(args.seed, 0, rep).random(out=u[rep])
    params = scenario_params(SCENARIO)
    subjects = args.reps * args.subjects

    kernels = available_kernels()
    print(f"batch: {args.reps} tables x {args.subjects} subjects = {subjects:,} subjects")
    timings = {}
    results = {}
    for name in sorted(kernels):
        elapsed, counts = time_kernel(kernels[name], u, params, args.repeats)
        timings[name] = elapsed
        results[name] = counts
        print(f"{name:>9}: {elapsed * 1e3:8.2f} ms  ({subjects / elapsed / 1e6:6.2f} M subjects/s)")

    if len(results) == 2:
        python_counts = results["python"]
        compiled_counts = results["compiled"]
        identical = np.array_equal(python_counts, compiled_counts)
        print(f"outputs bit-identical: {identical}")
        print(f"speedup (compiled vs python): {timings['python'] / timings['compiled']:.1f}x")
        if not identical:
            raise SystemExit("kernel outputs diverged")
    else:
        print("compiled kernel not built; timed the python kernel only")


if __name__ == "__main__":
    main()

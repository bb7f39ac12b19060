"""Compare the pure NumPy kernels against the compiled extension.

Runs the same workloads under both backends, checks the outputs are
bit-identical, and reports wall times:

    python benchmarks/bench_kernels.py [--repeat 3]

Representative workloads rather than microbenchmarks: a long
Poisson-binomial convolution, the 1000-driver case-study program, and a
batch of small random integer programs.
"""

import argparse
import time

import numpy as np

from aavr import _kernels
from aavr.rebalance import solve_aavr
from aavr.scenarios import case_study_1
from aavr.sim import opening_snapshot
from aavr.solver import LinearProgram, solve_milp
from aavr.stochastic import pb_pmf


def bench_pb(rng):
    p = rng.random(3000)
    return lambda: pb_pmf(p)


def bench_case_study(_rng):
    snapshot = opening_snapshot(case_study_1())
    return lambda: solve_aavr(snapshot).objective_value


def bench_random_milps(rng):
    programs = []
    for _ in range(40):
        n = int(rng.integers(4, 13))
        m = int(rng.integers(2, 7))
        A = rng.normal(0.0, 1.5, size=(m, n)).round(3)
        x0 = rng.integers(0, 2, size=n).astype(float)
        programs.append(LinearProgram(
            objective=rng.normal(0.0, 3.0, size=n).round(3),
            A=A,
            relations=["<="] * m,
            b=(A @ x0 + rng.uniform(0.0, 1.0, size=m)).round(3),
            lower=np.zeros(n), upper=np.ones(n),
            integrality=np.ones(n, dtype=bool), sense="max"))

    def run():
        return [solve_milp(lp).objective_value for lp in programs]

    return run


WORKLOADS = [
    ("poisson-binomial m=3000", bench_pb),
    ("case-study-1 program", bench_case_study),
    ("40 random MILPs", bench_random_milps),
]


def fastest(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, list):
        return len(a) == len(b) and all(same(x, y) for x, y in zip(a, b))
    return a == b


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timed repetitions per workload (default: 3)")
    args = parser.parse_args()

    backends = _kernels.available_backends()
    print(f"backends available: {', '.join(backends)}")
    if "native" not in backends:
        print("compiled backend not built; timing pure only")

    width = max(len(name) for name, _ in WORKLOADS)
    rng_seed = 12345
    for name, setup in WORKLOADS:
        times = {}
        results = {}
        for backend in backends:
            with _kernels.forced(backend):
                fn = setup(np.random.default_rng(rng_seed))
                times[backend], results[backend] = fastest(fn, args.repeat)
        if "native" in results and not same(results["pure"], results["native"]):
            raise SystemExit(f"FAIL: backends disagree on {name}")
        line = f"{name:<{width}}  pure {times['pure'] * 1e3:9.2f} ms"
        if "native" in times:
            speedup = times["pure"] / times["native"]
            line += (f"  native {times['native'] * 1e3:9.2f} ms"
                     f"  speedup {speedup:5.2f}x")
        print(line)
    print("results identical across backends")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

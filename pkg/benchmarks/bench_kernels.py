"""Benchmark the numba kernel lane against the pure-numpy fallback.

Run as ``python3 benchmarks/bench_kernels.py [--quick]``.  The same
workloads run twice, once with KCONTRACT_NO_NUMBA=1 semantics forced and
once with the compiled lane (when numba is importable); timings are
best-of-repeat wall clock.
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from kcontract import _kernels
from kcontract.compounds import mult_compound
from kcontract.dynamics import integrate
from kcontract.systems import thomas_controlled, thomas_perturbed


def best_of(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_compounds(rng, sizes):
    out = []
    for n, k in sizes:
        m = rng.standard_normal((n, n))
        out.append((f"mult_compound {n}x{n}, k={k}", lambda m=m, k=k: mult_compound(m, k)))
    return out


def bench_integration():
    th = thomas_controlled()
    pert = thomas_perturbed()
    return [
        (
            "thomas_controlled, T=100, tol 1e-10",
            lambda: integrate(th, [-0.5, 0.5, 0.5], (0.0, 100.0), n_out=1001),
        ),
        (
            "thomas_perturbed, T=100, tol 1e-10",
            lambda: integrate(pert, [-0.5, 0.5, 0.5, 1.0], (0.0, 100.0), n_out=1001),
        ),
    ]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads, 1 repeat")
    args = parser.parse_args()
    repeat = 1 if args.quick else 3
    rng = np.random.default_rng(0)
    sizes = [(8, 3), (10, 4)] if args.quick else [(8, 3), (10, 4), (12, 5), (14, 6)]
    workloads = bench_compounds(rng, sizes) + bench_integration()

    lanes = [("numpy ", "1")]
    if _kernels.HAS_NUMBA:
        lanes.append(("numba ", "0"))
    else:
        print("numba not importable; benchmarking the numpy lane only")

    results = {}
    for label, flag in lanes:
        os.environ["KCONTRACT_NO_NUMBA"] = flag
        if flag == "0":
            # trigger JIT compilation outside the timed region
            mult_compound(rng.standard_normal((6, 6)), 3)
            integrate(thomas_controlled(), [0.1, 0.1, 0.1], (0.0, 1.0), n_out=11)
        for name, fn in workloads:
            results[(name, label)] = best_of(fn, repeat)
    os.environ.pop("KCONTRACT_NO_NUMBA", None)

    width = max(len(name) for name, _ in workloads)
    header = f"{'workload':<{width}}  " + "".join(f"{label:>12}" for label, _ in lanes)
    if len(lanes) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, _ in workloads:
        row = f"{name:<{width}}  "
        for label, _ in lanes:
            row += f"{results[(name, label)] * 1e3:>10.2f}ms"
        if len(lanes) == 2:
            ratio = results[(name, 'numpy ')] / max(results[(name, 'numba ')], 1e-12)
            row += f"{ratio:>9.2f}x"
        print(row)


if __name__ == "__main__":
    main()

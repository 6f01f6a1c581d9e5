#!/usr/bin/env python3
"""Time the compiled cycle kernels against the pure-Python fallback.

Runs the same cycle workload (identical substreams, so identical
arithmetic) through qnash._kernels and qnash._kernels_py and reports
arrivals per second plus the speedup.  Also cross-checks that both
implementations return bitwise-identical rows, which is the property
the test suite relies on.

Usage:
  python3 benchmarks/bench_kernels.py [cycles]
"""

import sys
import time

import numpy as np

from qnash import _kernels_py
from qnash.distributions import Exponential, Gamma, ScaledBernoulli, BetaShiftScale
from qnash.rng import Stream, substream

try:
    from qnash import _kernels
except ImportError:
    _kernels = None


def _parallel_args():
    services = [BetaShiftScale(10.0, 10.0, 0.5, 1.0), ScaledBernoulli(0.1, 10.0)]
    inter = Gamma(0.1, 11.0)
    svc_codes = np.array([s.kernel_params()[0] for s in services], dtype=np.int64)
    svc_params = np.array([s.kernel_params()[1] for s in services], dtype=np.float64)
    ia_code, ia_params = inter.kernel_params()
    return dict(
        svc_codes=svc_codes, svc_params=svc_params,
        ia_code=ia_code, ia_params=np.array(ia_params, dtype=np.float64),
        rewards=np.array([5.0, 5.0]), costs=np.array([1.0, 1.0]),
        svc_means=np.array([s.mean() for s in services]),
        probs=np.array([0.4, 0.3, 0.3]), cap=0, hard_limit=10_000_000)


def _run(impl, cycles, seed):
    args = _parallel_args()
    arrivals = 0
    t0 = time.perf_counter()
    for i in range(cycles):
        stream = Stream(substream(seed, 9, i))
        rows, status = impl.simulate_parallel(stream=stream, **args)
        arrivals += rows.shape[0]
    elapsed = time.perf_counter() - t0
    return arrivals, elapsed


def _cross_check(cycles, seed):
    args = _parallel_args()
    for i in range(cycles):
        rows_c, st_c = _kernels.simulate_parallel(
            stream=Stream(substream(seed, 9, i)), **args)
        rows_p, st_p = _kernels_py.simulate_parallel(
            stream=Stream(substream(seed, 9, i)), **args)
        if st_c != st_p or rows_c.shape != rows_p.shape:
            raise AssertionError("implementations disagree on cycle %d" % i)
        if not np.array_equal(rows_c, rows_p):
            raise AssertionError("row values differ on cycle %d" % i)


def main():
    cycles = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    seed = 20240917
    if _kernels is None:
        print("compiled kernels not built; benchmarking fallback only")
        arrivals, elapsed = _run(_kernels_py, cycles, seed)
        print("python  : %8d arrivals in %6.2fs  (%.0f arrivals/s)"
              % (arrivals, elapsed, arrivals / elapsed))
        return
    _cross_check(min(cycles, 2000), seed)
    print("cross-check ok (%d cycles bitwise identical)" % min(cycles, 2000))
    arr_c, t_c = _run(_kernels, cycles, seed)
    arr_p, t_p = _run(_kernels_py, cycles, seed)
    assert arr_c == arr_p
    print("compiled: %8d arrivals in %6.2fs  (%.0f arrivals/s)"
          % (arr_c, t_c, arr_c / t_c))
    print("python  : %8d arrivals in %6.2fs  (%.0f arrivals/s)"
          % (arr_p, t_p, arr_p / t_p))
    print("speedup : %.1fx" % (t_p / t_c))


if __name__ == "__main__":
    main()

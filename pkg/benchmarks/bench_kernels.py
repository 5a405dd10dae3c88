"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from jointra.bip import solve_branch_and_bound
from jointra.kernels import get_backend
from jointra.selftest import random_instance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_sinr(backend, repeat, batch=200_000):
    rng = np.random.default_rng(0)
    c = lambda *s: (rng.standard_normal(s) + 1j * rng.standard_normal(s)) / np.sqrt(2)
    hs, hi = c(batch, 2), c(batch, 2, 2)
    ps, pi = rng.uniform(0.1, 1, batch), rng.uniform(0.1, 1, (batch, 2))
    return best_of(lambda: backend.sinr_closed_form(hs, hi, ps, pi, 0.01, False), repeat)


def bench_bnb(backend, repeat, instances=40):
    rng = np.random.default_rng(1)
    problems = [random_instance(rng, rb_count=6, sizes=(5, 5, 5)) for _ in range(instances)]
    return best_of(lambda: [solve_branch_and_bound(p, backend=backend) for p in problems],
                   repeat)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    rows = []
    for name, fn in (("sinr closed form, 2e5 subcarriers", bench_sinr),
                     ("branch and bound, 40 instances F=6 K=5x3", bench_bnb)):
        t_py = fn(get_backend("python"), args.repeat)
        t_cy = fn(get_backend("cython"), args.repeat)
        rows.append((name, t_py, t_cy))
    print(f"{'kernel':45s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, t_py, t_cy in rows:
        print(f"{name:45s} {t_py:10.4f} {t_cy:10.4f} {t_py / t_cy:8.2f}")


if __name__ == "__main__":
    main()

"""Built-in fixture and oracle checks behind ``jointra self-test``."""
from __future__ import annotations

import time

import numpy as np

from .bip import BipProblem, solve_branch_and_bound, solve_exhaustive
from .linklevel import (SystemConfig, interference_covariance, lmmse_weights,
                        post_detection_sinr)
from .pairing import PairMatrix, build_pair_matrix
from .patterns import PatternMatrix, build_pattern_matrix

PATTERNS_F3 = ("100101",
               "010111",
               "001011")
PATTERNS_F4 = ("1000100101",
               "0100110111",
               "0010011111",
               "0001001011")
PAIRS_33 = ("111000000",
            "000111000",
            "000000111",
            "100100100",
            "010010010",
            "001001001")

LEVELS = ("fixtures", "quick", "oracle")


def random_instance(rng, max_rb=4, max_cells=3, max_users=3, *, rb_count=None, sizes=None,
                    integer=False) -> BipProblem:
    """Random small instance; ``integer`` draws rewards from {0..3} so ties are common."""
    f = int(rng.integers(1, max_rb + 1)) if rb_count is None else rb_count
    if sizes is None:
        u = int(rng.integers(1, max_cells + 1))
        sizes = tuple(int(k) for k in rng.integers(1, max_users + 1, size=u))
    pm, pairs = PatternMatrix(f), PairMatrix(sizes)
    n = pairs.column_count * pm.count
    rewards = rng.integers(0, 4, n).astype(float) if integer else rng.uniform(0.01, 1.0, n)
    return BipProblem(pm, pairs, rewards)


def solution_is_valid(problem: BipProblem, x) -> bool:
    """``A x = 1``, ``B x <= 1`` and binary; contiguity holds by construction."""
    return problem.is_feasible(x)


def oracle_campaign(instances: int, seed: int = 2024) -> tuple[int, int]:
    """Branch and bound against exhaustive search; returns (agreements, total)."""
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(instances):
        problem = random_instance(rng)
        bb = solve_branch_and_bound(problem)
        ex = solve_exhaustive(problem)
        if (bb.status == "optimal" and bb.objective_value == ex.objective_value
                and solution_is_valid(problem, bb.x)):
            ok += 1
    return ok, instances


def _scalar_pipeline_check(draws: int = 200, seed: int = 7) -> bool:
    rng = np.random.default_rng(seed)
    cfg = SystemConfig(rx_antennas=1)
    for _ in range(draws):
        h, hi = rng.normal(size=2) + 1j * rng.normal(size=2)
        p, pi = rng.uniform(0.01, 1.0, size=2)
        r = interference_covariance([hi], [pi], cfg.noise_power * 1e9)
        w = lmmse_weights(h, r)
        got = post_detection_sinr(h, w, r, p)
        want = p * abs(h) ** 2 / (pi * abs(hi) ** 2 + cfg.noise_power * 1e9)
        if abs(got - want) > 1e-12 * want:
            return False
    return True


def run_self_test(level: str = "quick", echo=print) -> dict:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    checks = []

    def record(name, passed, detail=""):
        checks.append((name, bool(passed)))
        echo(f"{'PASS' if passed else 'FAIL'}  {name}{'  ' + detail if detail else ''}")

    start = time.perf_counter()
    record("pattern matrix F=3", build_pattern_matrix(3).to_text().split() == list(PATTERNS_F3))
    record("pattern matrix F=4", build_pattern_matrix(4).to_text().split() == list(PATTERNS_F4))
    record("pair matrix K=(3,3)", build_pair_matrix((3, 3)).to_text().split() == list(PAIRS_33))

    if level in ("quick", "oracle"):
        n = 200 if level == "oracle" else 30
        ok, total = oracle_campaign(n)
        record(f"branch-and-bound vs exhaustive ({total} instances)", ok == total,
               f"{ok}/{total} agree")
        record("scalar SINR closed form", _scalar_pipeline_check())
    elapsed = time.perf_counter() - start
    if level == "quick":
        record("quick level under 10 s", elapsed < 10.0, f"{elapsed:.2f} s")
    passed = sum(p for _, p in checks)
    echo(f"{passed} passed, {len(checks) - passed} failed")
    return {"level": level, "passed": passed, "failed": len(checks) - passed,
            "checks": checks, "seconds": elapsed}

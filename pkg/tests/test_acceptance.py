"""Acceptance criteria, one PASS/FAIL line each in the terminal summary.

The simulation-based criteria run the default scenario (3 cells, 6 RBs,
5 users per cell, 200 TTIs, 10 seeds) once per session.
"""
import json
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import binomtest, spearmanr

from jointra import kernels
from jointra.bip import solve_branch_and_bound, solve_exhaustive
from jointra.cli import main
from jointra.config import RunConfig
from jointra.linklevel import interference_covariance
from jointra.pairing import build_pair_matrix
from jointra.patterns import build_pattern_matrix
from jointra.powerctl import (PowerControlParams, per_subcarrier_power, subcarrier_power_table,
                              user_transmit_power)
from jointra.selftest import PAIRS_33, PATTERNS_F3, PATTERNS_F4, random_instance, solution_is_valid
from jointra.simulator import simulate_drop

from conftest import ACCEPTANCE_LINES, crandn

SEEDS = 10
TTIS = 200
SWEEP_USERS = (2, 4, 6, 8, 10)
SWEEP_TTIS = 50
ALPHA = 0.05  # sign-test significance
LINK_RTOL = 1e-12
DRAWS = 10_000
ORACLE_INSTANCES = 200
INVARIANCE_RTOL = 1e-12
ORACLE_BUDGET_S = 60.0

DEFAULT = RunConfig(ttis=TTIS, seeds=SEEDS)


@contextmanager
def criterion(label):
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  {label}: {exc}".splitlines()[0])
        raise
    ACCEPTANCE_LINES.append(f"PASS  {label}")


@pytest.fixture(scope="session")
def default_drops():
    return [simulate_drop(DEFAULT, s, schedulers=("joint", "single_cell"))
            for s in DEFAULT.seed_list]


def sign_test(gains):
    gains = np.asarray(gains)
    pos = int(np.sum(gains > 0))
    n = int(np.sum(gains != 0))
    p = binomtest(pos, n, 0.5, alternative="greater").pvalue if n else 1.0
    return pos, n, p


def test_1_fixture_exactness():
    with criterion("1 fixture matrices bit-exact"):
        assert build_pattern_matrix(3).to_text() == "\n".join(PATTERNS_F3)
        assert build_pattern_matrix(4).to_text() == "\n".join(PATTERNS_F4)
        assert build_pair_matrix((3, 3)).to_text() == "\n".join(PAIRS_33)


def test_2_solver_matches_oracle():
    import time
    with criterion(f"2 branch and bound equals exhaustive on {ORACLE_INSTANCES} instances"):
        rng = np.random.default_rng(2024)
        t0 = time.perf_counter()
        mismatches = []
        for i in range(ORACLE_INSTANCES):
            pb = random_instance(rng, max_rb=4, max_cells=3, max_users=3)
            bnb = solve_branch_and_bound(pb)
            ref = solve_exhaustive(pb)
            if not (bnb.status == "optimal" and bnb.objective_value == ref.objective_value
                    and solution_is_valid(pb, bnb.x)):
                mismatches.append(i)
        elapsed = time.perf_counter() - t0
        assert not mismatches, f"mismatching instances {mismatches[:10]}"
        assert elapsed < ORACLE_BUDGET_S, f"took {elapsed:.1f} s"


def test_3a_joint_beats_single_cell_spectrum_efficiency(default_drops):
    gains = [d.statistics["joint"].average_spectrum_efficiency
             - d.statistics["single_cell"].average_spectrum_efficiency for d in default_drops]
    pos, n, p = sign_test(gains)
    label = (f"3a joint SE gain over single-cell: mean {np.mean(gains):+.4f} bit/s/Hz, "
             f"{pos}/{n} seeds positive, sign test p={p:.4f}")
    with criterion(label):
        assert np.mean(gains) > 0 and p < ALPHA


def test_3b_joint_beats_single_cell_fifth_percentile(default_drops):
    gains = [d.statistics["joint"].fifth_percentile_kbps
             - d.statistics["single_cell"].fifth_percentile_kbps for d in default_drops]
    pos, n, p = sign_test(gains)
    label = (f"3b joint 5th-percentile gain over single-cell: mean {np.mean(gains):+.1f} kbit/s, "
             f"{pos}/{n} seeds positive, sign test p={p:.4f}")
    with criterion(label):
        assert np.mean(gains) > 0 and p < ALPHA


@pytest.mark.slow
def test_4_multi_user_diversity():
    means = []
    for k in SWEEP_USERS:
        cfg = DEFAULT.with_users(k)
        se = [simulate_drop(cfg, s, schedulers=("joint",), ttis=SWEEP_TTIS)
              .statistics["joint"].average_spectrum_efficiency for s in cfg.seed_list]
        means.append(float(np.mean(se)))
    rho = spearmanr(SWEEP_USERS, means).statistic
    label = ("4 SE vs users per cell " + ", ".join(f"{k}:{m:.3f}" for k, m in zip(SWEEP_USERS, means))
             + f", Spearman {rho:.2f}")
    with criterion(label):
        assert rho > 0


def test_5_power_control():
    with criterion("5 power control examples exact"):
        pc = PowerControlParams()
        assert user_transmit_power(pc, 1, 100.0) == 0.0
        assert user_transmit_power(pc, 1, 150.0) == 24.0
        flat = PowerControlParams(alpha=0.0)
        assert len({user_transmit_power(flat, 3, pl) for pl in (60.0, 100.0, 140.0)}) == 1
        table = subcarrier_power_table(pc, np.array([70.0, 90.0, 100.0]), 6, 12)
        # dB round trips make this exact only up to rounding
        assert np.allclose(table[:, 1:], table[:, [1]], rtol=INVARIANCE_RTOL, atol=0)
        assert per_subcarrier_power(0.0, 1, 12) == 1.0 / 12


def test_6_fairness_lever(default_drops):
    pf = [d.statistics["joint"].jain_index for d in default_drops]
    cfg = replace(DEFAULT, delta=0.0)
    msinr = [simulate_drop(cfg, s, schedulers=("joint",)).statistics["joint"].jain_index
             for s in cfg.seed_list]
    label = f"6 Jain index delta=1 {np.mean(pf):.4f} vs delta=0 {np.mean(msinr):.4f}"
    with criterion(label):
        assert np.mean(pf) > np.mean(msinr)


def test_7_link_level():
    with criterion(f"7 N_r=1 closed form within {LINK_RTOL:g}, covariance Hermitian PSD "
                   f"on {DRAWS} draws"):
        rng = np.random.default_rng(7)
        n_int = 2
        h = crandn(rng, DRAWS, 1)
        hi = crandn(rng, DRAWS, n_int, 1)
        p = rng.uniform(0.1, 2.0, DRAWS)
        pi = rng.uniform(0.0, 2.0, (DRAWS, n_int))
        noise = 0.05
        gamma, _ = kernels.sinr_closed_form(h, hi, p, pi, noise, False)
        expected = p * np.abs(h[:, 0]) ** 2 / (np.sum(pi * np.abs(hi[..., 0]) ** 2, axis=1) + noise)
        assert np.max(np.abs(gamma - expected) / expected) <= LINK_RTOL
        for _ in range(DRAWS):
            nr = int(rng.integers(1, 5))
            k = int(rng.integers(0, 4))
            r = interference_covariance(list(crandn(rng, k, nr)), list(rng.uniform(0, 3, k)),
                                        float(rng.uniform(1e-3, 1.0)), rx_antennas=nr)
            assert np.array_equal(r, r.conj().T)
            assert np.linalg.eigvalsh(r).min() >= -1e-12 * max(1.0, np.abs(r).max())


def test_8_determinism(tmp_path, monkeypatch):
    text = "ttis = 20\nseeds = 2\nschedulers = joint, single_cell, round_robin\n"
    cfg = tmp_path / "d.cfg"
    cfg.write_text(text)
    outputs = []
    for name in ("a", "b"):
        monkeypatch.setenv("JOINTRA_OUTPUT_DIR", str(tmp_path / name))
        assert main(["run", str(cfg)]) == 0
        outputs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    with criterion("8 repeated runs byte-identical"):
        assert outputs[0].keys() == outputs[1].keys()
        assert outputs[0] == outputs[1]
        assert json.loads(outputs[0]["summary.json"])["status"] == "complete"

"""Proportional-fair reward of every (inter-cell pair, pattern) combination.

``c[p, l] = sum_u (1 / rbar[i_u]) ** delta * sum_{j in pattern l} R[i_u, j]``

where each member's RB rate is computed with the other members of the pair
as the only interferers, all transmitting with ``M = L`` RBs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .linklevel import (LinkState, SystemConfig, co_channel_sinr, interference_covariance,
                        lmmse_weights, post_detection_sinr, rate_per_rb, rb_throughput)
from .pairing import CellSizes, PairMatrix
from .patterns import Pattern, PatternMatrix
from .powerctl import (PowerControlParams, per_subcarrier_power, subcarrier_power_table,
                       user_transmit_power)


@dataclass(frozen=True)
class FairnessState:
    """Long-term average throughput per user (bits/s) and PF parameters."""

    average: np.ndarray
    delta: float = 1.0
    beta: float = 0.95
    epsilon_init: float = 1.0

    @classmethod
    def initial(cls, n_users: int, delta: float = 1.0, beta: float = 0.95,
                epsilon_init: float = 1.0) -> "FairnessState":
        if delta < 0:
            raise ValueError("delta must be >= 0")
        if not 0.0 <= beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        if not epsilon_init > 0:
            raise ValueError("epsilon_init must be > 0")
        return cls(np.full(n_users, float(epsilon_init)), delta, beta, epsilon_init)

    def weights(self) -> np.ndarray:
        if self.delta == 0:
            return np.ones_like(self.average)
        return (1.0 / self.average) ** self.delta

    def subset(self, users) -> "FairnessState":
        return replace(self, average=self.average[users])


def update_average_throughput(state: FairnessState, served) -> FairnessState:
    """Exponential forgetting with a floor at ``epsilon_init``.

    ``served`` is the per-user throughput of the previous TTI in bits/s,
    zero for users that were not scheduled.
    """
    served = np.asarray(served, dtype=float)
    if served.shape != state.average.shape:
        raise ValueError("served throughput must have one entry per user")
    if np.any(served < 0):
        raise ValueError("served throughput must be >= 0")
    avg = state.beta * state.average + (1.0 - state.beta) * served
    return replace(state, average=np.maximum(avg, state.epsilon_init))


def pair_pattern_reward(pair, pattern: Pattern, links: LinkState, sizes, pc: PowerControlParams,
                        fairness: FairnessState, config: SystemConfig) -> float:
    """Reward of one (pair, pattern), evaluated subcarrier by subcarrier.

    ``pair`` holds 1-based within-cell user indices.  This is the slow,
    direct path; :func:`build_reward_vector` is the vectorised one.
    """
    sizes = CellSizes(sizes)
    members = [off + i - 1 for off, i in zip(sizes.offsets, pair)]
    q = config.subcarriers_per_rb
    pl = links.serving_pathloss()
    power = [per_subcarrier_power(user_transmit_power(pc, pattern.length, pl[i]),
                                  pattern.length, q) for i in members]
    weights = fairness.weights()
    total = 0.0
    for u, i in enumerate(members):
        rate = 0.0
        for rb in pattern.rbs():
            sinrs = []
            for sc in range((rb - 1) * q, rb * q):
                interferers = [links.channels[k, u, sc] for v, k in enumerate(members) if v != u]
                p_int = [power[v] for v in range(len(members)) if v != u]
                r_zz = interference_covariance(interferers, p_int, config.noise_power,
                                               rx_antennas=links.channels.shape[3])
                h = links.channels[i, u, sc]
                w = lmmse_weights(h, r_zz, config.full_weights)
                sinrs.append(post_detection_sinr(h, w, r_zz, power[u]))
            rate += rb_throughput(sinrs, config)
        total += weights[i] * rate
    return total


def _pair_rb_rates(links, members, powers, config):
    """(N, U, F) rates of co-scheduled tuples on every RB of the band."""
    sinr = co_channel_sinr(links, members, powers, np.arange(links.n_subcarriers), config)
    return rate_per_rb(sinr, config)


def build_reward_vector(sizes, patterns: PatternMatrix, links: LinkState, pc: PowerControlParams,
                        fairness: FairnessState, config: SystemConfig,
                        pairs: PairMatrix | None = None) -> np.ndarray:
    """Rewards of all ``N_all * J`` combinations, pair-major, pattern-minor."""
    sizes = CellSizes(sizes)
    pairs = pairs if pairs is not None else PairMatrix(sizes)
    f = patterns.rb_count
    q = config.subcarriers_per_rb
    if links.n_subcarriers != f * q:
        raise ValueError(f"links carry {links.n_subcarriers} subcarriers, band needs {f * q}")
    members = pairs.global_members
    n_all = members.shape[0]
    table = subcarrier_power_table(pc, links.serving_pathloss(), f, q)
    weights = fairness.weights()[members]
    rewards = np.empty((n_all, patterns.count))

    base_powers = table[members, 1]
    base = None
    col = 0
    for length in range(1, f + 1):
        powers = table[members, length]
        if base is None:
            base = _pair_rb_rates(links, members, powers, config)
            rates = base
        else:
            # below the power cap the per-subcarrier power does not depend on L
            changed = np.flatnonzero(np.any(powers != base_powers, axis=1))
            rates = base
            if changed.size:
                rates = base.copy()
                rates[changed] = _pair_rb_rates(links, members[changed], powers[changed], config)
        gain = np.einsum("nu,nuf->nf", weights, rates)
        windows = np.lib.stride_tricks.sliding_window_view(gain, length, axis=1)
        count = f - length + 1
        rewards[:, col:col + count] = windows.sum(axis=-1)
        col += count
    return rewards.reshape(-1)

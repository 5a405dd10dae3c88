"""Open-loop fractional uplink power control."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAllocationError

ALPHA_STEPS = (0.0, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class PowerControlParams:
    """``p_max`` and ``p0`` in dBm, ``alpha`` the path-loss compensation factor."""

    p_max: float = 24.0
    p0: float = -60.0
    alpha: float = 0.6

    def __post_init__(self):
        if not np.isfinite(self.p_max) or not np.isfinite(self.p0):
            raise ValueError("p_max and p0 must be finite")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def user_transmit_power(params: PowerControlParams, rb_count, path_loss):
    """Total transmit power in dBm: ``min(P_max, P0 + 10 log10 M + alpha PL)``.

    Accepts scalars or broadcastable arrays for ``rb_count`` and
    ``path_loss``; returns a Python float for scalar input.
    """
    m = np.asarray(rb_count)
    if np.any(m < 1):
        raise InvalidAllocationError("a user must be assigned at least one RB")
    pl = np.asarray(path_loss, dtype=float)
    power = np.minimum(params.p_max, params.p0 + 10.0 * np.log10(m) + params.alpha * pl)
    return float(power) if power.ndim == 0 else power


def per_subcarrier_power(total_dbm, rb_count, subcarriers_per_rb: int):
    """Linear per-subcarrier power (mW), total split evenly over ``M * Q``."""
    m = np.asarray(rb_count)
    if np.any(m < 1) or subcarriers_per_rb < 1:
        raise InvalidAllocationError("RB count and subcarriers per RB must be >= 1")
    p = dbm_to_mw(total_dbm) / (m * subcarriers_per_rb)
    return float(p) if np.ndim(p) == 0 else p


def subcarrier_power_table(params: PowerControlParams, path_loss, rb_count: int,
                           subcarriers_per_rb: int) -> np.ndarray:
    """Per-subcarrier power for every user and every allocation size.

    Returns an ``(n_users, rb_count + 1)`` array; column ``M`` holds the power
    when ``M`` RBs are assigned.  Column 0 is zero (user silent).
    """
    pl = np.asarray(path_loss, dtype=float)[:, None]
    m = np.arange(1, rb_count + 1)[None, :]
    table = np.zeros((pl.shape[0], rb_count + 1))
    table[:, 1:] = per_subcarrier_power(user_transmit_power(params, m, pl), m,
                                        subcarriers_per_rb)
    return table

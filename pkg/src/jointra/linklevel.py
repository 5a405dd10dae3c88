"""Uplink link model: interference covariance, LMMSE combining, SINR, rate.

Powers are linear milliwatts per subcarrier throughout.  Weights follow the
diagonal-loaded form ``w = h^H (h h^H + diag(R_zz))^-1`` unless
``full_weights`` is requested, while the SINR denominator always uses the
full interference-plus-noise covariance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InvalidDimensionError, NumericalError, ShapeError

COND_LIMIT = 1e12


@dataclass(frozen=True)
class SystemConfig:
    subcarriers_per_rb: int = 12
    subcarrier_bandwidth: float = 15000.0
    rx_antennas: int = 2
    tx_antennas: int = 1
    noise_psd: float = -174.0
    full_weights: bool = False

    def __post_init__(self):
        if self.subcarriers_per_rb < 1:
            raise InvalidDimensionError("subcarriers_per_rb must be >= 1")
        if not self.subcarrier_bandwidth > 0:
            raise InvalidDimensionError("subcarrier_bandwidth must be > 0")
        if self.rx_antennas < 1 or self.tx_antennas < 1:
            raise InvalidDimensionError("antenna counts must be >= 1")

    @property
    def noise_dbm(self) -> float:
        """Noise power per receive antenna per subcarrier, dBm."""
        return self.noise_psd + 10.0 * np.log10(self.subcarrier_bandwidth)

    @property
    def noise_power(self) -> float:
        """Same as :attr:`noise_dbm`, linear mW."""
        return 10.0 ** (self.noise_dbm / 10.0)


def _as_channel(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.ndim == 0:
        h = h.reshape(1, 1)
    elif h.ndim == 1:
        h = h[:, None]
    if h.ndim != 2 or not np.all(np.isfinite(h)):
        raise ShapeError(f"channel must be a finite N_r x N_t matrix, got shape {h.shape}")
    return h


def interference_covariance(interferer_channels: Sequence, interferer_powers: Sequence[float],
                            noise_power: float, rx_antennas: int | None = None) -> np.ndarray:
    """``R_zz = sum_i P_i h_i h_i^H + noise * I``.

    ``rx_antennas`` is only needed when there are no interferers.
    """
    if len(interferer_channels) != len(interferer_powers):
        raise ShapeError("one power per interfering channel is required")
    chans = [_as_channel(h) for h in interferer_channels]
    if chans:
        nr = chans[0].shape[0]
        if any(h.shape[0] != nr for h in chans):
            raise ShapeError("interfering channels disagree on N_r")
        if rx_antennas is not None and rx_antennas != nr:
            raise ShapeError(f"channels have N_r={nr}, expected {rx_antennas}")
    elif rx_antennas is None:
        raise ShapeError("rx_antennas is required when there are no interferers")
    else:
        nr = rx_antennas
    if any(p < 0 for p in interferer_powers):
        raise ValueError("interferer powers must be >= 0")
    r = noise_power * np.eye(nr, dtype=complex)
    for h, p in zip(chans, interferer_powers):
        r = r + p * (h @ h.conj().T)
    return r


def _checked_inverse(m: np.ndarray) -> np.ndarray:
    n = m.shape[0]
    if n == 1:
        if m[0, 0] == 0:
            raise NumericalError("singular 1x1 matrix")
        return 1.0 / m
    if n == 2:
        a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
        det = a * d - b * c
        scale = np.abs(m).max()
        if det == 0 or np.linalg.cond(m) > COND_LIMIT:
            raise NumericalError(f"ill-conditioned 2x2 matrix (det={det}, max|entry|={scale})")
        return np.array([[d, -b], [-c, a]]) / det
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise NumericalError(f"matrix condition estimate {cond:.3g} exceeds {COND_LIMIT:g}")
    return np.linalg.solve(m, np.eye(n, dtype=m.dtype))


def lmmse_weights(h, r_zz, full_weights: bool = False) -> np.ndarray:
    """LMMSE combiner ``w = h^H (h h^H + diag(R_zz))^-1`` of shape N_t x N_r."""
    h = _as_channel(h)
    r_zz = np.atleast_2d(np.asarray(r_zz, dtype=complex))
    if r_zz.shape != (h.shape[0], h.shape[0]):
        raise ShapeError(f"R_zz shape {r_zz.shape} does not match N_r={h.shape[0]}")
    loading = r_zz if full_weights else np.diag(np.diag(r_zz))
    return h.conj().T @ _checked_inverse(h @ h.conj().T + loading)


def post_detection_sinr(h, w, r_zz, power: float) -> float:
    """``P (w h h^H w^H) / (w R_zz w^H)``.

    For more than one transmit antenna both quadratic forms are reduced by
    their trace.
    """
    h = _as_channel(h)
    w = np.atleast_2d(np.asarray(w, dtype=complex))
    r_zz = np.atleast_2d(np.asarray(r_zz, dtype=complex))
    if power == 0:
        return 0.0
    num = power * np.trace(w @ h @ h.conj().T @ w.conj().T).real
    den = np.trace(w @ r_zz @ w.conj().T).real
    if not den > 0:
        raise NumericalError(f"SINR denominator {den!r} is not positive")
    return float(num / den)


def rb_throughput(sinrs: Sequence[float], config: SystemConfig) -> float:
    """Shannon rate of one RB, bits/s: ``B * sum_q log2(1 + gamma_q)``."""
    sinrs = np.asarray(sinrs, dtype=float)
    if sinrs.shape != (config.subcarriers_per_rb,):
        raise ShapeError(f"expected {config.subcarriers_per_rb} SINR values, got shape {sinrs.shape}")
    return float(config.subcarrier_bandwidth * np.sum(np.log2(1.0 + sinrs)))


def sinr_batch(h_sig, h_int, p_sig, p_int, noise_power: float, full_weights: bool = False):
    """Vectorised SINR over a batch of independent links.

    Parameters
    ----------
    h_sig : complex (B, N_r, N_t)
    h_int : complex (B, n, N_r, N_t)
    p_sig : float (B,)
    p_int : float (B, n)

    Single-antenna transmitters with N_r <= 2 go through the closed-form
    kernel; anything else is solved with LAPACK.
    """
    h_sig = np.asarray(h_sig, dtype=complex)
    h_int = np.asarray(h_int, dtype=complex)
    p_sig = np.ascontiguousarray(p_sig, dtype=float)
    p_int = np.ascontiguousarray(p_int, dtype=float)
    nb, nr, nt = h_sig.shape
    if h_int.shape[0] != nb or h_int.shape[2:] != (nr, nt) or p_int.shape != h_int.shape[:2]:
        raise ShapeError("inconsistent batch shapes")
    if nt == 1 and nr <= 2:
        gamma, cond = kernels.sinr_closed_form(
            np.ascontiguousarray(h_sig[..., 0]), np.ascontiguousarray(h_int[..., 0]),
            p_sig, p_int, float(noise_power), bool(full_weights))
    else:
        gamma, cond = _sinr_general(h_sig, h_int, p_sig, p_int, noise_power, full_weights)
    bad = ~(cond <= COND_LIMIT)
    if np.any(bad & (p_sig > 0)):
        worst = np.nanmax(np.where(bad, cond, np.nan))
        raise NumericalError(f"weight matrix condition estimate {worst:.3g} exceeds {COND_LIMIT:g}")
    return np.where(p_sig > 0, gamma, 0.0)


def _sinr_general(h_sig, h_int, p_sig, p_int, noise, full_weights):
    nr = h_sig.shape[1]
    eye = np.eye(nr)
    r = noise * eye + np.einsum("bk,bkrt,bkst->brs", p_int, h_int, h_int.conj())
    hh = h_sig @ np.conj(np.swapaxes(h_sig, 1, 2))
    loading = r if full_weights else r * eye
    m = hh + loading
    cond = np.linalg.cond(m)
    w = np.conj(np.swapaxes(np.linalg.solve(np.conj(np.swapaxes(m, 1, 2)), h_sig), 1, 2))
    wh = np.conj(np.swapaxes(w, 1, 2))
    num = p_sig * np.trace(w @ hh @ wh, axis1=1, axis2=2).real
    den = np.trace(w @ r @ wh, axis1=1, axis2=2).real
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma = np.where(num > 0, num / den, 0.0)
    return gamma, cond


@dataclass
class LinkState:
    """Channels and path losses for one TTI.

    Attributes
    ----------
    channels : complex (n_users, n_bs, n_subcarriers, N_r, N_t)
        Users are ordered cell-major; ``channels[i, b]`` is user ``i`` as
        seen by base station ``b``.
    pathloss_db : float (n_users, n_bs)
    serving : int (n_users,)
    """

    channels: np.ndarray
    pathloss_db: np.ndarray
    serving: np.ndarray

    @property
    def n_subcarriers(self) -> int:
        return self.channels.shape[2]

    def serving_pathloss(self) -> np.ndarray:
        return self.pathloss_db[np.arange(len(self.serving)), self.serving]


def co_channel_sinr(links: LinkState, members: np.ndarray, powers: np.ndarray,
                    subcarriers: np.ndarray, config: SystemConfig) -> np.ndarray:
    """SINR of every member of co-scheduled user tuples.

    ``members[n, u]`` is the global index of the user transmitting in cell
    ``u`` (received by base station ``u``) or -1 for a silent cell;
    ``powers[n, u]`` its per-subcarrier power.  Every tuple ``n`` is
    evaluated on the subcarriers ``subcarriers[n]`` (shape (N, S)), or the
    same 1-D set for all tuples.  Returns ``(N, U, S)``.
    """
    members = np.asarray(members, dtype=np.intp)
    powers = np.asarray(powers, dtype=float)
    n, ncell = members.shape
    sc = np.asarray(subcarriers, dtype=np.intp)
    if sc.ndim == 1:
        sc = np.broadcast_to(sc, (n, sc.size))
    s = sc.shape[1]
    silent = members < 0
    idx = np.where(silent, 0, members)
    powers = np.where(silent, 0.0, powers)
    ch = links.channels
    nr, nt = ch.shape[3], ch.shape[4]
    out = np.zeros((n, ncell, s))
    others = [[v for v in range(ncell) if v != u] for u in range(ncell)]
    for u in range(ncell):
        # (N, S, Nr, Nt) channel of each member towards base station u
        h_all = ch[idx[:, :, None], u, sc[:, None, :]]
        h_sig = h_all[:, u].reshape(n * s, nr, nt)
        o = others[u]
        h_int = np.moveaxis(h_all[:, o], 1, 2).reshape(n * s, len(o), nr, nt)
        p_sig = np.repeat(powers[:, u], s)
        p_int = np.repeat(powers[:, o], s, axis=0)
        gamma = sinr_batch(h_sig, h_int, p_sig, p_int, config.noise_power, config.full_weights)
        out[:, u] = gamma.reshape(n, s)
    return out


def rate_per_rb(sinr: np.ndarray, config: SystemConfig) -> np.ndarray:
    """Collapse a trailing subcarrier axis of length ``k * Q`` into ``k`` RB rates."""
    q = config.subcarriers_per_rb
    shaped = sinr.reshape(sinr.shape[:-1] + (sinr.shape[-1] // q, q))
    return config.subcarrier_bandwidth * np.log2(1.0 + shaped).sum(axis=-1)

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointra import kernels
from jointra.errors import NumericalError, ShapeError
from jointra.linklevel import (LinkState, SystemConfig, co_channel_sinr, interference_covariance,
                               lmmse_weights, post_detection_sinr, rate_per_rb, rb_throughput,
                               sinr_batch)

from conftest import crandn

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


class TestConfig:
    def test_noise(self):
        cfg = SystemConfig()
        assert cfg.noise_dbm == pytest.approx(-174 + 10 * np.log10(15000))
        assert cfg.noise_power == pytest.approx(10 ** (cfg.noise_dbm / 10))


class TestCovariance:
    def test_example(self):
        r = interference_covariance([np.array([1, 1j])], [2.0], 0.5)
        assert np.allclose(r, [[2.5, -2j], [2j, 2.5]])

    def test_noise_only(self):
        assert np.allclose(interference_covariance([], [], 0.1, rx_antennas=2), 0.1 * np.eye(2))

    def test_noise_only_needs_antennas(self):
        with pytest.raises(ShapeError):
            interference_covariance([], [], 0.1)

    def test_antenna_mismatch(self):
        with pytest.raises(ShapeError):
            interference_covariance([np.ones(2), np.ones(3)], [1.0, 1.0], 0.1)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 4), st.integers(0, 4), st.data())
    def test_hermitian_psd(self, nr, n_int, data):
        chans = [np.array(data.draw(st.lists(cplx, min_size=nr, max_size=nr))) for _ in range(n_int)]
        powers = data.draw(st.lists(st.floats(0, 10), min_size=n_int, max_size=n_int))
        r = interference_covariance(chans, powers, 1e-3, rx_antennas=nr)
        assert np.allclose(r, r.conj().T)
        assert np.linalg.eigvalsh(r).min() >= -1e-9


class TestWeights:
    def test_diagonal_example(self):
        # (h h^H + diag(1, 3))^-1 applied to h = [1, 1] gives [3/7, 1/7]
        w = lmmse_weights(np.array([1.0, 1.0]), np.diag([1.0, 3.0]))
        assert np.allclose(w, [[3 / 7, 1 / 7]], atol=1e-12)
        ref = np.ones(2) @ np.linalg.inv(np.ones((2, 2)) + np.diag([1.0, 3.0]))
        assert np.allclose(w.ravel(), ref)

    def test_full_uses_offdiagonal(self):
        r = np.array([[1.0, 0.5], [0.5, 3.0]])
        h = np.array([1.0, 1.0])
        assert not np.allclose(lmmse_weights(h, r), lmmse_weights(h, r, full_weights=True))

    def test_singular_raises(self):
        with pytest.raises(NumericalError):
            lmmse_weights(np.array([1.0, 1.0]), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            lmmse_weights(np.ones(2), np.eye(3))


class TestSinr:
    def test_single_antenna_example(self):
        h, r = np.array([1.0]), np.array([[0.5]])
        w = lmmse_weights(h, r)
        assert post_detection_sinr(h, w, r, 1.0) == pytest.approx(2.0)

    def test_zero_power(self):
        assert post_detection_sinr(np.ones(2), np.ones(2), np.eye(2), 0.0) == 0.0

    def test_zero_denominator(self):
        with pytest.raises(NumericalError):
            post_detection_sinr(np.ones(2), np.zeros(2), np.eye(2), 1.0)

    def test_noise_limited_equals_mrc(self, rng):
        for _ in range(50):
            h = crandn(rng, 2)
            r = 0.3 * np.eye(2)
            g = post_detection_sinr(h, lmmse_weights(h, r), r, 2.0)
            assert g == pytest.approx(2.0 * np.vdot(h, h).real / 0.3, rel=1e-10)

    def test_nr1_closed_form(self, rng):
        h = crandn(rng, 10000)
        hi = crandn(rng, 10000)
        p, pi, n0 = 0.7, 0.4, 0.01
        gamma, _ = kernels.sinr_closed_form(h[:, None], hi[:, None, None], np.full(10000, p),
                                            np.full((10000, 1), pi), n0, False)
        expected = p * np.abs(h) ** 2 / (pi * np.abs(hi) ** 2 + n0)
        assert np.max(np.abs(gamma - expected) / expected) < 1e-12

    def test_adding_interferer_full_weights_never_helps(self, rng):
        worse = 0
        for _ in range(2000):
            h, g1, g2 = crandn(rng, 2), crandn(rng, 2), crandn(rng, 2)
            r1 = interference_covariance([g1], [1.0], 0.1)
            r2 = interference_covariance([g1, g2], [1.0, 1.0], 0.1)
            s1 = post_detection_sinr(h, lmmse_weights(h, r1, True), r1, 1.0)
            s2 = post_detection_sinr(h, lmmse_weights(h, r2, True), r2, 1.0)
            worse += s2 > s1 * (1 + 1e-9)
        assert worse == 0

    def test_adding_interferer_diagonal_weights_rarely_helps(self, rng):
        # the diagonal-loaded combiner is not the SINR-optimal one, so the
        # property holds only statistically
        n, worse = 4000, 0
        for _ in range(n):
            h, g1, g2 = crandn(rng, 2), crandn(rng, 2), crandn(rng, 2)
            r1 = interference_covariance([g1], [1.0], 0.1)
            r2 = interference_covariance([g1, g2], [1.0, 1.0], 0.1)
            s1 = post_detection_sinr(h, lmmse_weights(h, r1), r1, 1.0)
            s2 = post_detection_sinr(h, lmmse_weights(h, r2), r2, 1.0)
            worse += s2 > s1
        assert worse / n < 0.05

    @pytest.mark.parametrize("full", [False, True])
    @pytest.mark.parametrize("nr, n_int", [(1, 1), (2, 2), (2, 0), (3, 2), (4, 1)])
    def test_batch_matches_scalar(self, rng, nr, n_int, full):
        b = 40
        hs, hi = crandn(rng, b, nr, 1), crandn(rng, b, n_int, nr, 1)
        ps, pi = rng.uniform(0.1, 2, b), rng.uniform(0, 2, (b, n_int))
        gamma = sinr_batch(hs, hi, ps, pi, 0.05, full)
        for i in range(b):
            r = interference_covariance(list(hi[i]), list(pi[i]), 0.05, rx_antennas=nr)
            w = lmmse_weights(hs[i], r, full)
            assert gamma[i] == pytest.approx(post_detection_sinr(hs[i], w, r, ps[i]), rel=1e-9)

    def test_multiple_tx_antennas_trace(self, rng):
        h = crandn(rng, 2, 2)
        r = np.eye(2) * 0.2
        w = lmmse_weights(h, r)
        assert w.shape == (2, 2)
        g = post_detection_sinr(h, w, r, 1.0)
        num = np.trace(w @ h @ h.conj().T @ w.conj().T).real
        assert g == pytest.approx(num / np.trace(w @ r @ w.conj().T).real)


class TestRate:
    def test_example(self):
        assert rb_throughput([2.0] * 12, SystemConfig()) == pytest.approx(12 * 15000 * np.log2(3))

    def test_bits(self):
        assert rb_throughput([3.0] * 12, SystemConfig()) == pytest.approx(360000.0)

    def test_wrong_length(self):
        with pytest.raises(ShapeError):
            rb_throughput([1.0] * 11, SystemConfig())

    def test_rate_per_rb(self):
        cfg = SystemConfig(subcarriers_per_rb=2)
        out = rate_per_rb(np.array([[1.0, 1.0, 3.0, 3.0]]), cfg)
        assert np.allclose(out, [[30000.0, 60000.0]])


class TestCoChannel:
    def test_matches_scalar(self, rng):
        cfg = SystemConfig(subcarriers_per_rb=2)
        n_users, n_bs, n_sc = 4, 2, 4
        links = LinkState(1e-5 * crandn(rng, n_users, n_bs, n_sc, 2, 1),
                          np.full((n_users, n_bs), 100.0), np.array([0, 0, 1, 1]))
        members = np.array([[0, 2], [1, -1]])
        powers = np.array([[1e-3, 2e-3], [1e-3, 5e-3]])
        out = co_channel_sinr(links, members, powers, np.arange(n_sc), cfg)
        for s in range(n_sc):
            r = interference_covariance([links.channels[2, 0, s]], [2e-3], cfg.noise_power)
            h = links.channels[0, 0, s]
            assert out[0, 0, s] == pytest.approx(
                post_detection_sinr(h, lmmse_weights(h, r), r, 1e-3), rel=1e-9)
        assert np.all(out[1, 1] == 0)
        h = links.channels[1, 0, 0]
        assert out[1, 0, 0] == pytest.approx(1e-3 * np.vdot(h, h).real / cfg.noise_power,
                                             rel=1e-9)

"""Nearest-neighbour decoding against a brute-force reference."""

import numpy as np
import pytest

from fadingmac.config import SystemConfig
from fadingmac.decoder import (ERR_NONE, ERR_USER1,
                               BudgetError, Codebook, build_codebook, decode,
                               decode_single, metric, metric_single,
                               run_mc_experiment, wilson_interval)
from fadingmac.estimator import simulate_pilot_estimates
from fadingmac.scheme import build_joint_layout
from fadingmac.spectra import PowerSpectralDensity

PSD16 = PowerSpectralDensity.brickwall(1 / 16)


def brute_force(y, h1, h2, b1, b2, snr):
    """Plain double loop over all pairs, metric() per pair."""
    best = (np.inf, 0, 0)
    for m1 in range(b1.size):
        for m2 in range(b2.size):
            d = metric(y, h1, h2, b1.words[m1], b2.words[m2], snr)
            if d < best[0]:
                best = (d, m1, m2)
    return best[1], best[2]


def random_instance(rng, n_d=5, nr=2, nt1=2, nt2=1, m1=7, m2=5, tag=0):
    b1 = build_codebook(1, np.log(m1) / n_d, n_d, nt1, [500, tag])
    b2 = build_codebook(2, np.log(m2) / n_d, n_d, nt2, [501, tag])
    h1 = (rng.standard_normal((n_d, nr, nt1))
          + 1j * rng.standard_normal((n_d, nr, nt1))) / np.sqrt(2)
    h2 = (rng.standard_normal((n_d, nr, nt2))
          + 1j * rng.standard_normal((n_d, nr, nt2))) / np.sqrt(2)
    y = rng.standard_normal((n_d, nr)) + 1j * rng.standard_normal((n_d, nr))
    return y, h1, h2, b1, b2


class TestMetric:
    def test_true_pair_zero_with_perfect_estimates(self):
        rng = np.random.default_rng(1)
        y, h1, h2, b1, b2 = random_instance(rng)
        clean = np.sqrt(2.0) * (
            np.einsum("krt,kt->kr", h1, b1.words[0])
            + np.einsum("krt,kt->kr", h2, b2.words[0]))
        assert metric(clean, h1, h2, b1.words[0], b2.words[0], 2.0) \
            == pytest.approx(0.0, abs=1e-20)

    def test_hand_value_single_slot(self):
        y = np.array([[3.0 + 0j]])
        h = np.ones((1, 1, 1), dtype=complex)
        x = np.ones((1, 1), dtype=complex)
        assert metric(y, h, h, x, x, 1.0) == pytest.approx(1.0)

    def test_slot_permutation_invariant(self):
        rng = np.random.default_rng(2)
        y, h1, h2, b1, b2 = random_instance(rng)
        perm = rng.permutation(y.shape[0])
        d0 = metric(y, h1, h2, b1.words[1], b2.words[2], 3.0)
        d1 = metric(y[perm], h1[perm], h2[perm], b1.words[1][perm],
                    b2.words[2][perm], 3.0)
        assert d0 == pytest.approx(d1, rel=1e-12)

    def test_common_scaling_preserves_argmin(self):
        # scaling y and sqrt(SNR) Hhat by c scales every distance by |c|^2
        rng = np.random.default_rng(3)
        y, h1, h2, b1, b2 = random_instance(rng, tag=3)
        c = 1.7 - 0.4j
        pair0, _ = decode(y, h1, h2, b1, b2, 4.0)
        pair1, _ = decode(c * y, c * h1, c * h2, b1, b2, 4.0)
        assert pair0 == pair1

    def test_metric_single_drops_silent_user(self):
        rng = np.random.default_rng(4)
        y, h1, h2, b1, b2 = random_instance(rng, tag=4)
        zero = np.zeros_like(b2.words[0])
        full = metric(y, h1, h2, b1.words[2], zero, 9.0)
        single = metric_single(y, h1, b1.words[2], 9.0)
        assert full == pytest.approx(single, rel=1e-12)


class TestDecode:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for tag in range(40):
            y, h1, h2, b1, b2 = random_instance(rng, tag=tag)
            pair, _ = decode(y, h1, h2, b1, b2, 4.0)
            assert pair == brute_force(y, h1, h2, b1, b2, 4.0)

    def test_perfect_channel_no_noise_recovers_messages(self):
        rng = np.random.default_rng(6)
        _, h1, h2, b1, b2 = random_instance(rng, tag=6)
        sent = (3, 2)
        y = np.sqrt(5.0) * (
            np.einsum("krt,kt->kr", h1, b1.words[sent[0]])
            + np.einsum("krt,kt->kr", h2, b2.words[sent[1]]))
        pair, event = decode(y, h1, h2, b1, b2, 5.0, sent=sent)
        assert pair == sent and event == ERR_NONE

    def test_tie_breaks_to_lowest_indices(self):
        # degenerate codebook: duplicated codewords force exact ties
        n_d, nt = 3, 1
        rng = np.random.default_rng(7)
        word = (rng.standard_normal((n_d, nt))
                + 1j * rng.standard_normal((n_d, nt)))
        words = np.stack([word, word, word])
        book = Codebook(user=1, rate=0.0, n=n_d, n_t=nt, words=words)
        h = np.ones((n_d, 1, 1), dtype=complex)
        y = rng.standard_normal((n_d, 1)) + 0j
        pair, _ = decode(y, h, h, book, book, 1.0)
        assert pair == (0, 0)
        m, _ = decode_single(y, h, book, 1.0)
        assert m == 0

    def test_error_event_classification(self):
        rng = np.random.default_rng(8)
        _, h1, h2, b1, b2 = random_instance(rng, tag=8)
        y = np.sqrt(2.0) * (
            np.einsum("krt,kt->kr", h1, b1.words[1])
            + np.einsum("krt,kt->kr", h2, b2.words[0]))
        _, event = decode(y, h1, h2, b1, b2, 2.0, sent=(0, 0))
        assert event == ERR_USER1

    def test_budget_guard(self):
        words = np.zeros((2048, 1, 1), dtype=complex)
        big = Codebook(user=1, rate=1.0, n=1, n_t=1, words=words)
        y = np.zeros((1, 1), dtype=complex)
        h = np.ones((1, 1, 1), dtype=complex)
        with pytest.raises(BudgetError):
            decode(y, h, h, big, big, 1.0)


class TestCodebook:
    def test_reproducible_per_message(self):
        b1 = build_codebook(1, 0.4, 6, 2, seed=[9, 0])
        b2 = build_codebook(1, 0.4, 6, 2, seed=[9, 0])
        assert np.array_equal(b1.words, b2.words)
        # a bigger codebook reproduces the shared prefix word-for-word
        b3 = build_codebook(1, 0.6, 6, 2, seed=[9, 0])
        assert np.array_equal(b3.words[: b1.size], b1.words)

    def test_size_is_exp_rate(self):
        book = build_codebook(1, np.log(12) / 5, 5, 1, seed=1)
        assert book.size == 12

    def test_unit_variance_entries(self):
        book = build_codebook(1, np.log(64) / 4, 4, 2, seed=2)
        var = np.mean(np.abs(book.words) ** 2)
        assert abs(var - 1.0) < 0.1


class TestExperiments:
    def test_zero_rate_never_errs(self):
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        rep = run_mc_experiment(cfg, (0.0, 0.0), 12, 15, "joint", seed=5)
        assert rep["p_err_user1"] == 0.0
        assert rep["p_err_user2"] == 0.0
        assert rep["trials"] == 15

    def test_moderate_rates_decode_cleanly_at_high_snr(self):
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        rep = run_mc_experiment(cfg, (0.3, 0.3), 12, 40, "joint", seed=6)
        assert rep["p_err_user1"] <= 0.1
        assert rep["p_err_user2"] <= 0.1

    def test_half_gmi_rates_decode_reliably(self):
        # 40 dB, per-data-symbol rates set to half the finite-window GMI
        # bound (1.337 nats/use * 8/6 per data slot): measured error 0.01
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        rate = 0.5 * 1.337 * 8 / 6
        rep = run_mc_experiment(cfg, (rate, rate), 6, 100, "joint", seed=33)
        assert rep["p_err_user1"] < 0.1
        assert rep["p_err_user2"] < 0.1

    def test_overload_fails_often(self):
        cfg = SystemConfig(1, 1, 2, 1.0, 8, 8, PSD16)
        rate = np.log(30) / 6
        rep = run_mc_experiment(cfg, (rate, rate), 6, 40, "joint", seed=7)
        assert rep["p_err_user1"] > 0.3
        assert rep["p_err_both"] > 0.1

    def test_error_rate_grows_with_codebook(self):
        cfg = SystemConfig(1, 1, 2, 1.0, 8, 8, PSD16)
        small = run_mc_experiment(cfg, (np.log(4) / 6,) * 2, 6, 40, "joint",
                                  seed=7)
        big = run_mc_experiment(cfg, (np.log(60) / 6,) * 2, 6, 40, "joint",
                                seed=7)
        assert big["p_err_user1"] > small["p_err_user1"]

    def test_tdma_pipeline(self):
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        rep = run_mc_experiment(cfg, (0.3, 0.3), 24, 25, ("tdma", 0.5),
                                seed=8)
        assert rep["scheme"].startswith("tdma")
        assert 0.0 < rep["achieved_beta"] < 1.0
        assert rep["p_err_user1"] <= 0.2

    def test_budget_guard_on_rates(self):
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        with pytest.raises(BudgetError):
            run_mc_experiment(cfg, (2.0, 2.0), 12, 5, "joint", seed=9)

    def test_report_schema(self):
        cfg = SystemConfig(1, 1, 2, 1e4, 8, 8, PSD16)
        rep = run_mc_experiment(cfg, (0.1, 0.1), 12, 10, "joint", seed=10)
        for key in ("scheme", "snr_db", "rates", "n", "trials",
                    "p_err_user1", "p_err_user2", "p_err_both", "ci_95"):
            assert key in rep
        assert set(rep["ci_95"]) == {"user1", "user2", "both"}

    def test_true_csi_no_worse_than_estimates(self):
        # matched seeds: decoding with the true fading cannot do
        # statistically worse than decoding with LMMSE estimates
        cfg = SystemConfig(1, 1, 2, 10 ** 1.5, 8, 2, PSD16)
        lay = build_joint_layout(cfg, 12)
        rate = np.log(24) / 12
        trials = 120
        errs_est = errs_true = 0
        for trial in range(trials):
            books = {s: build_codebook(s, rate, 12, 1, [77, trial, s])
                     for s in (1, 2)}
            est = {}
            true = {}
            for s in (1, 2):
                t_parts, e_parts = [], []
                for br in (1, 2):
                    tr, es, _ = simulate_pilot_estimates(
                        cfg, lay, 1, 1000 + 10 * trial + s, s, 1, branch=br)
                    t_parts.append(tr[0])
                    e_parts.append(es[0])
                true[s] = np.stack(t_parts, axis=1)[:, :, None]
                est[s] = np.stack(e_parts, axis=1)[:, :, None]
            rng = np.random.default_rng([99, trial])
            noise = (rng.standard_normal((12, 2))
                     + 1j * rng.standard_normal((12, 2))) / np.sqrt(2)
            y = noise.copy()
            for s in (1, 2):
                y += np.sqrt(cfg.snr) * np.einsum(
                    "krt,kt->kr", true[s], books[s].words[0])
            p_est, _ = decode(y, est[1], est[2], books[1], books[2], cfg.snr)
            p_true, _ = decode(y, true[1], true[2], books[1], books[2],
                               cfg.snr)
            errs_est += p_est != (0, 0)
            errs_true += p_true != (0, 0)
        p1, p2 = errs_est / trials, errs_true / trials
        sigma = np.sqrt(max(p1 * (1 - p1), p2 * (1 - p2), 0.01) / trials)
        assert p2 <= p1 + 3 * sigma


class TestWilson:
    def test_known_interval(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and hi < 0.05
        lo, hi = wilson_interval(50, 100)
        assert lo < 0.5 < hi

    def test_degenerate(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)

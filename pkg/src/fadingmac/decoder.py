"""Gaussian codebooks, the nearest-neighbour metric, and error experiments.

The decoder treats the channel estimates as if they were perfect and picks
the message pair minimising the Euclidean distance accumulated over the data
slots:

    D(m1, m2) = sum_{k in D} || y_k - sqrt(SNR) Hhat_1k x_1k(m1)
                                    - sqrt(SNR) Hhat_2k x_2k(m2) ||^2.

Decoding is exhaustive over all pairs (desk scale only; a guard rejects
anything past 2^20 pairs) with deterministic lexicographic tie-breaking.
Monte Carlo experiments run the full pipeline - layout, fading, pilots,
LMMSE estimates, data transmission, decoding - and report per-event error
frequencies with Wilson confidence intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import gen_fading, gen_noise, rng_for
from .config import SystemConfig
from .estimator import lmmse_coefficients
from .scheme import Layout, build_joint_layout, build_tdma_layout

MAX_PAIRS = 1 << 20

ERR_NONE = "None"
ERR_USER1 = "User1Only"
ERR_USER2 = "User2Only"
ERR_BOTH = "Both"


class BudgetError(ValueError):
    """Codebook enumeration would exceed the desk-scale pair budget."""


@dataclass(frozen=True)
class Codebook:
    """i.i.d. Gaussian codebook: ceil(e^{n R}) words of n slot vectors."""

    user: int
    rate: float
    n: int
    n_t: int
    words: np.ndarray  # (messages, n, n_t)

    @property
    def size(self) -> int:
        return self.words.shape[0]


def build_codebook(user: int, rate: float, n: int, n_t: int,
                   seed) -> Codebook:
    """Draw a codebook; each word comes from its own (seed, user, message)
    stream so single words are reproducible in isolation."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    messages = max(1, math.ceil(math.exp(n * rate)))
    words = np.empty((messages, n, n_t), dtype=complex)
    for m in range(messages):
        rng = rng_for(seed, 2, user, m)
        z = rng.standard_normal((2, n, n_t))
        words[m] = (z[0] + 1j * z[1]) / np.sqrt(2.0)
    return Codebook(user=user, rate=rate, n=n, n_t=n_t, words=words)


def metric(y_data: np.ndarray, h1_hat: np.ndarray, h2_hat: np.ndarray,
           cw1: np.ndarray, cw2: np.ndarray, snr: float) -> float:
    """Distance of one message pair over the data slots.

    Shapes: y_data (n, n_r); h_hat (n, n_r, n_t_s); cw (n, n_t_s).
    """
    y_data = np.asarray(y_data, dtype=complex)
    if y_data.ndim != 2:
        raise ValueError("y_data must be (slots, branches)")
    s1 = np.einsum("krt,kt->kr", h1_hat, cw1)
    s2 = np.einsum("krt,kt->kr", h2_hat, cw2)
    resid = y_data - np.sqrt(snr) * s1 - np.sqrt(snr) * s2
    return float(np.sum(np.abs(resid) ** 2))


def metric_single(y_data: np.ndarray, h_hat: np.ndarray, cw: np.ndarray,
                  snr: float) -> float:
    """Single-user metric (the silent user's term removed) for TDMA."""
    s = np.einsum("krt,kt->kr", h_hat, cw)
    resid = np.asarray(y_data, dtype=complex) - np.sqrt(snr) * s
    return float(np.sum(np.abs(resid) ** 2))


def decode(y_data: np.ndarray, h1_hat: np.ndarray, h2_hat: np.ndarray,
           book1: Codebook, book2: Codebook, snr: float,
           sent: tuple[int, int] = (0, 0)):
    """Exhaustive argmin of the pair metric; ties go to the smallest
    (m1, m2) in lexicographic order.

    Returns ((m1, m2), error_event) with the event classified against the
    transmitted pair.
    """
    if book1.size * book2.size > MAX_PAIRS:
        raise BudgetError(
            f"{book1.size} x {book2.size} pairs exceed the desk-scale budget")
    root = np.sqrt(snr)
    sig1 = root * np.einsum("krt,mkt->mkr", h1_hat, book1.words)
    sig2 = root * np.einsum("krt,mkt->mkr", h2_hat, book2.words)
    best = (math.inf, 0, 0)
    for m1 in range(book1.size):
        resid = (y_data - sig1[m1])[None, :, :] - sig2
        dists = np.sum(np.abs(resid) ** 2, axis=(1, 2))
        m2 = int(np.argmin(dists))
        if dists[m2] < best[0]:
            best = (float(dists[m2]), m1, m2)
    pair = (best[1], best[2])
    return pair, _classify(pair, sent)


def decode_single(y_data: np.ndarray, h_hat: np.ndarray, book: Codebook,
                  snr: float, sent: int = 0):
    """Single-user exhaustive nearest-neighbour decoding."""
    if book.size > MAX_PAIRS:
        raise BudgetError("codebook exceeds the desk-scale budget")
    sig = np.sqrt(snr) * np.einsum("krt,mkt->mkr", h_hat, book.words)
    dists = np.sum(np.abs(y_data[None, :, :] - sig) ** 2, axis=(1, 2))
    m = int(np.argmin(dists))
    return m, (ERR_NONE if m == sent else ERR_USER1)


def _classify(pair: tuple[int, int], sent: tuple[int, int]) -> str:
    e1, e2 = pair[0] != sent[0], pair[1] != sent[1]
    if e1 and e2:
        return ERR_BOTH
    if e1:
        return ERR_USER1
    if e2:
        return ERR_USER2
    return ERR_NONE


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    """95% Wilson score interval for a binomial proportion."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials
                         + z * z / (4 * trials * trials)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def _estimates_for(config: SystemConfig, layout: Layout, user: int,
                   y_obs: np.ndarray) -> np.ndarray:
    """LMMSE estimate matrices at user `user`'s data slots, (n, n_r, n_t)."""
    n_ts = config.n_t1 if user == 1 else config.n_t2
    data = layout.data_slots[user]
    ph_of = layout.data_phases(user)
    est = np.empty((data.size, config.n_r, n_ts), dtype=complex)
    for t in range(1, n_ts + 1):
        for p in np.unique(ph_of):
            co = lmmse_coefficients(config.psd, layout, config.snr,
                                    config.T, user, t, int(p))
            cols = np.flatnonzero(ph_of == p)
            idx = data[cols][:, None] + co.offsets[None, :]
            # one scalar problem per receive branch, same weights
            est[cols, :, t - 1] = np.einsum(
                "rki,i->kr", y_obs[:, idx], co.coeffs)
    return est


def _transmit(config: SystemConfig, layout: Layout, books: dict,
              sent: dict, fade: dict, noise: np.ndarray):
    """Channel outputs over the full frame for the chosen messages."""
    y = noise.copy()  # (n_r, n_prime)
    root = np.sqrt(config.snr)
    for s, n_ts in ((1, config.n_t1), (2, config.n_t2)):
        for t in range(1, n_ts + 1):
            slots = layout.pilot_slots[(s, t)]
            if len(slots):
                y[:, slots] += root * fade[(s, t)][:, slots]
        data = layout.data_slots.get(s)
        if data is None or not len(data) or s not in books:
            continue
        word = books[s].words[sent[s]]  # (n, n_t)
        h = np.stack([fade[(s, t)][:, data] for t in
                      range(1, n_ts + 1)], axis=2)  # (n_r, n, n_t)
        y[:, data] += root * np.einsum("rkt,kt->rk", h, word)
    return y


def run_trial(config: SystemConfig, layout: Layout, books: dict, seed,
              trial: int, sent=(0, 0)):
    """One end-to-end trial; returns the decoded outcome per scheme."""
    fade = {}
    for s, n_ts in ((1, config.n_t1), (2, config.n_t2)):
        for t in range(1, n_ts + 1):
            link = (s - 1) * max(config.n_t1, config.n_t2) + (t - 1)
            fade[(s, t)] = gen_fading(
                config.psd, config.n_r, layout.n_prime,
                [3, link, trial, _as_int(seed)])
    noise = gen_noise(config.n_r, layout.n_prime, [4, trial, _as_int(seed)])
    y = _transmit(config, layout, books,
                  {1: sent[0], 2: sent[1]}, fade, noise)

    tdma = layout.achieved_beta is not None
    results = {}
    for s in (1, 2):
        data = layout.data_slots.get(s)
        if data is None or not len(data) or s not in books:
            continue
        if tdma:
            est = _estimates_for(config, layout, s, y)
            m, _ = decode_single(y[:, data].T, est, books[s], config.snr,
                                 sent=sent[s - 1])
            results[s] = m
    if not tdma:
        est1 = _estimates_for(config, layout, 1, y)
        est2 = _estimates_for(config, layout, 2, y)
        data = layout.data_slots[1]
        pair, event = decode(y[:, data].T, est1, est2, books[1], books[2],
                             config.snr, sent=sent)
        return pair, event
    pair = (results.get(1, sent[0]), results.get(2, sent[1]))
    return pair, _classify(pair, sent)


def run_mc_experiment(config: SystemConfig, rates: tuple[float, float],
                      n: int, trials: int, scheme, seed) -> dict:
    """Monte Carlo message-error rates for the full pipeline.

    ``scheme`` is "joint" or ("tdma", beta).  The transmitted pair is fixed
    (the ensemble is symmetric); fresh codebooks are drawn per trial.
    Returns a JSON-ready report with Wilson 95% intervals.
    """
    if isinstance(scheme, str) and scheme.lower() == "joint":
        layout = build_joint_layout(config, n)
        scheme_name = "joint"
        beta = None
    else:
        kind, beta = scheme
        if str(kind).lower() != "tdma":
            raise ValueError(f"unknown scheme {scheme!r}")
        layout = build_tdma_layout(config, n, beta)
        scheme_name = f"tdma(beta={beta})"

    pairs_guard = (math.ceil(math.exp(len(layout.data_slots[1]) * rates[0]))
                   * math.ceil(math.exp(len(layout.data_slots[2]) * rates[1]))
                   if scheme_name == "joint" else 1)
    if pairs_guard > MAX_PAIRS:
        raise BudgetError(
            f"rates {rates} at n={n} give {pairs_guard} pairs "
            f"(budget {MAX_PAIRS})")

    counts = {ERR_NONE: 0, ERR_USER1: 0, ERR_USER2: 0, ERR_BOTH: 0}
    for trial in range(trials):
        books = {}
        for s, rate in ((1, rates[0]), (2, rates[1])):
            n_s = len(layout.data_slots[s])
            if n_s:
                n_ts = config.n_t1 if s == 1 else config.n_t2
                books[s] = build_codebook(s, rate, n_s, n_ts,
                                          [_as_int(seed), trial])
        _, event = run_trial(config, layout, books, seed, trial)
        counts[event] += 1

    err1 = counts[ERR_USER1] + counts[ERR_BOTH]
    err2 = counts[ERR_USER2] + counts[ERR_BOTH]
    report = {
        "scheme": scheme_name,
        "snr_db": 10.0 * math.log10(config.snr) if config.snr > 0 else None,
        "rates": list(rates),
        "n": n,
        "trials": trials,
        "p_err_user1": err1 / trials,
        "p_err_user2": err2 / trials,
        "p_err_both": counts[ERR_BOTH] / trials,
        "ci_95": {
            "user1": list(wilson_interval(err1, trials)),
            "user2": list(wilson_interval(err2, trials)),
            "both": list(wilson_interval(counts[ERR_BOTH], trials)),
        },
        "events": dict(counts),
    }
    if beta is not None:
        report["beta"] = beta
        report["achieved_beta"] = layout.achieved_beta
    return report


def _as_int(seed) -> int:
    if isinstance(seed, (list, tuple, np.ndarray)):
        raise TypeError("seed must be a single integer")
    return int(seed)

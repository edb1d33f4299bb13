"""Windowed LMMSE interpolation of the fading from pilot observations.

At a pilot slot k' carrying antenna t of user s, receive branch r observes

    Y_{k'}(r) = sqrt(SNR) H_{s,k'}(r,t) + Z_{k'}(r),

and the fading at a data slot k is interpolated from the 2T such
observations inside [k - TL, k + TL] (T past and T future pilot groups,
guaranteed by the layout's guard periods):

    Hhat_{s,k}(r,t) = sum_i c_i Y_{k_i'}(r).

The coefficients solve the Wiener normal equations built from the fading
autocorrelation; they depend on the slot only through its phase ell = k mod
L (the error process is cyclo-stationary with period L), and are identical
across receive branches.  Pilots of other users/antennas are excluded from
the regression: they occupy different slots, so their observations are
independent of the target coefficient and would receive zero weight anyway.

The analytic mean-squared error 1 - c^H C^{-1} c is exposed per (user,
antenna, phase); its maximum over everything is the worst-case finite-window
error eps2_T that drives the GMI bounds, and for aliasing-free pilot periods
it converges (in T) to the closed-form spectral integral in
:mod:`fadingmac.spectra`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .channel import gen_fading, gen_noise
from .config import SystemConfig
from .scheme import Layout
from .spectra import (PowerSpectralDensity, autocorrelation_sequence,
                      interp_error_asymptotic, interp_error_nyquist, lstar)


@dataclass(frozen=True)
class InterpolatorCoeffs:
    """Wiener weights for one (user, antenna, data phase) target."""

    user: int
    antenna: int
    phase: int
    offsets: np.ndarray      # pilot slot offsets k' - k, sorted
    coeffs: np.ndarray       # Hhat = sum_i coeffs[i] * Y[k + offsets[i]]
    mse: float               # analytic interpolation error


def pilot_offsets(L: int, T: int, pilot_phase: int, phase: int) -> np.ndarray:
    """Relative positions of the 2T pilots for a target at phase `phase`."""
    d = phase - pilot_phase
    if not 0 < d < L:
        raise ValueError(
            f"phase {phase} does not trail pilot phase {pilot_phase}")
    past = -(d + L * np.arange(T))
    future = (L - d) + L * np.arange(T)
    return np.concatenate([past[::-1], future])


def lmmse_coefficients(psd: PowerSpectralDensity, layout: Layout, snr: float,
                       T: int, user: int, antenna: int,
                       phase: int) -> InterpolatorCoeffs:
    """Solve the normal equations C_yy c = c_hy for one target phase.

    C_yy = SNR * Toeplitz(r) + I is positive definite for every snr >= 0,
    so a plain Hermitian solve needs no regularisation.  At snr = 0 the
    observations are pure noise: all weights vanish and the MSE is 1.
    """
    if T != layout.T:
        raise ValueError(f"layout was built with T={layout.T}, not {T}")
    offs = pilot_offsets(layout.L, T, layout.pilot_phase(user, antenna),
                         phase)
    if snr == 0.0:
        return InterpolatorCoeffs(user, antenna, phase, offs,
                                  np.zeros(offs.size, dtype=complex), 1.0)
    lag_mat = offs[:, None] - offs[None, :]
    max_lag = int(max(np.max(np.abs(lag_mat)), np.max(np.abs(offs))))
    r = autocorrelation_sequence(psd, np.arange(max_lag + 1))
    r_at = _hermitian_lookup(r)
    c_yy = snr * r_at(lag_mat) + np.eye(offs.size)
    c_hy = np.sqrt(snr) * r_at(-offs)
    coeffs = linalg.solve(c_yy.conj(), c_hy, assume_a="pos")
    mse = 1.0 - float(np.real(np.vdot(c_hy, coeffs)))
    return InterpolatorCoeffs(user, antenna, phase, offs, coeffs,
                              float(min(1.0, max(0.0, mse))))


def _hermitian_lookup(r: np.ndarray):
    def at(lags):
        lags = np.asarray(lags)
        vals = r[np.abs(lags)]
        return np.where(lags >= 0, vals, np.conj(vals))
    return at


def estimate_fading(y_at_pilots: np.ndarray,
                    coeffs: InterpolatorCoeffs) -> complex | np.ndarray:
    """Apply the interpolator: Hhat = sum_i c_i Y_i.

    ``y_at_pilots`` holds the pilot-slot observations of one receive branch
    in offset order; leading axes (trials, branches, ...) broadcast.
    """
    y = np.asarray(y_at_pilots, dtype=complex)
    if y.shape[-1] != coeffs.coeffs.size:
        raise ValueError(
            f"got {y.shape[-1]} observations for {coeffs.coeffs.size} taps")
    out = y @ coeffs.coeffs
    return out if np.ndim(out) else complex(out)


@dataclass
class ErrorStats:
    """Interpolation-error summary for a layout at one SNR.

    ``analytic[(s, t)]`` maps data phase -> finite-window MSE; the per-user
    profile is the worst case over that user's antennas, and eps2_T the
    worst case over everything (the quantity the GMI's theta uses).
    ``asymptotic`` carries the infinite-window error from the spectral
    integral: phase-independent below the aliasing limit.
    """

    L: int
    T: int
    snr: float
    phases: dict[int, np.ndarray]
    analytic: dict[tuple[int, int], np.ndarray]
    eps2_T: float
    asymptotic: float | None
    empirical: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    stderr: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)
    trials: int = 0

    def users(self) -> list[int]:
        return sorted({s for s, _ in self.analytic})

    def antennas(self, s: int) -> list[int]:
        return sorted(t for u, t in self.analytic if u == s)

    def profile(self, s: int) -> np.ndarray:
        """Per-phase worst case over user s's antennas."""
        return np.max([self.analytic[(s, t)] for t in self.antennas(s)],
                      axis=0)

    def antenna_sum(self, s: int) -> np.ndarray:
        """Per-phase sum over user s's antennas (for the Frobenius-norm
        expectation in the GMI's F term)."""
        return np.sum([self.analytic[(s, t)] for t in self.antennas(s)],
                      axis=0)


def analytic_error_stats(config: SystemConfig, layout: Layout) -> ErrorStats:
    """Finite-window MSE for every (user, antenna, data phase) of a layout."""
    psd, snr, T = config.psd, config.snr, config.T
    phases: dict[int, np.ndarray] = {}
    analytic: dict[tuple[int, int], np.ndarray] = {}
    worst = 0.0
    for s, n_ts in ((1, config.n_t1), (2, config.n_t2)):
        if layout.data_slots.get(s) is None or not len(layout.data_slots[s]):
            continue
        ph = np.unique(layout.data_phases(s))
        phases[s] = ph
        for t in range(1, n_ts + 1):
            mses = np.array([
                lmmse_coefficients(psd, layout, snr, T, s, t, int(p)).mse
                for p in ph])
            analytic[(s, t)] = mses
            worst = max(worst, float(mses.max()))
    asymptotic = None
    if layout.L <= lstar(psd.lambda_d):
        asymptotic = interp_error_nyquist(psd, layout.L, snr)
    return ErrorStats(L=layout.L, T=layout.T, snr=snr, phases=phases,
                      analytic=analytic, eps2_T=worst, asymptotic=asymptotic)


def asymptotic_profile(config: SystemConfig, layout: Layout,
                       s: int) -> np.ndarray:
    """Infinite-window MSE per data phase (general, aliasing allowed)."""
    ph = np.unique(layout.data_phases(s))
    return np.array([
        interp_error_asymptotic(config.psd, layout.L, config.snr, int(p))
        for p in ph])


def simulate_pilot_estimates(config: SystemConfig, layout: Layout,
                             trials: int, seed, user: int, antenna: int,
                             branch: int):
    """Monte Carlo estimates for one (user, antenna, receive branch).

    Returns (true fading at data slots, estimates, coeffs per phase), each
    array of shape (trials, n_data).
    """
    psd, snr = config.psd, config.snr
    n_prime = layout.n_prime
    link = ((user - 1) * max(config.n_t1, config.n_t2)
            + (antenna - 1)) * config.n_r + (branch - 1)
    fade = gen_fading(psd, trials, n_prime, [_as_key(seed), 10 + link])
    noise = gen_noise(trials, n_prime, [_as_key(seed), 1000 + branch])

    y = np.sqrt(snr) * fade + noise  # valid wherever (s,t) sends a pilot
    data = layout.data_slots[user]
    est = np.empty((trials, data.size), dtype=complex)
    ph_of = layout.data_phases(user)
    coeffs = {}
    for p in np.unique(ph_of):
        co = lmmse_coefficients(psd, layout, snr, config.T, user, antenna,
                                int(p))
        coeffs[int(p)] = co
        cols = np.flatnonzero(ph_of == p)
        idx = data[cols][:, None] + co.offsets[None, :]
        est[:, cols] = np.einsum("nki,i->nk", y[:, idx], co.coeffs)
    return fade[:, data], est, coeffs


def _as_key(seed) -> int:
    if isinstance(seed, (list, tuple, np.ndarray)):
        raise TypeError("seed for the estimator must be a single integer")
    return int(seed)


def empirical_mse(config: SystemConfig, layout: Layout, trials: int,
                  seed) -> ErrorStats:
    """Sample MSE of H - Hhat per data phase, against the analytic profile.

    The per-phase standard error comes from the spread of per-trial means
    (trials are independent; slots within a trial are not).
    """
    if trials < 100:
        raise ValueError("need at least 100 trials for a stable profile")
    stats = analytic_error_stats(config, layout)
    stats.trials = trials
    for s in stats.users():
        ph_of = layout.data_phases(s)
        for t in stats.antennas(s):
            true, est, _ = simulate_pilot_estimates(
                config, layout, trials, seed, s, t, branch=1)
            sq = np.abs(true - est) ** 2
            means = np.empty(stats.phases[s].size)
            errs = np.empty(stats.phases[s].size)
            for i, p in enumerate(stats.phases[s]):
                cols = np.flatnonzero(ph_of == p)
                per_trial = sq[:, cols].mean(axis=1)
                means[i] = per_trial.mean()
                errs[i] = per_trial.std(ddof=1) / np.sqrt(trials)
            stats.empirical[(s, t)] = means
            stats.stderr[(s, t)] = errs
    return stats

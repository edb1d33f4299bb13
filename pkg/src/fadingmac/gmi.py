"""Generalised-mutual-information lower bounds for the pilot scheme.

For each of the three error events (user 1 wrong, user 2 wrong, both wrong)
the achievable rate with nearest-neighbour decoding is bounded through the
dual form sup_{theta <= 0} (theta F(SNR) - kappa(theta, SNR)).  This module
evaluates the chain the analysis uses:

* F(SNR): receiver energy plus the SNR-weighted interpolation error,
  F = n_r (L - nt)/L + (1/L) sum_ell SNR E[ ||E_1||_F^2 + ||E_2||_F^2 ];
* the explicit near-optimal choice
  theta* = -1 / (n_r + n_r nt SNR eps2_T);
* the resulting finite-window bound (with the sign-definite cross term
  dropped, never estimated)

  I_1 >= (1/L) sum_ell E[ log det( I + SNR Hhat_1 Hhat_1^H / den ) ]
         - (L - nt)/L,          den = n_r + n_r nt SNR eps2_T;

* its infinite-window limit, where the estimate converges in distribution
  to a matrix Hbar with i.i.d. CN(0, 1 - eps2) entries,

  I_1 >= (L - nt)/L * ( E[ log det( I + SNR Hbar Hbar^H / den ) ] - 1 ),

  plus the log-det-dropped secondary bound
  (L - nt)/L * ( min(n_r, n_t1) (log SNR - log den) + Psi )
  with Psi the expected log-determinant of the Wishart part minus one;
* the sum-rate versions with the stacked n_r x (n_t1 + n_t2) estimate.

All expectations are Monte Carlo over the exact complex-Gaussian estimate
law, with standard errors always reported, chunked with a fixed-order
reduction so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import rng_for
from .config import SystemConfig
from .estimator import ErrorStats
from .spectra import NyquistViolation, lstar

_CHUNK = 1 << 15
LOGDET_CLAMP = -700.0


class MonteCarloBudgetError(RuntimeError):
    """Requested accuracy cannot be met with the given sample budget."""


@dataclass(frozen=True)
class GmiEstimate:
    """A Monte Carlo bound value with its standard error and context."""

    value: float
    stderr: float
    samples: int
    theta: float
    eps2: float
    secondary: float | None = None
    secondary_stderr: float | None = None
    clamp_rate: float = 0.0

    def agrees_with(self, other: "GmiEstimate", sigmas: float = 3.0) -> bool:
        gap = abs(self.value - other.value)
        return gap <= sigmas * math.hypot(self.stderr, other.stderr) + 1e-12


def f_snr(config: SystemConfig, error_stats: ErrorStats) -> float:
    """F(SNR): noise energy plus SNR-weighted estimation error, per slot.

    E||E_s||_F^2 at phase ell is n_r times the per-antenna MSE sum, so

        F = n_r (L - nt)/L
            + (SNR n_r / L) sum_ell sum_{s,t} eps2_{s,T}(ell, t).
    """
    L, nt = config.L, config.nt_sum
    base = config.n_r * (L - nt) / L
    per_phase = 0.0
    for s in error_stats.users():
        per_phase += float(np.sum(error_stats.antenna_sum(s)))
    return base + config.snr * config.n_r * per_phase / L


def theta_star(config: SystemConfig, eps2_T: float) -> float:
    """The explicit high-SNR choice theta* = -1/(n_r + n_r nt SNR eps2_T)."""
    if not 0.0 <= eps2_T <= 1.0:
        raise ValueError("eps2_T must lie in [0, 1]")
    return -1.0 / (config.n_r
                   + config.n_r * config.nt_sum * config.snr * eps2_T)


def _chunk_sizes(budget: int) -> list[int]:
    if budget < 1:
        raise ValueError("mc_budget must be positive")
    full, rest = divmod(budget, _CHUNK)
    return [_CHUNK] * full + ([rest] if rest else [])


def _sample_estimate(rng, m: int, n_r: int, col_std: np.ndarray) -> np.ndarray:
    """m draws of an estimate matrix with independent CN(0, std_t^2) columns."""
    n_t = col_std.size
    z = rng.standard_normal((2, m, n_r, n_t))
    return (z[0] + 1j * z[1]) / np.sqrt(2.0) * col_std[None, None, :]


def _logdet_capacity(h: np.ndarray, coeff: float) -> np.ndarray:
    """log det(I + coeff * H H^H) per sample, via the Gram matrix."""
    n_t = h.shape[-1]
    if n_t == 1:
        return np.log1p(coeff * np.sum(np.abs(h[..., 0]) ** 2, axis=-1))
    gram = np.einsum("mri,mrj->mij", np.conj(h), h)
    eig = np.linalg.eigvalsh(gram)
    return np.sum(np.log1p(coeff * np.maximum(eig, 0.0)), axis=-1)


def _mc_logdet(col_std: np.ndarray, coeff: float, n_r: int, budget: int,
               seed, tag: int) -> tuple[float, float]:
    """Mean and stderr of log det(I + coeff H H^H) over the estimate law."""
    total = 0.0
    total_sq = 0.0
    count = 0
    for i, m in enumerate(_chunk_sizes(budget)):
        rng = rng_for(seed, 5, tag, i)
        vals = _logdet_capacity(_sample_estimate(rng, m, n_r, col_std), coeff)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        count += m
    mean = total / count
    var = max(0.0, total_sq / count - mean * mean)
    return mean, math.sqrt(var / count)


def _phase_column_stds(config: SystemConfig, error_stats: ErrorStats,
                       users: tuple[int, ...]) -> list[np.ndarray]:
    """Per data phase, the column std devs of the (stacked) estimate."""
    stds = None
    for s in users:
        per_t = [np.sqrt(np.maximum(0.0, 1.0 - error_stats.analytic[(s, t)]))
                 for t in error_stats.antennas(s)]
        block = np.stack(per_t, axis=1)  # (phases, n_t_s)
        stds = block if stds is None else np.concatenate([stds, block],
                                                         axis=1)
    return [stds[i] for i in range(stds.shape[0])]


def _finite_t_bound(config: SystemConfig, error_stats: ErrorStats,
                    users: tuple[int, ...], mc_budget: int, seed,
                    tag: int) -> GmiEstimate:
    L, nt = config.L, config.nt_sum
    eps2_T = error_stats.eps2_T
    den = config.n_r * (1.0 + nt * config.snr * eps2_T)
    coeff = config.snr / den
    per_phase = _phase_column_stds(config, error_stats, users)
    means, variances = [], []
    for i, col_std in enumerate(per_phase):
        mean, err = _mc_logdet(col_std, coeff, config.n_r, mc_budget, seed,
                               tag * 1000 + i)
        means.append(mean)
        variances.append(err * err)
    if len(per_phase) != L - nt:
        raise ValueError(
            "finite-window bounds need joint-layout error stats covering "
            f"all {L - nt} data phases, got {len(per_phase)}")
    value = sum(means) / L - (L - nt) / L
    stderr = math.sqrt(sum(variances)) / L
    return GmiEstimate(value=value, stderr=stderr,
                       samples=mc_budget * len(per_phase),
                       theta=theta_star(config, eps2_T), eps2=eps2_T)


def gmi1_lower_finiteT(config: SystemConfig, error_stats: ErrorStats,
                       mc_budget: int, seed) -> GmiEstimate:
    """Finite-window GMI lower bound for the user-1 error event (nats per
    channel use), Monte Carlo over the exact estimate law."""
    return _finite_t_bound(config, error_stats, (1,), mc_budget, seed, tag=1)


def gmi2_lower_finiteT(config: SystemConfig, error_stats: ErrorStats,
                       mc_budget: int, seed) -> GmiEstimate:
    """User-2 counterpart of :func:`gmi1_lower_finiteT`."""
    return _finite_t_bound(config, error_stats, (2,), mc_budget, seed, tag=2)


def _check_nyquist(config: SystemConfig) -> None:
    limit = lstar(config.psd.lambda_d)
    if config.L > limit:
        raise NyquistViolation(
            f"L={config.L} aliases the fading (L*={limit}); the "
            f"infinite-window estimate law is not available")


def psi(config: SystemConfig, eps2: float, mc_budget: int, seed,
        n_t: int | None = None) -> GmiEstimate:
    """Psi = E[log det of the square Gram of Hbar] - 1, by Monte Carlo.

    Hbar has i.i.d. CN(0, 1 - eps2) entries, shape n_r x n_t (defaults to
    user 1's antenna count).  Per-sample log-determinants are clamped at
    -700 and the clamp rate reported; the expectation itself is finite.
    """
    var = 1.0 - eps2
    if var <= 0.0:
        raise ValueError("degenerate estimate law: 1 - eps2 must be > 0")
    n_t = config.n_t1 if n_t is None else n_t
    k = min(config.n_r, n_t)
    col_std = np.full(n_t, math.sqrt(var))
    total = total_sq = 0.0
    clamped = 0
    count = 0
    for i, m in enumerate(_chunk_sizes(mc_budget)):
        rng = rng_for(seed, 6, i)
        h = _sample_estimate(rng, m, config.n_r, col_std)
        if config.n_r >= n_t:
            gram = np.einsum("mri,mrj->mij", np.conj(h), h)
        else:
            gram = np.einsum("mrt,mst->mrs", h, np.conj(h))
        if k == 1:
            vals = np.log(np.maximum(gram[:, 0, 0].real, 0.0))
        else:
            eig = np.maximum(np.linalg.eigvalsh(gram), 0.0)
            with np.errstate(divide="ignore"):
                vals = np.sum(np.log(eig), axis=-1)
        low = vals < LOGDET_CLAMP
        clamped += int(np.count_nonzero(low))
        vals = np.where(low, LOGDET_CLAMP, vals)
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        count += m
    mean = total / count
    varv = max(0.0, total_sq / count - mean * mean)
    return GmiEstimate(value=mean - 1.0, stderr=math.sqrt(varv / count),
                       samples=count, theta=0.0, eps2=eps2,
                       clamp_rate=clamped / count)


def _asymptotic_bound(config: SystemConfig, eps2: float, n_t_active: int,
                      mc_budget: int, seed, tag: int) -> GmiEstimate:
    _check_nyquist(config)
    if not 0.0 <= eps2 <= 1.0:
        raise ValueError("eps2 must lie in [0, 1]")
    L, nt = config.L, config.nt_sum
    frac = (L - nt) / L
    den = config.n_r * (1.0 + nt * config.snr * eps2)
    coeff = config.snr / den
    var = 1.0 - eps2
    theta = theta_star(config, eps2)
    if var == 0.0:
        return GmiEstimate(value=-frac, stderr=0.0, samples=0, theta=theta,
                           eps2=eps2, secondary=None)
    col_std = np.full(n_t_active, math.sqrt(var))
    mean, err = _mc_logdet(col_std, coeff, config.n_r, mc_budget, seed, tag)
    value = frac * (mean - 1.0)
    stderr = frac * err
    if config.snr == 0.0:
        return GmiEstimate(value=value, stderr=stderr, samples=mc_budget,
                           theta=theta, eps2=eps2)
    psi_est = psi(config, eps2, mc_budget, [_key(seed), 7, tag],
                  n_t=n_t_active)
    k = min(config.n_r, n_t_active)
    secondary = frac * (k * (math.log(config.snr) - math.log(den))
                        + psi_est.value)
    return GmiEstimate(value=value, stderr=stderr,
                       samples=mc_budget, theta=theta, eps2=eps2,
                       secondary=secondary,
                       secondary_stderr=frac * psi_est.stderr,
                       clamp_rate=psi_est.clamp_rate)


def _key(seed) -> int:
    if isinstance(seed, (list, tuple, np.ndarray)):
        raise TypeError("seed must be a single integer")
    return int(seed)


def gmi1_lower_asymptotic(config: SystemConfig, eps2: float, mc_budget: int,
                          seed) -> GmiEstimate:
    """Infinite-window GMI lower bound for user 1 (nats per channel use).

    ``value`` is the log-det bound, ``secondary`` the log-det-dropped form
    built from Psi.  Requires the aliasing-free regime L <= L*.
    """
    return _asymptotic_bound(config, eps2, config.n_t1, mc_budget, seed,
                             tag=11)


def gmi2_lower_asymptotic(config: SystemConfig, eps2: float, mc_budget: int,
                          seed) -> GmiEstimate:
    """User-2 counterpart of :func:`gmi1_lower_asymptotic`."""
    return _asymptotic_bound(config, eps2, config.n_t2, mc_budget, seed,
                             tag=12)


def gmi12_lower(config: SystemConfig, error_stats_or_eps2, mc_budget: int,
                seed) -> GmiEstimate:
    """Sum-rate GMI lower bound from the stacked n_r x (n_t1 + n_t2)
    estimate: finite-window when given :class:`ErrorStats`, infinite-window
    when given a scalar eps2."""
    if isinstance(error_stats_or_eps2, ErrorStats):
        return _finite_t_bound(config, error_stats_or_eps2, (1, 2),
                               mc_budget, seed, tag=3)
    return _asymptotic_bound(config, float(error_stats_or_eps2),
                             config.nt_sum, mc_budget, seed, tag=13)


def kappa1_hat(config: SystemConfig, error_stats: ErrorStats, theta: float,
               mc_budget: int, seed) -> tuple[float, float]:
    """The dropped-cross-term bound on the log-MGF of the user-1 metric:

    kappa1_hat(theta) = -(1/L) sum_ell E[ log det(I - theta SNR Hhat Hhat^H) ].
    """
    if theta > 0:
        raise ValueError("theta must be <= 0")
    L = config.L
    per_phase = _phase_column_stds(config, error_stats, (1,))
    means, variances = [], []
    for i, col_std in enumerate(per_phase):
        mean, err = _mc_logdet(col_std, -theta * config.snr, config.n_r,
                               mc_budget, seed, 4000 + i)
        means.append(mean)
        variances.append(err * err)
    return -sum(means) / L, math.sqrt(sum(variances)) / L


def gmi1_dual_value(config: SystemConfig, error_stats: ErrorStats,
                    theta: float, mc_budget: int, seed) -> tuple[float, float]:
    """theta F(SNR) - kappa1_hat(theta): one point of the dual objective."""
    kap, err = kappa1_hat(config, error_stats, theta, mc_budget, seed)
    return theta * f_snr(config, error_stats) - kap, err


def refine_theta_sup(config: SystemConfig, error_stats: ErrorStats,
                     mc_budget: int, seed,
                     iters: int = 40) -> tuple[float, float]:
    """Diagnostic golden-section sweep of the dual objective over
    theta in [10 theta*, 0).  Never a substitute for the published bound:
    report :func:`gmi1_lower_finiteT` instead."""
    ts = theta_star(config, error_stats.eps2_T)
    lo, hi = 10.0 * ts, ts * 1e-3
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - gr * (b - a)
    d = a + gr * (b - a)
    fc = gmi1_dual_value(config, error_stats, c, mc_budget, seed)[0]
    fd = gmi1_dual_value(config, error_stats, d, mc_budget, seed)[0]
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = gmi1_dual_value(config, error_stats, c, mc_budget, seed)[0]
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = gmi1_dual_value(config, error_stats, d, mc_budget, seed)[0]
    theta_opt = (a + b) / 2.0
    val = gmi1_dual_value(config, error_stats, theta_opt, mc_budget, seed)[0]
    return theta_opt, val


def prelog_slope(values) -> float:
    """Least-squares slope of GMI against log SNR.

    ``values``: iterable of (snr, gmi) pairs with snr linear and distinct.
    """
    pts = [(float(s), float(g)) for s, g in values]
    if len(pts) < 2:
        raise ValueError("need at least two (snr, gmi) points")
    x = np.log([s for s, _ in pts])
    if np.unique(x).size < 2:
        raise ValueError("SNR points must be distinct")
    y = np.array([g for _, g in pts])
    return float(np.polyfit(x, y, 1)[0])

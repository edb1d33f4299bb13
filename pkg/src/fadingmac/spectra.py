"""Fading power spectral densities and interpolation-error integrals.

The fading law is a power spectral density f_H(lambda) on [-1/2, 1/2] that is
bandlimited to |lambda| <= lambda_d < 1/2, strictly positive inside the band,
and normalised to unit power (unit-variance fading):

    int_{-1/2}^{1/2} f_H(lambda) d lambda = 1.

From f_H everything else is derived:

* the autocorrelation  r(m) = int e^{i 2 pi m lambda} f_H(lambda) d lambda,
* the L-fold undersampled ("folded") spectra seen by a channel estimator that
  observes one pilot every L slots,
* the asymptotic interpolation error of an ideal (infinite-window) LMMSE
  pilot interpolator, both in the aliasing-free regime and in general.

Two PSD shapes are supported: a brickwall density, constant at 1/(2 lambda_d)
inside the band (admits closed forms, used as the default and as a test
oracle), and a tabulated density given on a uniform lambda grid and
renormalised to unit power at load time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

#: Absolute tolerance for the adaptive quadratures in this module.
QUAD_ABS_TOL = 1e-10

BRICKWALL = "brickwall"
TABULATED = "tabulated"


class SpectrumError(ValueError):
    """A PSD violates the bandlimited/positive/unit-power model."""


class NyquistViolation(ValueError):
    """Pilot period L undersamples the fading beyond 1/(2 lambda_d)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class PowerSpectralDensity:
    """Bandlimited fading power spectral density on [-1/2, 1/2].

    Use :meth:`brickwall` or :meth:`tabulated` instead of the bare
    constructor; both validate the model assumptions.
    """

    shape: str
    lambda_d: float
    grid_lambda: np.ndarray | None = field(default=None, repr=False)
    grid_values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def brickwall(cls, lambda_d: float) -> "PowerSpectralDensity":
        """Constant density 1/(2 lambda_d) on [-lambda_d, lambda_d]."""
        _check_lambda_d(lambda_d)
        return cls(shape=BRICKWALL, lambda_d=float(lambda_d))

    @classmethod
    def tabulated(cls, lam: np.ndarray, values: np.ndarray,
                  lambda_d: float | None = None) -> "PowerSpectralDensity":
        """PSD from samples on a uniform grid over [-1/2, 1/2].

        Values are linearly interpolated between grid points, cut off hard at
        the bandwidth, and renormalised to unit power.  The bandwidth snaps
        to the outermost grid point carrying a nonzero value (inside
        ``lambda_d`` when given), so the stored density integrates to one
        exactly as evaluated.  The model requires strict positivity on the
        whole symmetric band: densities with zeros anywhere inside
        [-lambda_d, lambda_d] are rejected (values may still be asymmetric).
        """
        lam = np.asarray(lam, dtype=float)
        values = np.asarray(values, dtype=float).copy()
        if lam.ndim != 1 or lam.shape != values.shape or lam.size < 3:
            raise SpectrumError("need matching 1-D grids with >= 3 points")
        steps = np.diff(lam)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6):
            raise SpectrumError("lambda grid must be uniform and increasing")
        if lam[0] < -0.5 - 1e-12 or lam[-1] > 0.5 + 1e-12:
            raise SpectrumError("lambda grid must lie within [-1/2, 1/2]")
        if np.any(values < 0):
            raise SpectrumError("PSD values must be non-negative")
        if lambda_d is not None:
            values[np.abs(lam) > lambda_d] = 0.0
        positive = np.flatnonzero(values > 0)
        if positive.size == 0:
            raise SpectrumError("PSD is identically zero")
        band = max(abs(lam[positive[0]]), abs(lam[positive[-1]]))
        _check_lambda_d(band)
        in_band = np.abs(lam) <= band + steps[0] / 2
        if np.any(values[in_band] <= 0):
            raise SpectrumError(
                "PSD must be strictly positive on the whole band "
                f"[-{band:.6g}, {band:.6g}]")
        keep = np.abs(lam) <= band + steps[0] / 2
        power = np.trapezoid(values[keep], lam[keep])
        if power <= 0:
            raise SpectrumError("PSD has zero power")
        return cls(shape=TABULATED, lambda_d=float(band),
                   grid_lambda=lam, grid_values=values / power)

    def value(self, lam):
        """Evaluate f_H(lambda) for lambda in [-1/2, 1/2] (vectorised)."""
        lam = np.asarray(lam, dtype=float)
        if self.shape == BRICKWALL:
            height = 1.0 / (2.0 * self.lambda_d)
            out = np.where(np.abs(lam) <= self.lambda_d, height, 0.0)
        else:
            out = np.interp(lam, self.grid_lambda, self.grid_values,
                            left=0.0, right=0.0)
            out = np.where(np.abs(lam) > self.lambda_d, 0.0, out)
        return out if out.ndim else float(out)

    def value_periodic(self, lam):
        """Period-1 extension of f_H, defined for any real lambda."""
        lam = np.asarray(lam, dtype=float)
        wrapped = lam - np.round(lam)
        return self.value(wrapped)


def _check_lambda_d(lambda_d: float) -> None:
    if not (0.0 < lambda_d < 0.5):
        raise SpectrumError(f"lambda_d must lie in (0, 1/2), got {lambda_d}")


def load_psd_grid(path) -> PowerSpectralDensity:
    """Read a tabulated PSD from a two-column text file.

    Format: header line ``# psd v1``, then ``lambda value`` pairs on a
    uniform grid.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "# psd v1":
            raise SpectrumError(f"unrecognised PSD file header: {header!r}")
        data = np.loadtxt(fh)
    if data.ndim != 2 or data.shape[1] != 2:
        raise SpectrumError("PSD file must have two columns: lambda value")
    return PowerSpectralDensity.tabulated(data[:, 0], data[:, 1])


def _quad(func, a: float, b: float, points=None) -> float:
    kwargs = {"epsabs": QUAD_ABS_TOL, "epsrel": 1e-12, "limit": 400}
    if points is not None:
        pts = sorted(p for p in points if a < p < b)
        if pts:
            kwargs["points"] = pts
    with warnings.catch_warnings():
        # roundoff chatter on kinky tabulated integrands; the returned
        # error estimate is vetted below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(func, a, b, **kwargs)
    if not math.isfinite(value) or err > 1e-5:
        raise QuadratureError(
            f"quadrature error estimate {err:.3g} exceeds tolerance")
    return value


def autocorrelation(psd: PowerSpectralDensity, m: int) -> complex:
    """Fading autocorrelation at integer lag m.

    r(m) = int_{-1/2}^{1/2} e^{i 2 pi m lambda} f_H(lambda) d lambda.
    Hermitian in m, r(0) = 1, |r(m)| <= 1.
    """
    band = psd.lambda_d
    re = _quad(lambda x: math.cos(2 * math.pi * m * x) * psd.value(x),
               -band, band)
    im = _quad(lambda x: math.sin(2 * math.pi * m * x) * psd.value(x),
               -band, band)
    return complex(re, im)


def autocorrelation_sequence(psd: PowerSpectralDensity,
                             lags: np.ndarray) -> np.ndarray:
    """Vectorised r(m) over an array of integer lags.

    Closed form for the brickwall shape; for tabulated shapes an FFT
    quadrature on a fine midpoint grid (resolution chosen from the largest
    requested lag).  The per-lag :func:`autocorrelation` quadrature is the
    slow reference these fast paths are tested against.
    """
    lags = np.asarray(lags)
    if psd.shape == BRICKWALL:
        return np.sinc(2.0 * psd.lambda_d * lags).astype(complex)
    max_lag = int(np.max(np.abs(lags))) if lags.size else 0
    # the band-edge jump limits the midpoint rule to O(1/n); keep n large
    n = 1 << max(16, (8 * (max_lag + 1) - 1).bit_length())
    grid = -0.5 + (np.arange(n) + 0.5) / n
    vals = psd.value(grid)
    vals = vals / (vals.sum() / n)  # renormalise the midpoint rule to power 1
    spectrum = np.fft.ifft(vals)    # (1/n) sum_j f_j e^{i 2 pi j m / n}
    phase = np.exp(1j * np.pi * np.asarray(lags) * (1.0 / n - 1.0))
    return phase * spectrum[np.mod(lags, n)]


def folded_spectrum(psd: PowerSpectralDensity, L: int, ell: int,
                    lam) -> complex | np.ndarray:
    """Phase-ell folded spectrum of the L-times undersampled fading.

    f_{H_L,ell}(lambda) = (1/L) sum_{j=0}^{L-1}
        fbar_H((lambda - j)/L) e^{i 2 pi ell (lambda - j)/L}

    with fbar_H the period-1 extension of f_H.  For ell = 0 the value is
    real and non-negative; with no aliasing (L <= 1/(2 lambda_d)) its
    magnitude is (1/L) f_H(lambda/L) for every ell.
    """
    if L < 1:
        raise ValueError(f"pilot period must be >= 1, got {L}")
    if not 0 <= ell < L:
        raise ValueError(f"phase must satisfy 0 <= ell < L, got {ell}")
    lam_arr = np.asarray(lam, dtype=float)
    out = np.zeros(lam_arr.shape, dtype=complex)
    for j in range(L):
        arg = (lam_arr - j) / L
        out += psd.value_periodic(arg) * np.exp(2j * np.pi * ell * arg)
    out /= L
    return out if out.ndim else complex(out)


def _fold_breakpoints(psd: PowerSpectralDensity, L: int) -> list[float]:
    """Band-edge images of all L folds inside [-1/2, 1/2]: quadrature nodes."""
    pts = set()
    for j in range(L):
        for edge in (-psd.lambda_d, psd.lambda_d):
            # lambda = j + L*(edge + m) for the integers m that land inside
            m_lo = math.floor((-0.5 - j) / L - edge) - 1
            m_hi = math.ceil((0.5 - j) / L - edge) + 1
            for m in range(m_lo, m_hi + 1):
                lam = j + L * (edge + m)
                if -0.5 <= lam <= 0.5:
                    pts.add(lam)
    return sorted(pts)


def interp_error_asymptotic(psd: PowerSpectralDensity, L: int, snr: float,
                            ell: int) -> float:
    """Infinite-window interpolation MSE at data phase ell.

    eps^2(ell) = 1 - int_{-1/2}^{1/2}
        SNR |f_{H_L,ell}(lambda)|^2 / (SNR f_{H_L,0}(lambda) + 1) d lambda.

    Defined for any pilot period, including the aliased regime L > L*.
    """
    if snr < 0:
        raise ValueError("snr must be non-negative")
    if snr == 0.0:
        return 1.0
    pts = _fold_breakpoints(psd, L)

    def integrand(lam: float) -> float:
        f_ell = folded_spectrum(psd, L, ell, lam)
        f_zero = folded_spectrum(psd, L, 0, lam).real
        return snr * abs(f_ell) ** 2 / (snr * f_zero + 1.0)

    val = _quad(integrand, -0.5, 0.5, points=pts)
    return float(min(1.0, max(0.0, 1.0 - val)))


def interp_error_nyquist(psd: PowerSpectralDensity, L: int,
                         snr: float) -> float:
    """Aliasing-free interpolation MSE, independent of the data phase.

    eps^2 = 1 - int SNR f_H(lambda)^2 / (SNR f_H(lambda) + L) d lambda,
    valid only for L <= L* = floor(1/(2 lambda_d)).  Satisfies
    SNR * eps^2 <= L at every SNR.
    """
    if L > lstar(psd.lambda_d):
        raise NyquistViolation(
            f"L={L} exceeds L*={lstar(psd.lambda_d)} for "
            f"lambda_d={psd.lambda_d:.6g}")
    if snr < 0:
        raise ValueError("snr must be non-negative")
    if snr == 0.0:
        return 1.0
    band = psd.lambda_d

    def integrand(lam: float) -> float:
        f = psd.value(lam)
        return snr * f * f / (snr * f + L)

    val = _quad(integrand, -band, band)
    return float(min(1.0, max(0.0, 1.0 - val)))


def lstar(lambda_d: float) -> int:
    """Largest pilot period that does not alias: max{L : L <= 1/(2 lambda_d)}.

    The boundary is inclusive; a tiny relative tolerance keeps exact integer
    boundaries (e.g. lambda_d = 1/16) immune to float rounding.
    """
    _check_lambda_d(lambda_d)
    q = 1.0 / (2.0 * lambda_d)
    return int(math.floor(q * (1.0 + 1e-12) + 1e-12))


def doppler_lambda(f_m: float, w_c: float) -> float:
    """Normalised Doppler bandwidth lambda_d = f_m / W_c.

    f_m is the maximum Doppler shift and W_c the coherence bandwidth, both
    in Hz.  Ratios >= 1/2 fall outside the bandlimited fading model.
    """
    if f_m <= 0 or w_c <= 0:
        raise ValueError("f_m and w_c must be positive")
    ratio = f_m / w_c
    if ratio >= 0.5:
        raise SpectrumError(
            f"f_m/W_c = {ratio:.6g} >= 1/2 is outside the fading model")
    return ratio

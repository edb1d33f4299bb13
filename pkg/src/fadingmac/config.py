"""Shared system configuration for the two-user MIMO fading MAC."""

from __future__ import annotations

from dataclasses import dataclass

from .spectra import PowerSpectralDensity


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, operating SNR and pilot/estimator parameters.

    snr is the linear power ratio per transmit antenna (not dB).  L is the
    pilot period in slots; T is the one-sided estimator window in pilot
    periods (the interpolator sees the T past and T future pilot groups).
    """

    n_t1: int
    n_t2: int
    n_r: int
    snr: float
    L: int
    T: int
    psd: PowerSpectralDensity

    def __post_init__(self) -> None:
        if min(self.n_t1, self.n_t2, self.n_r) < 1:
            raise ValueError("antenna counts must be positive")
        if self.snr < 0:
            raise ValueError("snr must be non-negative")
        if self.L < self.n_t1 + self.n_t2:
            raise ValueError(
                f"pilot period L={self.L} cannot fit "
                f"{self.n_t1 + self.n_t2} pilot slots")
        if self.T < 1:
            raise ValueError("estimator window T must be >= 1")

    @property
    def nt_sum(self) -> int:
        return self.n_t1 + self.n_t2

    def with_snr(self, snr: float) -> "SystemConfig":
        return SystemConfig(self.n_t1, self.n_t2, self.n_r, snr,
                            self.L, self.T, self.psd)

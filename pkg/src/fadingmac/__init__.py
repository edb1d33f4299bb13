"""Two-user noncoherent MIMO fading MAC toolkit.

Simulation and analysis of pilot-assisted nearest-neighbour decoding over
the two-user MIMO fading multiple-access channel: fading synthesis, LMMSE
channel interpolation, exhaustive joint decoding, GMI lower bounds, and
exact high-SNR pre-log regions for joint transmission versus TDMA.
"""

__version__ = "0.1.0"

from .config import SystemConfig
from .spectra import PowerSpectralDensity, doppler_lambda, lstar

__all__ = ["SystemConfig", "PowerSpectralDensity", "doppler_lambda",
           "lstar", "__version__"]

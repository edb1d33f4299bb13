"""Stationary bandlimited Gaussian fading and the MAC input/output relation.

Each scalar fading process is zero-mean, unit-variance, proper complex
Gaussian with autocorrelation r(m) fixed by the PSD.  Two synthesis routes
share the same random keys:

* short frames (up to ``DENSE_LIMIT`` slots) factor the exact Toeplitz
  covariance by eigendecomposition, x = U sqrt(max(eig, 0)) w - exact in
  distribution up to float precision.  Bandlimited covariances are heavily
  rank-deficient, which Cholesky cannot handle but an eigenbasis can.
* long realisations use circulant embedding: the autocorrelation sequence
  over an oversized block (>= 8x the requested length) wraps into a
  Hermitian circulant column whose FFT gives spectral weights for

      x = sqrt(N) * ifft( sqrt(gamma) * w ),   w ~ iid CN(0, 1).

  Truncating the slowly decaying autocorrelation can push a few weights
  slightly negative; they are clipped at zero and the power renormalised.
  (The clipping bias is why short frames - where Monte Carlo tests resolve
  correlations to ~1e-3 - take the dense route instead.)

Randomness is counter-style: every link draws from
``numpy.random.default_rng([*seed_key, link_index, block_index])``, so links
and Monte Carlo trials are reproducible and independent regardless of
evaluation order.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .spectra import PowerSpectralDensity, autocorrelation_sequence

#: Frames up to this length use the exact dense factorisation.
DENSE_LIMIT = 2048

_FACTOR_CACHE: dict = {}
_CACHE_MAX = 8


def rng_for(seed, *ids) -> np.random.Generator:
    """Deterministic generator for a (seed, stream ids...) key."""
    key = list(np.atleast_1d(seed).astype(np.uint64)) + [int(i) for i in ids]
    return np.random.default_rng(key)


def _psd_key(psd: PowerSpectralDensity) -> tuple:
    if psd.grid_values is None:
        return (psd.shape, psd.lambda_d)
    digest = hashlib.sha256(psd.grid_values.tobytes()).hexdigest()[:16]
    return (psd.shape, psd.lambda_d, digest)


def _cached(key, build):
    if key not in _FACTOR_CACHE:
        if len(_FACTOR_CACHE) >= _CACHE_MAX:
            _FACTOR_CACHE.pop(next(iter(_FACTOR_CACHE)))
        _FACTOR_CACHE[key] = build()
    return _FACTOR_CACHE[key]


def _dense_factor(psd: PowerSpectralDensity, length: int) -> np.ndarray:
    """B with B B^H = exact Toeplitz covariance of `length` samples."""
    r = autocorrelation_sequence(psd, np.arange(length))
    idx = np.arange(length)
    lag = idx[:, None] - idx[None, :]
    cov = np.where(lag >= 0, r[np.abs(lag)], np.conj(r[np.abs(lag)]))
    eig, vec = np.linalg.eigh(cov)
    return vec * np.sqrt(np.maximum(eig, 0.0))[None, :]


def _embedding_weights(psd: PowerSpectralDensity, length: int,
                       oversize: int) -> np.ndarray:
    n_embed = 1 << max(8, (oversize * length - 1).bit_length())
    half = n_embed // 2
    r = autocorrelation_sequence(psd, np.arange(half + 1))
    col = np.empty(n_embed, dtype=complex)
    col[:half + 1] = r
    col[half + 1:] = np.conj(r[1:half])[::-1]
    eig = np.fft.fft(col).real
    eig = np.maximum(eig, 0.0)
    eig *= n_embed / eig.sum()
    return eig


def gen_fading(psd: PowerSpectralDensity, num_links: int, length: int,
               seed, oversize: int = 8, chunk: int = 256) -> np.ndarray:
    """Sample independent fading processes, shape (num_links, length).

    Identical (seed, link index) keys give bit-identical samples; distinct
    links are statistically independent.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if length <= DENSE_LIMIT:
        factor = _cached(("dense", _psd_key(psd), length),
                         lambda: _dense_factor(psd, length))
        out = np.empty((num_links, length), dtype=complex)
        for start in range(0, num_links, chunk):
            stop = min(start + chunk, num_links)
            w = np.empty((stop - start, length), dtype=complex)
            for i, link in enumerate(range(start, stop)):
                rng = rng_for(seed, link, 0)
                z = rng.standard_normal((2, length))
                w[i] = (z[0] + 1j * z[1]) / np.sqrt(2.0)
            out[start:stop] = w @ factor.T
        return out

    eig = _cached(("circ", _psd_key(psd), length, oversize),
                  lambda: _embedding_weights(psd, length, oversize))
    n_embed = eig.size
    amp = np.sqrt(eig) * np.sqrt(n_embed / 2.0)
    out = np.empty((num_links, length), dtype=complex)
    for start in range(0, num_links, chunk):
        stop = min(start + chunk, num_links)
        w = np.empty((stop - start, n_embed), dtype=complex)
        for i, link in enumerate(range(start, stop)):
            rng = rng_for(seed, link, 0)
            z = rng.standard_normal((2, n_embed))
            w[i] = z[0] + 1j * z[1]
        out[start:stop] = np.fft.ifft(amp * w, axis=1)[:, :length]
    return out


def dump_fading(path, realization: np.ndarray, seed: int) -> None:
    """Binary dump of a realization: magic ``FADE1``, dims, seed, then
    row-major little-endian complex64 samples."""
    arr = np.ascontiguousarray(realization, dtype=np.complex64)
    if arr.ndim != 2:
        raise ValueError("expected a (links, length) realization")
    with open(path, "wb") as fh:
        fh.write(b"FADE1")
        np.array([arr.shape[0], arr.shape[1], int(seed)],
                 dtype="<u8").tofile(fh)
        arr.astype("<c8").tofile(fh)


def load_fading(path) -> tuple[np.ndarray, int]:
    """Read a :func:`dump_fading` file; returns (realization, seed)."""
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != b"FADE1":
            raise ValueError(f"not a fading dump (magic {magic!r})")
        links, length, seed = np.fromfile(fh, dtype="<u8", count=3)
        data = np.fromfile(fh, dtype="<c8", count=int(links) * int(length))
    return data.reshape(int(links), int(length)).astype(complex), int(seed)


def gen_noise(num_streams: int, length: int, seed) -> np.ndarray:
    """i.i.d. circularly-symmetric unit-variance Gaussian noise,
    shape (num_streams, length)."""
    out = np.empty((num_streams, length), dtype=complex)
    for i in range(num_streams):
        rng = rng_for(seed, i, 1)
        z = rng.standard_normal((2, length))
        out[i] = (z[0] + 1j * z[1]) / np.sqrt(2.0)
    return out


def apply_channel(x1: np.ndarray, x2: np.ndarray, h1: np.ndarray,
                  h2: np.ndarray, snr: float, noise: np.ndarray) -> np.ndarray:
    """One channel use: Y = sqrt(SNR) H1 x1 + sqrt(SNR) H2 x2 + Z."""
    h1 = np.atleast_2d(np.asarray(h1, dtype=complex))
    h2 = np.atleast_2d(np.asarray(h2, dtype=complex))
    x1 = np.atleast_1d(np.asarray(x1, dtype=complex))
    x2 = np.atleast_1d(np.asarray(x2, dtype=complex))
    noise = np.atleast_1d(np.asarray(noise, dtype=complex))
    if h1.shape[1] != x1.size or h2.shape[1] != x2.size:
        raise ValueError("fading matrix and input dimensions disagree")
    if h1.shape[0] != h2.shape[0] or noise.size != h1.shape[0]:
        raise ValueError("receive dimensions disagree")
    root = np.sqrt(snr)
    return root * (h1 @ x1) + root * (h2 @ x2) + noise

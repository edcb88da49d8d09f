"""Stochastic verification path for the analytic noise spectra.

Quadrature fluctuations are sampled semiclassically: a real stationary
Gaussian series is synthesized whose two-sided PSD equals the
homodyne-normalized quadrature spectrum (unit shot-noise floor included),
the heterodyne beat multiplies it by ``sqrt(2) cos(Omega t + dphi)``, and
an averaged periodogram estimates the output PSD.  For Gaussian states
and quadrature measurements this reproduces the quantum spectra in
distribution, and the floor normalization makes the calibration
unambiguous: a unit-variance white input always estimates to PSD 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AliasRisk, InsufficientData, NonPhysicalSpectrum
from .field import HeterodyneConfig, OpoParams, opo_spectra
from .spectral import (HETERODYNE_FLOOR, HOMODYNE_FLOOR, SpectralDensity,
                       quadrature_noise_spectrum)

WINDOWS = ("hann", "rectangular")

# Negative PSD values beyond this are rejected rather than clipped.
_NEGATIVE_TOL = 1e-12


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real series in floor-normalized amplitude units."""

    sample_rate: float
    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if len(self.samples) < 2:
            raise ValueError("need at least 2 samples")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) / self.sample_rate


@dataclass(frozen=True)
class WelchConfig:
    """Averaged-periodogram settings."""

    segment_length: int = 4096
    overlap: float = 0.5
    window: str = "hann"
    n_segments_min: int = 8

    def __post_init__(self):
        if self.segment_length < 8:
            raise ValueError(f"segment_length must be >= 8, got {self.segment_length}")
        if not 0.0 <= self.overlap < 1.0:
            raise ValueError(f"overlap must lie in [0, 1), got {self.overlap}")
        if self.window not in WINDOWS:
            raise ValueError(f"window must be one of {WINDOWS}, got {self.window!r}")
        if self.n_segments_min < 1:
            raise ValueError("n_segments_min must be positive")

    @property
    def step(self) -> int:
        return max(1, int(round(self.segment_length * (1.0 - self.overlap))))

    def total_samples(self, n_segments: int) -> int:
        """Series length that yields exactly ``n_segments`` segments."""
        return self.segment_length + self.step * (n_segments - 1)


def synthesize_quadrature(psd, n: int, fs: float, seed) -> TimeSeries:
    """Real Gaussian series with prescribed two-sided PSD.

    ``psd`` is evaluated on the nonnegative FFT frequencies (rad/s);
    an even spectrum is assumed.  Circularly-symmetric Gaussian Fourier
    coefficients are drawn with variance proportional to the PSD,
    Hermitian symmetry is imposed, and the inverse transform returns a
    real series whose averaged periodogram converges to ``psd``.
    """
    if n < 2:
        raise ValueError("need at least 2 samples")
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=1.0 / fs)
    s = np.asarray(psd(omega), dtype=float)
    if np.min(s) < -_NEGATIVE_TOL:
        raise NonPhysicalSpectrum(
            f"target PSD reaches {np.min(s)} on the synthesis grid"
        )
    s = np.clip(s, 0.0, None)

    rng = np.random.default_rng(seed)
    re = rng.standard_normal(len(s))
    im = rng.standard_normal(len(s))
    coef = np.sqrt(n * s / 2.0) * (re + 1j * im)
    coef[0] = np.sqrt(n * s[0]) * re[0]  # DC bin is real
    if n % 2 == 0:
        coef[-1] = np.sqrt(n * s[-1]) * re[-1]  # Nyquist bin is real
    samples = np.fft.irfft(coef, n)
    return TimeSeries(sample_rate=fs, samples=samples, seed=seed)


def synthesize_photocurrent(x: TimeSeries, Omega: float, dphi: float = 0.0) -> TimeSeries:
    """Apply the heterodyne beat: y(t) = sqrt(2) cos(Omega t + dphi) x(t).

    The sqrt(2) gain makes the modulation floor-preserving: the time
    average of 2 cos^2 is 1, so a unit-floor input stays at unit floor.
    """
    if Omega >= 0.4 * 2.0 * np.pi * x.sample_rate:
        raise AliasRisk(
            f"Omega = {Omega} too close to the sampling band "
            f"(limit {0.4 * 2 * np.pi * x.sample_rate})"
        )
    y = np.sqrt(2.0) * np.cos(Omega * x.times + dphi) * x.samples
    return TimeSeries(sample_rate=x.sample_rate, samples=y, seed=x.seed)


def _window(cfg: WelchConfig) -> np.ndarray:
    m = cfg.segment_length
    if cfg.window == "hann":
        # periodic form, appropriate for spectral averaging
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(m) / m)
    return np.ones(m)


def welch_psd(y: TimeSeries, cfg: WelchConfig,
              normalization: str = HETERODYNE_FLOOR) -> SpectralDensity:
    """Two-sided averaged-periodogram PSD estimate.

    Normalized so a unit-variance white input estimates to 1 in every
    bin.  The per-bin relative standard error is roughly
    ``1/sqrt(n_segments)`` and is reported through ``sigma``.
    """
    n = len(y.samples)
    m, step = cfg.segment_length, cfg.step
    if n < m:
        raise InsufficientData(f"series of {n} samples shorter than one segment ({m})")
    n_segments = 1 + (n - m) // step
    if n_segments < cfg.n_segments_min:
        raise InsufficientData(
            f"only {n_segments} segments available, need {cfg.n_segments_min}"
        )
    win = _window(cfg)
    norm = m * float(np.mean(win ** 2))
    acc = np.zeros(m)
    for k in range(n_segments):
        seg = y.samples[k * step:k * step + m]
        acc += np.abs(np.fft.fft(win * seg)) ** 2
    psd = np.fft.fftshift(acc / (n_segments * norm))
    omega = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(m, d=1.0 / y.sample_rate))
    sigma = psd / np.sqrt(n_segments)
    meta = {"n_segments": n_segments, "segment_length": m,
            "overlap": cfg.overlap, "window": cfg.window,
            "sample_rate": y.sample_rate, "seed": y.seed}
    return SpectralDensity(omega, psd, normalization, meta, sigma=sigma)


def monte_carlo_homodyne(params: OpoParams, phibar: float, fs: float,
                         n_segments: int, welch: WelchConfig, seed) -> SpectralDensity:
    """Monte-Carlo homodyne spectrum: synthesize the quadrature, estimate its PSD."""
    s = quadrature_noise_spectrum(opo_spectra(params), phibar, params.eta)
    n = welch.total_samples(n_segments)
    x = synthesize_quadrature(s, n, fs, seed)
    return welch_psd(x, welch, normalization=HOMODYNE_FLOOR)


def monte_carlo_heterodyne(params: OpoParams, cfg: HeterodyneConfig, fs: float,
                           n_segments: int, welch: WelchConfig, seed) -> SpectralDensity:
    """Monte-Carlo heterodyne spectrum for the parametric-oscillator source.

    Pipeline: squeezing spectra -> homodyne-normalized quadrature PSD at
    the configured phibar -> time-series synthesis -> heterodyne beat ->
    averaged periodogram.  Output bins are directly comparable with the
    analytic heterodyne spectrum evaluated on the same grid.
    """
    s = quadrature_noise_spectrum(opo_spectra(params), cfg.phibar, params.eta)
    n = welch.total_samples(n_segments)
    x = synthesize_quadrature(s, n, fs, seed)
    y = synthesize_photocurrent(x, cfg.Omega, cfg.dphi)
    out = welch_psd(y, welch, normalization=HETERODYNE_FLOOR)
    snapshot = dict(out.config_snapshot)
    snapshot.update({"gamma": params.gamma, "epsilon": params.epsilon,
                     "eta": params.eta, "Omega": cfg.Omega,
                     "phibar": cfg.phibar, "dphi": cfg.dphi})
    return SpectralDensity(out.omega_grid, out.chi_normalized, out.normalization,
                           snapshot, sigma=out.sigma)


def edge_bin_mask(omega: np.ndarray, Omega: float, resolution: float) -> np.ndarray:
    """True for bins farther than one resolution width from +/-Omega.

    Bins adjacent to the beat frequency see the spectral leakage of the
    deterministic modulation and are excluded from oracle comparisons.
    """
    omega = np.asarray(omega, dtype=float)
    return (np.abs(omega - Omega) > resolution) & (np.abs(omega + Omega) > resolution)

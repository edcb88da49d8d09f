"""Analytic spectral densities of the photocurrent fluctuations.

All public results are floor-normalized: the heterodyne spectrum is
divided by ``2 eta E^2 |K(w)|^2`` and the homodyne spectrum by
``eta E^2 |K(w)|^2``, so the shot-noise level is 1 in either convention
and the detector response drops out of every plotted quantity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPhysicalSpectrum
from .field import DetectorModel, HeterodyneConfig, OpoParams, QuadratureSpectra, check_causal

# Frequency bins more negative than this are treated as a physicality
# violation of the input spectra rather than rounding noise.
PHYSICALITY_TOL = 1e-9

HETERODYNE_FLOOR = "heterodyne_floor"
HOMODYNE_FLOOR = "homodyne_floor"


@dataclass(frozen=True)
class SpectralDensity:
    """Floor-normalized photocurrent noise spectrum on a frequency grid.

    ``normalization`` records which floor convention divided out the
    absolute scale; ``config_snapshot`` the parameters that produced the
    curve.  ``sigma`` optionally carries per-bin statistical error bars
    (Monte-Carlo estimates only).
    """

    omega_grid: np.ndarray
    chi_normalized: np.ndarray
    normalization: str
    config_snapshot: dict = field(default_factory=dict)
    sigma: np.ndarray | None = None

    def minimum(self) -> tuple[float, float]:
        """Return (omega, chi) at the grid minimum."""
        i = int(np.argmin(self.chi_normalized))
        return float(self.omega_grid[i]), float(self.chi_normalized[i])


def frequency_grid(omega_max: float, points: int = 1001, include=()) -> np.ndarray:
    """Symmetric two-sided grid on [-omega_max, omega_max].

    Any frequencies in ``include`` (and their negatives) are inserted
    exactly; the extrema of split heterodyne spectra sit at +/-Omega, so
    grids for those curves should include the offset.
    """
    if not omega_max > 0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    if points < 3:
        raise ValueError(f"need at least 3 grid points, got {points}")
    grid = np.linspace(-omega_max, omega_max, int(points))
    extra = []
    for w in include:
        for s in (w, -w):
            if abs(s) <= omega_max:
                extra.append(s)
    if extra:
        grid = np.unique(np.concatenate([grid, np.asarray(extra, dtype=float)]))
    return grid


def _check_eta(eta: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")


def _check_physical(chi: np.ndarray) -> None:
    low = float(np.min(chi))
    if low < -PHYSICALITY_TOL:
        raise NonPhysicalSpectrum(
            f"normalized spectrum reaches {low}, below -{PHYSICALITY_TOL}; "
            "input quadrature spectra are inconsistent"
        )


def quadrature_noise_spectrum(spectra: QuadratureSpectra, phibar: float, eta: float):
    """Homodyne-normalized noise spectrum of the measured quadrature.

    Returns the evaluable function

        S(w) = 1 + eta [phi11 cos^2(phibar) + phi22 sin^2(phibar)
                        + (phi12 + phi21) sin(phibar) cos(phibar)](w).

    Branches with an exactly zero trigonometric coefficient are never
    evaluated, so e.g. the anti-squeezed branch of a source at threshold
    does not poison a pure amplitude-quadrature measurement.
    """
    _check_eta(eta)
    c11 = np.cos(phibar) ** 2
    c22 = np.sin(phibar) ** 2
    c12 = np.sin(phibar) * np.cos(phibar)

    def spectrum(w):
        w = np.asarray(w, dtype=float)
        total = np.ones_like(w)
        if c11 != 0.0:
            total = total + eta * c11 * spectra.phi11(w)
        if c22 != 0.0:
            total = total + eta * c22 * spectra.phi22(w)
        if c12 != 0.0:
            total = total + eta * c12 * spectra.phi12_plus_phi21(w)
        return total

    return spectrum


def heterodyne_spectrum(spectra: QuadratureSpectra, cfg: HeterodyneConfig,
                        eta: float, omega_grid) -> SpectralDensity:
    """Floor-normalized heterodyne noise spectrum on a grid.

    chi(w) = 1 + (eta/4) [phi11(w+W) + phi11(w-W)] (1 + cos 2 phibar)
               + (eta/4) [phi22(w+W) + phi22(w-W)] (1 - cos 2 phibar)
               + (eta/4) [(phi12+phi21)(w+W) + (phi12+phi21)(w-W)] sin 2 phibar

    with W the heterodyne offset.  Equivalently, the half-sum of the
    homodyne-normalized quadrature spectrum shifted by +/-W.
    """
    _check_eta(eta)
    omega = np.asarray(omega_grid, dtype=float)
    s = quadrature_noise_spectrum(spectra, cfg.phibar, eta)
    chi = 0.5 * (s(omega + cfg.Omega) + s(omega - cfg.Omega))
    _check_physical(chi)
    snapshot = {"Omega": cfg.Omega, "phibar": cfg.phibar, "dphi": cfg.dphi,
                "amplitude": cfg.amplitude, "eta": eta}
    return SpectralDensity(omega, chi, HETERODYNE_FLOOR, snapshot)


def homodyne_spectrum(spectra: QuadratureSpectra, phibar: float, eta: float,
                      omega_grid) -> SpectralDensity:
    """Floor-normalized homodyne noise spectrum; the Omega -> 0 heterodyne limit."""
    _check_eta(eta)
    omega = np.asarray(omega_grid, dtype=float)
    chi = quadrature_noise_spectrum(spectra, phibar, eta)(omega)
    _check_physical(chi)
    snapshot = {"phibar": phibar, "eta": eta}
    return SpectralDensity(omega, chi, HOMODYNE_FLOOR, snapshot)


def opo_heterodyne_closed_form(params: OpoParams, Omega: float,
                               omega_grid) -> SpectralDensity:
    """Closed-form heterodyne spectrum of the parametric-oscillator source.

    For the amplitude-quadrature lock (phibar = 0) the normalized spectrum
    is a pair of squeezing Lorentzians split by the heterodyne offset:

        chi(w) = 1 - eps gamma / ((gamma/2 + eps)^2 + (w + Omega)^2)
                   - eps gamma / ((gamma/2 + eps)^2 + (w - Omega)^2)

    The detector efficiency cancels between the spectrum and the floor.
    """
    if Omega < 0:
        raise ValueError(f"Omega must be >= 0, got {Omega}")
    omega = np.asarray(omega_grid, dtype=float)
    kp = params.gamma / 2.0 + params.epsilon
    num = params.epsilon * params.gamma
    chi = (1.0
           - num / (kp * kp + (omega + Omega) ** 2)
           - num / (kp * kp + (omega - Omega) ** 2))
    _check_physical(chi)
    snapshot = {"gamma": params.gamma, "epsilon": params.epsilon,
                "eta": params.eta, "Omega": Omega, "phibar": 0.0}
    return SpectralDensity(omega, chi, HETERODYNE_FLOOR, snapshot)


def detector_response(det: DetectorModel, omega, *, window: float | None = None,
                      samples: int = 200001):
    """Frequency response K(w) of the photoelectron pulse.

    Uses the analytic response when the model carries one; otherwise
    integrates ``pulse(t) exp(i w t)`` over ``[0, window]`` by composite
    trapezoid, rescaled so that K(0) equals the model charge exactly.
    Raises NonCausalPulse when the pulse has support at negative times.
    """
    check_causal(det)
    w = np.asarray(omega, dtype=float)
    if det.response is not None:
        return np.asarray(det.response(w), dtype=complex)
    if window is None:
        raise ValueError("numeric response needs an integration window")
    t = np.linspace(0.0, float(window), int(samples))
    j = np.asarray(det.pulse(t), dtype=float)
    raw0 = np.trapezoid(j, t)
    if raw0 <= 0:
        raise ValueError("pulse mass vanished on the integration window")
    flat = w.ravel()
    out = np.empty(flat.shape, dtype=complex)
    for i, wi in enumerate(flat):  # one frequency at a time, bounded memory
        out[i] = np.trapezoid(j * np.exp(1j * wi * t), t)
    out *= det.charge / raw0
    return out.reshape(w.shape)

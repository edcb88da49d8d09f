"""Field model for dual-local-oscillator (balanced heterodyne) detection.

Conventions used throughout the package:

* The optical carrier is factored out everywhere (rotating frame).  A
  detected mode is described by its mean amplitude ``<a>`` plus the
  stationary Gaussian fluctuation kernels

      g11(tau) = <da+(t) da(t+tau)>     (phase-insensitive, Hermitian)
      g20(tau) = <da+(t) da+(t+tau)>    (phase-sensitive, even in tau)

  in photon-flux units.  ``da`` denotes the zero-mean fluctuation part of
  the mode operator, ``da+`` its conjugate.
* Spectra are two-sided in angular frequency and use the transform
  ``integral dtau f(tau) exp(+i w tau)``.
* ``phibar = (phi1 + phi2)/2 - beta`` selects the measured quadrature and
  ``dphi = (phi2 - phi1)/2`` sets the beat phase of the heterodyne signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonCausalPulse, ThresholdDivergence

SPEED_OF_LIGHT = 299792458.0  # m/s


@dataclass(frozen=True)
class OpoParams:
    """Below-threshold parametric-oscillator squeezing source.

    Parameters
    ----------
    gamma:
        Cavity damping rate, rad/s.
    epsilon:
        Effective pump rate, rad/s.  ``epsilon = gamma/2`` is the
        oscillation threshold; values above it are rejected.
    eta:
        Detector quantum-efficiency parameter, in (0, 1].
    """

    gamma: float
    epsilon: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.epsilon <= self.gamma / 2.0:
            raise ValueError(
                f"epsilon must lie in [0, gamma/2] = [0, {self.gamma / 2.0}], "
                f"got {self.epsilon}"
            )
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")

    @classmethod
    def from_cavity(cls, reflectivity, length, epsilon, eta=1.0,
                    light_speed=SPEED_OF_LIGHT):
        """Build from mirror reflectivity and cavity length: gamma = (1-R)c/l."""
        gamma = (1.0 - reflectivity) * light_speed / length
        return cls(gamma=gamma, epsilon=epsilon, eta=eta)

    @property
    def threshold_distance(self) -> float:
        """Conjugate pole ``gamma/2 - epsilon``; zero exactly at threshold."""
        return self.gamma / 2.0 - self.epsilon


@dataclass(frozen=True)
class HeterodyneConfig:
    """Dual local-oscillator geometry.

    ``omega0`` is the optical carrier (bookkeeping only; it cancels from
    every observable).  The oscillators sit at ``omega0 +/- Omega`` with
    global phases ``phi1``/``phi2`` and common amplitude ``amplitude`` in
    sqrt(photons/s).  ``beta`` is the quadrature reference phase of the
    detected mode.

    ``Omega = 0`` is accepted so the homodyne limit can be driven through
    the same configuration type; operations that genuinely need a beat
    note check for a positive offset themselves.
    """

    Omega: float
    phi1: float = 0.0
    phi2: float = 0.0
    beta: float = 0.0
    amplitude: float = 1.0
    omega0: float = 0.0

    def __post_init__(self):
        if self.Omega < 0:
            raise ValueError(f"Omega must be >= 0, got {self.Omega}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def phibar(self) -> float:
        """Quadrature-selection phase (phi1 + phi2)/2 - beta."""
        return (self.phi1 + self.phi2) / 2.0 - self.beta

    @property
    def dphi(self) -> float:
        """Oscillator phase difference (phi2 - phi1)/2."""
        return (self.phi2 - self.phi1) / 2.0


@dataclass(frozen=True)
class GaussianFieldState:
    """Gaussian state of the detected mode: mean amplitude plus kernels.

    ``gamma11``/``gamma20`` are evaluable kernels of the time lag (seconds),
    complex-valued, in photons/s.  ``gamma11`` must satisfy
    ``gamma11(-tau) = conj(gamma11(tau))``; ``gamma20`` is even in tau for
    the source models used here.  ``beta`` fixes the quadrature reference.
    """

    mean_amplitude: complex
    gamma11: Callable
    gamma20: Callable
    beta: float = 0.0

    @property
    def fluctuation_flux(self) -> float:
        """Mean photon flux carried by the fluctuations, ``Re g11(0)``."""
        return float(np.real(self.gamma11(0.0)))


def vacuum_state(beta: float = 0.0) -> GaussianFieldState:
    """Zero-mean state with vanishing normally-ordered kernels."""
    zero = lambda tau: np.zeros_like(np.asarray(tau, dtype=float)) + 0j
    return GaussianFieldState(0j, zero, zero, beta)


def coherent_state(mean_amplitude: complex, beta: float = 0.0) -> GaussianFieldState:
    """Coherent state: nonzero mean, vanishing normally-ordered kernels."""
    zero = lambda tau: np.zeros_like(np.asarray(tau, dtype=float)) + 0j
    return GaussianFieldState(complex(mean_amplitude), zero, zero, beta)


@dataclass(frozen=True)
class QuadratureSpectra:
    """Two-sided squeezing spectra of the quadrature fluctuations.

    Each field is an evaluable function of angular frequency (rad/s),
    real-valued, normalized so that ``1 + eta * phi`` is the corresponding
    floor-normalized homodyne noise level.
    """

    phi11: Callable
    phi22: Callable
    phi12_plus_phi21: Callable


@dataclass(frozen=True)
class QuadratureKernels:
    """Real correlation kernels of the two quadrature operators.

    ``k11``/``k22`` are the auto-correlations of the amplitude and phase
    quadratures, ``k12``/``k21`` the cross terms, all functions of lag.
    """

    k11: Callable
    k22: Callable
    k12: Callable
    k21: Callable


@dataclass(frozen=True)
class DetectorModel:
    """Photoelectron pulse model.

    ``pulse(t)`` is the single-photoelectron current pulse in amperes,
    identically zero for ``t < 0``; ``charge`` its integral.  ``response``
    optionally carries the analytic frequency response K(w); when absent
    the response is obtained by numerical quadrature.
    """

    pulse: Callable
    charge: float
    response: Callable | None = None

    def __post_init__(self):
        if not self.charge > 0:
            raise ValueError(f"charge must be positive, got {self.charge}")


def flat_detector(charge: float = 1.0, width: float = 1e-9) -> DetectorModel:
    """Idealized short-pulse detector with flat response K(w) = charge.

    The pulse is a causal box of negligible ``width``, kept only so the
    pulse interface stays exercisable; the model's defining property is
    the flat response.
    """

    def pulse(t):
        t = np.asarray(t, dtype=float)
        return np.where((t >= 0.0) & (t < width), charge / width, 0.0)

    return DetectorModel(pulse=pulse, charge=charge,
                         response=lambda w: charge * np.ones_like(np.asarray(w, dtype=float)) + 0j)


def single_pole_detector(charge: float = 1.0, tau_d: float = 1.0) -> DetectorModel:
    """Exponential pulse j(t) = (q/tau_d) exp(-t/tau_d), K(w) = q/(1 - i w tau_d)."""
    if not tau_d > 0:
        raise ValueError(f"tau_d must be positive, got {tau_d}")

    def pulse(t):
        t = np.asarray(t, dtype=float)
        return np.where(t >= 0.0, (charge / tau_d) * np.exp(-np.clip(t, 0.0, None) / tau_d), 0.0)

    def response(w):
        return charge / (1.0 - 1j * np.asarray(w, dtype=float) * tau_d)

    return DetectorModel(pulse=pulse, charge=charge, response=response)


def check_causal(det: DetectorModel, probe_times=(-1e-12, -1e-6, -1e-3, -1.0)) -> None:
    """Raise NonCausalPulse if the pulse is nonzero at sampled negative times."""
    values = np.asarray(det.pulse(np.asarray(probe_times, dtype=float)))
    if np.any(values != 0.0):
        raise NonCausalPulse("detector pulse has support at t < 0")


def quadrature_mean(state: GaussianFieldState, phibar: float) -> float:
    """Mean of the rotated quadrature X(phibar) = X cos(phibar) + P sin(phibar).

    With X = a exp(-i beta) + a+ exp(i beta) and P its conjugate quadrature,
    the mean is 2 Re(<a> e^{-i beta}) cos(phibar) + 2 Im(<a> e^{-i beta}) sin(phibar).
    """
    rotated = state.mean_amplitude * np.exp(-1j * state.beta)
    return 2.0 * (rotated.real * np.cos(phibar) + rotated.imag * np.sin(phibar))


def quadrature_mean_slope(state: GaussianFieldState, phibar: float) -> float:
    """Derivative of ``quadrature_mean`` with respect to phibar."""
    rotated = state.mean_amplitude * np.exp(-1j * state.beta)
    return 2.0 * (-rotated.real * np.sin(phibar) + rotated.imag * np.cos(phibar))


def opo_spectra(params: OpoParams) -> QuadratureSpectra:
    """Squeezing spectra of the below-threshold parametric oscillator.

    The squeezed branch is the Lorentzian

        phi11(w) = -(2/eta) eps gamma / ((gamma/2 + eps)^2 + w^2)

    and the anti-squeezed branch carries the conjugate pole,

        phi22(w) = +(2/eta) eps gamma / ((gamma/2 - eps)^2 + w^2),

    which is the unique minimum-uncertainty partner:
    (1 + eta phi11)(1 + eta phi22) = 1 at every frequency.  The cross
    spectrum vanishes for this source.  At threshold (eps = gamma/2) the
    anti-squeezed branch diverges at w = 0 and its evaluation there raises
    ThresholdDivergence.
    """
    gamma, eps, eta = params.gamma, params.epsilon, params.eta
    kp = gamma / 2.0 + eps
    km = gamma / 2.0 - eps

    def phi11(w):
        w = np.asarray(w, dtype=float)
        return -(2.0 / eta) * eps * gamma / (kp * kp + w * w)

    def phi22(w):
        w = np.asarray(w, dtype=float)
        if km == 0.0 and np.any(w == 0.0):
            raise ThresholdDivergence(
                "anti-squeezed spectrum diverges at w = 0 for a pump at threshold"
            )
        return (2.0 / eta) * eps * gamma / (km * km + w * w)

    def cross(w):
        return np.zeros_like(np.asarray(w, dtype=float))

    return QuadratureSpectra(phi11=phi11, phi22=phi22, phi12_plus_phi21=cross)


def opo_field_state(params: OpoParams, beta: float = 0.0,
                    mean_amplitude: complex = 0j) -> GaussianFieldState:
    """Time-domain kernels of the parametric-oscillator output.

    Inverse transforms of the Lorentzian spectra:

        g11(tau) = (eps gamma / 4 eta) [exp(-km|tau|)/km - exp(-kp|tau|)/kp]
        g20(tau) = -(eps gamma / 4 eta) [exp(-km|tau|)/km + exp(-kp|tau|)/kp]
                   * exp(-2 i beta)

    with kp = gamma/2 + eps and km = gamma/2 - eps.  Requires a pump
    strictly below threshold (km > 0); at threshold the anti-squeezed
    kernel has no stationary limit.
    """
    gamma, eps, eta = params.gamma, params.epsilon, params.eta
    kp = gamma / 2.0 + eps
    km = gamma / 2.0 - eps
    if eps > 0.0 and km <= 0.0:
        raise ThresholdDivergence(
            "time-domain kernels require a pump strictly below threshold"
        )
    scale = eps * gamma / (4.0 * eta)
    phase = np.exp(-2j * beta)

    if eps == 0.0:
        zero = lambda tau: np.zeros_like(np.asarray(tau, dtype=float)) + 0j
        return GaussianFieldState(complex(mean_amplitude), zero, zero, beta)

    def g11(tau):
        at = np.abs(np.asarray(tau, dtype=float))
        return scale * (np.exp(-km * at) / km - np.exp(-kp * at) / kp) + 0j

    def g20(tau):
        at = np.abs(np.asarray(tau, dtype=float))
        return -scale * (np.exp(-km * at) / km + np.exp(-kp * at) / kp) * phase

    return GaussianFieldState(complex(mean_amplitude), g11, g20, beta)


def gammas_to_quadrature_correlations(state: GaussianFieldState) -> QuadratureKernels:
    """Convert the complex field kernels to the four quadrature kernels.

    Inverts the linear relations

        Re g11          = (k11 + k22)/4
        Im g11          = (k12 - k21)/4
        Re[g20 e^{2ib}] = (k11 - k22)/4
        Im[g20 e^{2ib}] = -(k12 + k21)/4
    """
    b2 = np.exp(2j * state.beta)
    g11, g20 = state.gamma11, state.gamma20

    def k11(tau):
        return 2.0 * np.real(g11(tau)) + 2.0 * np.real(g20(tau) * b2)

    def k22(tau):
        return 2.0 * np.real(g11(tau)) - 2.0 * np.real(g20(tau) * b2)

    def k12(tau):
        return 2.0 * np.imag(g11(tau)) - 2.0 * np.imag(g20(tau) * b2)

    def k21(tau):
        return -2.0 * np.imag(g11(tau)) - 2.0 * np.imag(g20(tau) * b2)

    return QuadratureKernels(k11=k11, k22=k22, k12=k12, k21=k21)


def quadrature_correlations_to_gammas(kernels: QuadratureKernels,
                                      beta: float = 0.0) -> GaussianFieldState:
    """Forward map from quadrature kernels back to the complex field kernels.

    Composing with ``gammas_to_quadrature_correlations`` is the identity
    (up to rounding) in either direction.  The returned state carries zero
    mean amplitude.
    """
    phase = np.exp(-2j * beta)

    def g11(tau):
        return ((kernels.k11(tau) + kernels.k22(tau)) / 4.0
                + 1j * (kernels.k12(tau) - kernels.k21(tau)) / 4.0)

    def g20(tau):
        return ((kernels.k11(tau) - kernels.k22(tau)) / 4.0
                - 1j * (kernels.k12(tau) + kernels.k21(tau)) / 4.0) * phase

    return GaussianFieldState(0j, g11, g20, beta)

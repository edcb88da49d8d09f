"""balhet: balanced-heterodyne detection of squeezed optical signals.

Analytic photocurrent noise spectra for dual-local-oscillator detection,
an independent stochastic verification engine, and a simulation of the
coherent-modulation phase lock that holds the measured quadrature.
"""

__version__ = "0.1.0"

from .errors import (AliasRisk, BalhetError, ConfigInvalid, DemodClash,
                     InsufficientAveraging, InsufficientData, LockFailure,
                     NonCausalPulse, NonPhysicalSpectrum, ThresholdDivergence)
from .field import (DetectorModel, GaussianFieldState, HeterodyneConfig,
                    OpoParams, QuadratureKernels, QuadratureSpectra,
                    coherent_state, flat_detector,
                    gammas_to_quadrature_correlations, opo_field_state,
                    opo_spectra, quadrature_correlations_to_gammas,
                    quadrature_mean, quadrature_mean_slope,
                    single_pole_detector, vacuum_state)
from .spectral import (SpectralDensity, detector_response, frequency_grid,
                       heterodyne_spectrum, homodyne_spectrum,
                       opo_heterodyne_closed_form, quadrature_noise_spectrum)
from .correlation import (IntensityCorrelation, TimeAverage,
                          intensity_correlation, intensity_correlation_grid,
                          lambda_prime, lambda_prime_quadrature_form,
                          strong_oscillator_background, time_average_reduce,
                          wick_oracle)
from .montecarlo import (TimeSeries, WelchConfig, edge_bin_mask,
                         monte_carlo_heterodyne, monte_carlo_homodyne,
                         synthesize_photocurrent, synthesize_quadrature,
                         welch_psd)
from .locking import (BesselTruncation, LockConfig, LockTrajectory,
                      bessel_truncation, closed_loop_simulate,
                      error_line_prediction, error_line_projection,
                      error_signal, mean_photocurrent)

__all__ = [name for name in dir() if not name.startswith("_")]

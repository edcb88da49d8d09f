"""Field model: quadrature algebra, source spectra, kernel conversions."""

import numpy as np
import pytest

import balhet as bh
from balhet.errors import ThresholdDivergence


def random_state(rng, beta=None):
    """Kernel pair with the model symmetries (g11 Hermitian, g20 even)."""
    if beta is None:
        beta = rng.uniform(-np.pi, np.pi)
    a1, a2 = rng.uniform(0.3, 2.0, size=2)
    b1, b2 = rng.uniform(0.2, 3.0, size=2)
    c1 = rng.normal() + 1j * rng.normal()
    c2 = rng.normal() + 1j * rng.normal()

    def g11(tau):
        at = np.abs(tau)
        return np.exp(-a1 * at) * (c1.real * np.cos(b1 * tau)
                                   + 1j * c1.imag * np.sin(b1 * tau))

    def g20(tau):
        at = np.abs(tau)
        return c2 * np.exp(-a2 * at) * np.cos(b2 * tau)

    mean = rng.normal() + 1j * rng.normal()
    return bh.GaussianFieldState(mean, g11, g20, beta)


class TestQuadratureMean:
    def test_vacuum_is_zero_for_any_angle(self):
        state = bh.vacuum_state()
        for phibar in (0.0, 0.3, np.pi / 2, 2.0):
            assert bh.quadrature_mean(state, phibar) == 0.0

    def test_unit_amplitude(self):
        state = bh.coherent_state(1.0 + 0j, beta=0.0)
        assert bh.quadrature_mean(state, 0.0) == pytest.approx(2.0, abs=1e-15)
        assert bh.quadrature_mean(state, np.pi / 2) == pytest.approx(0.0, abs=1e-15)

    def test_general_angle_matches_direct_sum(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            m = rng.normal() + 1j * rng.normal()
            beta = rng.uniform(-np.pi, np.pi)
            phibar = rng.uniform(-np.pi, np.pi)
            state = bh.coherent_state(m, beta=beta)
            # direct evaluation: <a e^{-i(beta+phibar)}> + c.c.
            expected = 2.0 * np.real(m * np.exp(-1j * (beta + phibar)))
            assert bh.quadrature_mean(state, phibar) == pytest.approx(expected, rel=1e-13, abs=1e-13)

    def test_slope_matches_finite_difference(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            state = bh.coherent_state(rng.normal() + 1j * rng.normal(),
                                      beta=rng.uniform(-np.pi, np.pi))
            phibar = rng.uniform(-np.pi, np.pi)
            h = 1e-6
            fd = (bh.quadrature_mean(state, phibar + h)
                  - bh.quadrature_mean(state, phibar - h)) / (2 * h)
            assert bh.quadrature_mean_slope(state, phibar) == pytest.approx(fd, rel=1e-8, abs=1e-8)


class TestOpoParams:
    def test_invariants(self):
        with pytest.raises(ValueError):
            bh.OpoParams(gamma=0.0, epsilon=0.0)
        with pytest.raises(ValueError):
            bh.OpoParams(gamma=1.0, epsilon=0.6)  # above threshold
        with pytest.raises(ValueError):
            bh.OpoParams(gamma=1.0, epsilon=0.2, eta=0.0)
        with pytest.raises(ValueError):
            bh.OpoParams(gamma=1.0, epsilon=0.2, eta=1.5)
        bh.OpoParams(gamma=1.0, epsilon=0.5)  # threshold itself is allowed

    def test_from_cavity(self):
        p = bh.OpoParams.from_cavity(reflectivity=0.99, length=1.0, epsilon=1e5,
                                     light_speed=3e8)
        assert p.gamma == pytest.approx(0.01 * 3e8)


class TestOpoSpectra:
    def test_frozen_values(self):
        s = bh.opo_spectra(bh.OpoParams(gamma=1.0, epsilon=0.5, eta=1.0))
        assert float(s.phi11(0.0)) == pytest.approx(-1.0, abs=1e-15)
        assert float(s.phi11(1.0)) == pytest.approx(-0.5, abs=1e-15)

    def test_no_pump_no_squeezing(self):
        s = bh.opo_spectra(bh.OpoParams(gamma=2.0, epsilon=0.0, eta=0.7))
        w = np.linspace(-5, 5, 11)
        assert np.all(s.phi11(w) == 0.0)
        assert np.all(s.phi22(w) == 0.0)

    def test_threshold_divergence(self):
        s = bh.opo_spectra(bh.OpoParams(gamma=1.0, epsilon=0.5, eta=1.0))
        with pytest.raises(ThresholdDivergence):
            s.phi22(0.0)
        # fine away from the pole and below threshold
        assert float(s.phi22(0.3)) > 0
        below = bh.opo_spectra(bh.OpoParams(gamma=1.0, epsilon=0.4, eta=1.0))
        assert float(below.phi22(0.0)) > 0

    def test_even_in_frequency(self):
        s = bh.opo_spectra(bh.OpoParams(gamma=1.3, epsilon=0.4, eta=0.8))
        w = np.linspace(0.1, 6.0, 40)
        assert np.array_equal(s.phi11(w), s.phi11(-w))
        assert np.array_equal(s.phi22(w), s.phi22(-w))

    def test_minimum_uncertainty_product(self):
        # (1 + eta phi11)(1 + eta phi22) >= 1 on a grid, below threshold
        for gamma, eps, eta in ((1.0, 0.4, 1.0), (2.0, 0.7, 0.6), (0.5, 0.05, 0.9)):
            s = bh.opo_spectra(bh.OpoParams(gamma=gamma, epsilon=eps, eta=eta))
            w = np.linspace(-10, 10, 201)
            product = (1 + eta * s.phi11(w)) * (1 + eta * s.phi22(w))
            assert np.all(product >= 1.0 - 1e-12)


class TestKernelConversions:
    def test_phase_insensitive_collapse(self):
        # vanishing g20: k11 = k22 = 2 Re g11, k12 = -k21 = 2 Im g11
        g11 = lambda tau: np.exp(-np.abs(tau)) * (1.0 + 0.5j * np.sign(tau))
        zero = lambda tau: np.zeros_like(np.asarray(tau, dtype=float)) + 0j
        state = bh.GaussianFieldState(0j, g11, zero, beta=0.7)
        k = bh.gammas_to_quadrature_correlations(state)
        tau = np.linspace(-3, 3, 31)
        assert np.allclose(k.k11(tau), 2 * np.real(g11(tau)), atol=1e-15)
        assert np.allclose(k.k22(tau), 2 * np.real(g11(tau)), atol=1e-15)
        assert np.allclose(k.k12(tau), 2 * np.imag(g11(tau)), atol=1e-15)
        assert np.allclose(k.k21(tau), -2 * np.imag(g11(tau)), atol=1e-15)

    def test_fully_squeezed_example(self):
        # g11 = exp(-|tau|), g20 e^{2i beta} = -exp(-|tau|):
        # all fluctuation power in the conjugate quadrature.
        beta = 0.4
        g11 = lambda tau: np.exp(-np.abs(tau)) + 0j
        g20 = lambda tau: -np.exp(-np.abs(tau)) * np.exp(-2j * beta)
        state = bh.GaussianFieldState(0j, g11, g20, beta=beta)
        k = bh.gammas_to_quadrature_correlations(state)
        tau = np.linspace(-2, 2, 21)
        assert np.allclose(k.k11(tau), 0.0, atol=1e-14)
        assert np.allclose(k.k22(tau), 4 * np.exp(-np.abs(tau)), atol=1e-14)
        assert np.allclose(k.k12(tau), 0.0, atol=1e-14)
        assert np.allclose(k.k21(tau), 0.0, atol=1e-14)

    def test_round_trip_identity(self):
        rng = np.random.default_rng(11)
        tau = np.linspace(-4, 4, 41)
        for _ in range(25):
            state = random_state(rng)
            k = bh.gammas_to_quadrature_correlations(state)
            back = bh.quadrature_correlations_to_gammas(k, state.beta)
            for a, b in ((state.gamma11, back.gamma11), (state.gamma20, back.gamma20)):
                ref = np.asarray(a(tau))
                got = np.asarray(b(tau))
                scale = np.max(np.abs(ref)) + 1e-30
                assert np.max(np.abs(ref - got)) <= 1e-12 * scale

    def test_round_trip_from_kernel_side(self):
        rng = np.random.default_rng(12)
        tau = np.linspace(-3, 3, 17)
        values = {name: rng.normal(size=tau.size) for name in "abcd"}
        interp = {name: (lambda v: (lambda x: np.interp(x, tau, v)))(v)
                  for name, v in values.items()}
        kernels = bh.QuadratureKernels(interp["a"], interp["b"], interp["c"], interp["d"])
        state = bh.quadrature_correlations_to_gammas(kernels, beta=0.9)
        back = bh.gammas_to_quadrature_correlations(state)
        for name, f in zip("abcd", (back.k11, back.k22, back.k12, back.k21)):
            assert np.max(np.abs(f(tau) - values[name])) <= 1e-12


class TestOpoFieldState:
    def test_spectra_are_transforms_of_kernels(self):
        # independent route: numerically Fourier transform the time-domain
        # kernels and compare against the analytic Lorentzians
        params = bh.OpoParams(gamma=1.0, epsilon=0.4, eta=0.8)
        state = bh.opo_field_state(params, beta=0.25)
        k = bh.gammas_to_quadrature_correlations(state)
        spectra = bh.opo_spectra(params)
        tau = np.linspace(-400.0, 400.0, 2 ** 20 + 1)
        for kernel, spectrum in ((k.k11, spectra.phi11), (k.k22, spectra.phi22)):
            values = kernel(tau)
            for w in (0.0, 0.5, 2.0):
                ft = np.trapezoid(values * np.cos(w * tau), tau)
                assert ft == pytest.approx(float(spectrum(w)), rel=2e-6, abs=2e-6)

    def test_cross_kernels_vanish(self):
        params = bh.OpoParams(gamma=1.0, epsilon=0.3)
        k = bh.gammas_to_quadrature_correlations(bh.opo_field_state(params, beta=0.6))
        tau = np.linspace(-5, 5, 21)
        assert np.allclose(k.k12(tau), 0.0, atol=1e-15)
        assert np.allclose(k.k21(tau), 0.0, atol=1e-15)

    def test_kernel_symmetries(self):
        state = bh.opo_field_state(bh.OpoParams(gamma=1.0, epsilon=0.45), beta=1.1)
        tau = np.linspace(0.1, 8.0, 30)
        assert np.allclose(state.gamma11(-tau), np.conj(state.gamma11(tau)), atol=1e-15)
        assert np.allclose(state.gamma20(-tau), state.gamma20(tau), atol=1e-15)

    def test_threshold_rejected(self):
        with pytest.raises(ThresholdDivergence):
            bh.opo_field_state(bh.OpoParams(gamma=1.0, epsilon=0.5))

    def test_flux_nonnegative(self):
        state = bh.opo_field_state(bh.OpoParams(gamma=1.0, epsilon=0.49))
        assert state.fluctuation_flux >= 0.0


class TestHeterodyneConfig:
    def test_derived_phases(self):
        cfg = bh.HeterodyneConfig(Omega=1.0, phi1=0.2, phi2=0.8, beta=0.1)
        assert cfg.phibar == pytest.approx(0.5 - 0.1)
        assert cfg.dphi == pytest.approx(0.3)

    def test_invariants(self):
        with pytest.raises(ValueError):
            bh.HeterodyneConfig(Omega=-1.0)
        with pytest.raises(ValueError):
            bh.HeterodyneConfig(Omega=1.0, amplitude=0.0)
        bh.HeterodyneConfig(Omega=0.0)  # homodyne limit allowed

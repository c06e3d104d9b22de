import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twocomp import spectral
from twocomp.errors import ConfigurationError, UsageError

from conftest import band_limited


class TestGrid:
    def test_small_grid_nodes(self):
        g = spectral.make_grid(8, 8.0)
        assert g.spacing == 1.0
        np.testing.assert_array_equal(g.x, np.arange(-4.0, 4.0))

    def test_wavenumbers_for_length_16pi(self):
        g = spectral.make_grid(8, 2 * math.pi * 8)
        assert g.k[1] == pytest.approx(0.125, rel=1e-15)
        np.testing.assert_allclose(g.k, np.arange(5) / 8, rtol=1e-15)

    def test_production_spacing(self):
        assert spectral.make_grid(4096, 80.0).spacing == 80 / 4096

    @pytest.mark.parametrize("n", [0, 4, 12, 100, 1000])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(ConfigurationError):
            spectral.make_grid(n, 1.0)

    @pytest.mark.parametrize("length", [0.0, -1.0, float("inf")])
    def test_rejects_bad_length(self, length):
        with pytest.raises(ConfigurationError):
            spectral.make_grid(16, length)

    def test_signed_wavenumbers_antisymmetric(self):
        g = spectral.make_grid(32, 10.0)
        w = g.wavenumbers
        nyq = np.argmax(np.abs(w))
        rest = np.delete(w, nyq)
        assert set(np.round(rest, 12)) == set(np.round(-rest, 12))

    def test_spacing_times_points(self):
        g = spectral.make_grid(2048, 60.0)
        assert abs(g.spacing * g.n_points - g.length) <= 1e-15 * g.length

    def test_field_checks(self):
        g = spectral.make_grid(16, 1.0)
        with pytest.raises(UsageError):
            spectral.check_field(g, np.zeros(8))
        bad = np.zeros(16)
        bad[3] = np.nan
        with pytest.raises(UsageError):
            spectral.check_field(g, bad)


class TestDerivative:
    def test_constant(self):
        g = spectral.make_grid(64, 10.0)
        np.testing.assert_array_equal(spectral.derivative(g, np.full(64, 7.0)), 0.0)

    def test_sine(self):
        g = spectral.make_grid(64, 10.0)
        a = 2 * np.pi / g.length
        d = spectral.derivative(g, np.sin(a * g.x))
        np.testing.assert_allclose(d, a * np.cos(a * g.x), atol=1e-13)

    def test_gaussian_production_grid(self):
        g = spectral.make_grid(4096, 80.0)
        d = spectral.derivative(g, np.exp(-g.x**2))
        assert np.max(np.abs(d + 2 * g.x * np.exp(-g.x**2))) < 1e-10

    def test_nyquist_mode_dropped(self):
        g = spectral.make_grid(16, 16.0)
        alternating = np.cos(np.pi * np.arange(16))
        np.testing.assert_allclose(spectral.derivative(g, alternating), 0.0, atol=1e-14)


class TestHelmholtz:
    def test_constant(self):
        g = spectral.make_grid(32, 5.0)
        np.testing.assert_allclose(spectral.helmholtz(g, np.ones(32)), 1.0, rtol=1e-15)

    def test_cosine_eigenfunction(self):
        g = spectral.make_grid(64, 2 * np.pi)
        k = 3.0
        f = np.cos(k * g.x)
        np.testing.assert_allclose(spectral.helmholtz(g, f), (1 + k * k) * f, atol=1e-12)
        np.testing.assert_allclose(spectral.helmholtz_inverse(g, f), f / (1 + k * k), atol=1e-15)

    def test_zero(self):
        g = spectral.make_grid(16, 3.0)
        np.testing.assert_array_equal(spectral.helmholtz_inverse(g, np.zeros(16)), 0.0)

    def test_impulse_reproduces_kernel(self):
        g = spectral.make_grid(4096, 80.0)
        delta = np.zeros(4096)
        i0 = int(np.argmin(np.abs(g.x)))
        delta[i0] = 1.0 / g.spacing
        p = spectral.helmholtz_inverse(g, delta)
        exact = 0.5 * np.exp(-np.abs(g.x))
        # The kernel has a slope jump at 0; the truncated Fourier tail costs
        # ~L/(pi^2 N) at the crest and decays like 1/x^2 away from it.
        away = (np.abs(g.x) > 4.0) & (np.abs(g.x) < 35.0)
        assert np.max(np.abs(p - exact)[away]) < 1e-8
        assert abs(p[i0] - 0.5) < 2 * g.length / (np.pi**2 * g.n_points)

    def test_inverse_pair_random(self, rng):
        g = spectral.make_grid(256, 20.0)
        f = band_limited(g, rng)
        back = spectral.helmholtz(g, spectral.helmholtz_inverse(g, f))
        assert np.max(np.abs(back - f)) < 1e-12 * np.max(np.abs(f))


class TestDealiasedProduct:
    def test_zero_factor(self, rng):
        g = spectral.make_grid(64, 10.0)
        out = spectral.dealiased_product(g, np.zeros(64), rng.normal(size=64))
        np.testing.assert_array_equal(out, 0.0)

    def test_product_identity_in_band(self):
        g = spectral.make_grid(64, 2 * np.pi)
        f = np.cos(5 * g.x)
        out = spectral.dealiased_product(g, f, f)
        np.testing.assert_allclose(out, 0.5 * (1 + np.cos(10 * g.x)), atol=1e-13)

    def test_highest_retained_mode(self):
        g = spectral.make_grid(64, 2 * np.pi)
        top = g.n_points // 3
        f = np.cos(top * g.x)
        out = spectral.dealiased_product(g, f, f)
        np.testing.assert_allclose(out, 0.5, atol=1e-13)

    def test_grid_mismatch(self):
        g = spectral.make_grid(16, 1.0)
        with pytest.raises(UsageError):
            spectral.dealiased_product(g, np.zeros(16), np.zeros(32))


class TestInterpolation:
    def test_nodes_reproduced(self, rng):
        g = spectral.make_grid(128, 12.0)
        f = band_limited(g, rng, 0.4)
        np.testing.assert_allclose(spectral.interpolate(g, f, g.x[::7]), f[::7], atol=1e-12)

    def test_off_grid_trig_polynomial(self):
        g = spectral.make_grid(64, 2 * np.pi)
        pts = np.array([0.123, -2.5, 3.0])
        f = np.sin(3 * g.x) + 0.5 * np.cos(7 * g.x)
        want = np.sin(3 * pts) + 0.5 * np.cos(7 * pts)
        np.testing.assert_allclose(spectral.interpolate(g, f, pts), want, atol=1e-13)


class TestProperties:
    @given(st.integers(min_value=0, max_value=2**31 - 1), st.sampled_from([32, 64, 256]))
    def test_derivative_commutes_with_inverse(self, seed, n):
        g = spectral.make_grid(n, 17.0)
        f = np.random.default_rng(seed).normal(size=n)
        a = spectral.derivative(g, spectral.helmholtz_inverse(g, f))
        b = spectral.helmholtz_inverse(g, spectral.derivative(g, f))
        assert np.max(np.abs(a - b)) <= 1e-13 * max(1.0, np.max(np.abs(f)))

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_parseval(self, seed):
        g = spectral.make_grid(128, 9.0)
        f = np.random.default_rng(seed).normal(size=128)
        direct = g.spacing * np.sum(f * f)
        assert abs(spectral.spectral_energy(g, f) - direct) <= 1e-12 * direct

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_helmholtz_inverse_pair(self, seed):
        g = spectral.make_grid(64, 30.0)
        f = np.random.default_rng(seed).normal(size=64)
        back = spectral.helmholtz_inverse(g, spectral.helmholtz(g, f))
        # Nyquist content is untouched by both maps, so every field round-trips.
        assert np.max(np.abs(back - f)) <= 1e-12 * np.max(np.abs(f))

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_derivative_is_real(self, seed):
        g = spectral.make_grid(64, 5.0)
        f = np.random.default_rng(seed).normal(size=64)
        d = spectral.derivative(g, f)
        assert d.dtype == np.float64 and np.all(np.isfinite(d))

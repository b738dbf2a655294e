"""Special-function layer: quadrature oracles, recurrences, expansion
coefficients."""

import math

import mpmath as mp
import numpy as np
import pytest
from scipy.integrate import quad

from qgfront import specfun

mp.mp.dps = 40

EULER_GAMMA = 0.5772156649015328606


def k0_oracle(x):
    """Adaptive quadrature of the integral representation of K0."""
    val, _ = quad(lambda t: math.exp(-x * math.cosh(t)), 0.0, 40.0,
                  epsabs=1e-300, epsrel=1e-13, limit=300)
    return val


def k0p_oracle(x):
    val, _ = quad(lambda t: -math.cosh(t) * math.exp(-x * math.cosh(t)), 0.0, 40.0,
                  epsabs=1e-300, epsrel=1e-13, limit=300)
    return val


class TestK0:
    def test_value_at_one(self):
        assert specfun.k0(1.0) == pytest.approx(0.42102443824070834, abs=1e-12)
        assert specfun.k0(1.0) == pytest.approx(k0_oracle(1.0), rel=1e-12)

    def test_asymptotic_regime(self):
        ratio = specfun.k0(20.0) / (math.sqrt(math.pi / 40.0) * math.exp(-20.0))
        assert abs(ratio - 1.0) < 0.015

    def test_log_behaviour_near_zero(self):
        x = 1e-6
        assert abs(specfun.k0(x) + math.log(x / 2.0) + EULER_GAMMA) < 1e-6

    @pytest.mark.parametrize("x", [1e-4, 1e-2, 0.3, 1.0, 2.0, 7.5, 14.0, 16.0, 30.0])
    def test_oracle_range(self, x):
        assert specfun.k0(x) == pytest.approx(k0_oracle(x), rel=1e-11)

    def test_domain_error(self):
        with pytest.raises(specfun.DomainError):
            specfun.k0(0.0)
        with pytest.raises(specfun.DomainError):
            specfun.k0(-1.0)


class TestK0Derivative:
    def test_order_zero_is_k0(self):
        assert specfun.k0_derivative(0, 1.0) == specfun.k0(1.0)

    def test_first_derivative_oracle(self):
        assert specfun.k0_derivative(1, 1.0) == pytest.approx(
            -0.6019072301972346, abs=1e-10)
        for x in (0.2, 1.0, 5.0, 20.0):
            assert specfun.k0_derivative(1, x) == pytest.approx(
                k0p_oracle(x), rel=1e-11)

    @pytest.mark.parametrize("x", [0.5, 2.0, 10.0])
    def test_recurrence_residual(self, x):
        d = specfun.k0_derivatives(x, 3)
        # third-derivative identity inherited from x y'' + y' - x y = 0
        residual = x * d[3] + 2.0 * d[2] - x * d[1] - d[0]
        assert abs(residual) < 1e-9

    def test_high_orders_against_mpmath(self):
        for n in range(2, 7):
            got = specfun.k0_derivative(n, 2.0)
            ref = float(mp.diff(lambda t: mp.besselk(0, t), 2.0, n))
            assert got == pytest.approx(ref, rel=1e-9)

    def test_order_cap(self):
        with pytest.raises(specfun.UnsupportedOrderError):
            specfun.k0_derivative(9, 1.0)

    def test_factorial_exponential_bound(self):
        # |K0^(n)(x)| <= C n! e^-x for x > 1, sampled n <= 6
        c = 3.0
        for x in (1.5, 3.0, 8.0):
            d = specfun.k0_derivatives(x, 6)
            for n in range(7):
                assert abs(d[n]) <= c * math.factorial(n) * math.exp(-x)


class TestI0:
    def test_at_zero(self):
        assert specfun.i0(0.0) == 1.0

    def test_even(self):
        for x in (0.3, 1.7, 4.2):
            assert specfun.i0(-x) == specfun.i0(x)

    def test_integral_representation(self):
        ref, _ = quad(lambda th: math.exp(2.0 * math.cos(th)) / math.pi, 0.0, math.pi,
                      epsrel=1e-14)
        assert specfun.i0(2.0) == pytest.approx(ref, abs=1e-12)

    def test_range_error(self):
        with pytest.raises(specfun.DomainError):
            specfun.i0(60.0)


def kernel_diff_mp(mu, zeta, h=None):
    """Taylor coefficient of K0(sqrt(z^2 + d^2)) - K0(|z|) in d^2, by
    high-precision central differences in s = d^2."""
    z = mp.mpf(zeta)
    f = lambda s: mp.besselk(0, mp.sqrt(z * z + s))
    return float(mp.diff(f, 0, mu, direction=1) / mp.factorial(mu))


class TestACoeff:
    @pytest.mark.parametrize("zeta", [1.5, 3.0])
    def test_mu1_reduction(self, zeta):
        expected = specfun.k0_derivative(1, zeta) / (2.0 * zeta)
        assert specfun.a_coeff(1, zeta) == pytest.approx(expected, rel=1e-13)

    def test_exponential_decay(self):
        # |A_mu(z)| <= C e^{-|z|} with a per-mu constant fitted once
        for mu in (1, 2):
            c = abs(specfun.a_coeff(mu, 1.1)) * math.exp(1.1) * 1.5
            for z in np.linspace(1.1, 20.0, 25):
                assert abs(specfun.a_coeff(mu, z)) <= c * math.exp(-z)

    def test_taylor_reconstruction(self):
        # sum_mu A_mu(z) d^{2 mu} reproduces the kernel difference through
        # order d^{2 mu_max}; residual is O(d^8) at mu_max = 3
        z = 2.0
        d = 1e-2
        diff = float(mp.besselk(0, mp.sqrt(mp.mpf(z) ** 2 + mp.mpf(d) ** 2))
                     - mp.besselk(0, z))
        approx = sum(specfun.a_coeff(mu, z) * d ** (2 * mu) for mu in (1, 2, 3))
        resid = abs(diff - approx)
        d4 = float(kernel_diff_mp(4, z))
        assert resid <= 3.0 * abs(d4) * d ** 8

    def test_even_extension(self):
        assert specfun.a_coeff(2, -1.5) == specfun.a_coeff(2, 1.5)

    def test_domain(self):
        with pytest.raises(specfun.DomainError):
            specfun.a_coeff(1, 0.5)


class TestBCoeff:
    def test_richardson_oracle(self):
        # Richardson-extrapolated finite differences of the kernel itself
        z = 0.5
        vals = []
        for d in (0.02, 0.01, 0.005):
            diff = float(mp.besselk(0, mp.sqrt(mp.mpf(z) ** 2 + mp.mpf(d) ** 2))
                         - mp.besselk(0, z))
            vals.append(diff / d ** 2)
        # two Richardson steps in d^2 (error series in d^2)
        r1 = [(4 * vals[i + 1] - vals[i]) / 3 for i in range(2)]
        r2 = (16 * r1[1] - r1[0]) / 15
        assert specfun.b_coeff(1, z) == pytest.approx(r2, abs=1e-8)

    def test_singularity_scale(self):
        # z^{2 mu} B_mu stays bounded as z -> 0
        for mu in (1, 2, 3):
            vals = [abs(2.0 ** (-2 * mu * m) * 0 + (2.0 ** -m) ** (2 * mu)
                        * specfun.b_coeff(mu, 2.0 ** -m)) for m in range(1, 11)]
            assert max(vals) < 10.0 ** mu
        # and the mu=1 limit is -1/2
        z = 2.0 ** -10
        assert z * z * specfun.b_coeff(1, z) == pytest.approx(-0.5, abs=1e-4)

    def test_even(self):
        for mu in (1, 2):
            assert specfun.b_coeff(mu, -0.3) == specfun.b_coeff(mu, 0.3)

    def test_singularity_error(self):
        with pytest.raises(specfun.DomainError):
            specfun.b_coeff(1, 0.0)
        with pytest.raises(specfun.DomainError):
            specfun.b_coeff(1, 1.5)

    @pytest.mark.parametrize("mu", [1, 2, 3])
    def test_closed_form_cross_check(self, mu):
        for z in (0.2, 0.5, 0.8):
            assert specfun.b_closed_form(mu, z) == pytest.approx(
                specfun.b_coeff(mu, z), rel=1e-10)

    @pytest.mark.parametrize("mu", [1, 2, 3])
    def test_against_mp_taylor(self, mu):
        for z in (0.3, 0.7, 1.5, 3.0):
            assert specfun.kernel_diff_coeff_array(
                np.array([z]), mu)[0, mu - 1] == pytest.approx(
                    kernel_diff_mp(mu, z), rel=1e-8)


class TestSeriesTable:
    def test_binom_half_range(self):
        assert specfun.binom_half(1) == 0.5
        for l in range(1, 12):
            assert -0.125 <= specfun.binom_half(l) <= 0.5

    def test_b_k_definition(self):
        for k in (1, 2, 5):
            h = sum(1.0 / i for i in range(1, k + 1))
            assert specfun.b_k(k) == h / (math.factorial(k) ** 2 * 4.0 ** k)

    def test_inner_sum_finite(self):
        # no partition of mu has more than mu parts
        for mu in (1, 2, 3, 4):
            assert specfun.coeff_table(mu).max_k <= mu


class TestKernelDifferenceInvariant:
    def test_short_range_taylor_envelope(self):
        # |K0(sqrt(z^2+d^2)) - K0(z) - sum_{mu<=3} B_mu d^{2mu}| <= C d^8
        c = 0.0
        samples = []
        for z in np.linspace(0.15, 0.85, 8):
            coeffs = specfun.kernel_diff_coeff_array(np.array([z]), 3)[0]
            for d in (0.05, 0.04, 0.02):
                diff = float(mp.besselk(0, mp.sqrt(mp.mpf(z) ** 2 + mp.mpf(d) ** 2))
                             - mp.besselk(0, z))
                resid = abs(diff - sum(coeffs[m] * d ** (2 * (m + 1))
                                       for m in range(3)))
                samples.append((z, d, resid))
                c = max(c, resid / d ** 8)
        # the constant is dominated by the smallest z (coefficient ~ z^{-8})
        assert c < 10.0 / 0.15 ** 8
        for z, d, resid in samples:
            assert resid <= 1.01 * c * d ** 8

    def test_long_range_taylor_envelope(self):
        for z in (1.2, 2.0, 4.0):
            coeffs = specfun.kernel_diff_coeff_array(np.array([z]), 3)[0]
            for d in (0.05, 0.02):
                diff = float(mp.besselk(0, mp.sqrt(mp.mpf(z) ** 2 + mp.mpf(d) ** 2))
                             - mp.besselk(0, z))
                resid = abs(diff - sum(coeffs[m] * d ** (2 * (m + 1))
                                       for m in range(3)))
                assert resid <= 5.0 * math.exp(-z) * d ** 8

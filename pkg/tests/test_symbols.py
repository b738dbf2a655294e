"""Multilinear symbols, resonance phase, S-infinity estimates, slow phase."""

import numpy as np
import pytest

from qgfront import kernel, spectral, symbols
from qgfront.grids import MOVING, FrontState, UniformGrid
from qgfront.kernel import QuadratureSpec


class TestTSymbol:
    def test_zero_argument_annihilates(self):
        assert symbols.t_symbol(1, (0.0, 0.7, -2.0)) == 0.0

    @pytest.mark.parametrize("etas", [(0.7, -1.3, 2.1), (0.3, 0.4, 0.5),
                                      (2.0, -0.5, 0.25), (1.0, 1.0, -1.0)])
    def test_quadrature_matches_closed_form(self, etas):
        assert symbols.t_symbol(1, etas) == pytest.approx(
            symbols.t1_exact(*etas), rel=1e-10)

    def test_permutation_symmetry(self):
        base = symbols.t_symbol(1, (0.9, -0.4, 1.6))
        assert symbols.t_symbol(1, (1.6, 0.9, -0.4)) == pytest.approx(base, rel=1e-12)
        b2 = symbols.t_symbol(2, (0.5, 0.7, -0.4, 0.3, 0.2))
        assert symbols.t_symbol(2, (0.2, 0.7, 0.3, -0.4, 0.5)) == pytest.approx(
            b2, rel=1e-12)

    def test_joint_evenness(self):
        e = (0.7, -1.3, 2.1)
        assert symbols.t_symbol(1, tuple(-x for x in e)) == pytest.approx(
            symbols.t_symbol(1, e), rel=1e-12)

    def test_not_even_in_single_argument(self):
        # the symbol is even only under the joint sign flip; flipping one
        # argument changes the pair/sum frequencies (see closed form)
        a = symbols.t1_exact(0.7, -1.3, 2.1)
        b = symbols.t1_exact(-0.7, -1.3, 2.1)
        assert abs(a - b) > 0.1

    def test_argument_count(self):
        with pytest.raises(ValueError):
            symbols.t_symbol(1, (1.0, 2.0))

    def test_cubic_cross_check(self):
        # spectral assembly through T_1 vs physical-space quadrature of the
        # cubic kernel integral, on a three-mode front
        g = UniformGrid(256, 25.0)
        eps = 1e-3
        ks = [g.mode_index(k) * g.dxi for k in (0.6, 1.1, 1.7)]
        vals = eps * sum(np.cos(k * g.x) for k in ks)
        state = FrontState(g, vals, frame=MOVING, jump=1.0 / np.pi)
        physical = kernel.rhs_nonlinear(state, QuadratureSpec(outer_panel=1.0),
                                        mode="series", mu_max=1)
        amps = {}
        for k in ks:
            for sk in (k, -k):
                amps[sk] = amps.get(sk, 0.0) + 0.5 * eps
        quad_spec = QuadratureSpec(outer_panel=1.0)
        cache = {}

        def t1(ka, kb, kc):
            key = tuple(sorted((ka, kb, kc)))
            if key not in cache:
                cache[key] = symbols.t_symbol(1, key, quad_spec)
            return cache[key]

        assembled = np.zeros(g.n, dtype=complex)
        keys = list(amps)
        for ka in keys:
            for kb in keys:
                for kc in keys:
                    s = ka + kb + kc
                    assembled += ((1j * s / 3.0) * t1(ka, kb, kc)
                                  * amps[ka] * amps[kb] * amps[kc]
                                  * np.exp(1j * s * g.x))
        assembled = assembled.real
        scale = np.max(np.abs(physical))
        assert np.max(np.abs(physical - assembled)) < 1e-4 * scale


class TestPhase:
    @pytest.mark.parametrize("xi", [0.25, 1.0, 3.3])
    def test_vanishes_on_diagonal(self, xi):
        pp = symbols.phase_phi(xi, xi, xi)
        assert abs(pp.value) < 1e-14
        assert abs(pp.grad[0]) < 1e-14
        assert abs(pp.grad[1]) < 1e-14

    def test_gradient_against_differences(self):
        h = 1e-6
        for (e1, e2, xi) in [(0.3, -0.8, 1.2), (1.5, 0.4, -0.6)]:
            pp = symbols.phase_phi(e1, e2, xi)
            fd1 = (symbols.phase_phi(e1 + h, e2, xi).value
                   - symbols.phase_phi(e1 - h, e2, xi).value) / (2 * h)
            fd2 = (symbols.phase_phi(e1, e2 + h, xi).value
                   - symbols.phase_phi(e1, e2 - h, xi).value) / (2 * h)
            fd3 = (symbols.phase_phi(e1, e2, xi + h).value
                   - symbols.phase_phi(e1, e2, xi - h).value) / (2 * h)
            assert pp.grad[0] == pytest.approx(fd1, abs=1e-8)
            assert pp.grad[1] == pytest.approx(fd2, abs=1e-8)
            assert pp.grad[2] == pytest.approx(fd3, abs=1e-8)

    def test_odd_dispersion_zeros(self):
        # p odd makes Phi vanish whenever the arguments pair off
        assert abs(symbols.phase_phi(1.3, -1.3, 0.7).value) < 1e-14


class TestFrakA:
    def test_at_zero(self):
        assert symbols.frak_a(0.0) == 0.0

    def test_matches_second_derivative(self):
        for xi in (-2.0, 0.3, 1.0, 4.0):
            assert symbols.frak_a(xi) == spectral.dispersion(xi, 2)

    def test_at_one(self):
        assert symbols.frak_a(1.0) == pytest.approx(3.0 / 2 ** 2.5, rel=1e-14)


class TestExpansionError:
    def test_zero_offsets(self):
        assert abs(symbols.phi_expansion_error(1.0, 0.0, 0.0)) < 1e-12

    def test_zero_when_one_offset_vanishes(self):
        # with zeta1 = 0 both Phi and the quadratic model are O(zeta2^3)
        for xi in (0.5, 2.0):
            assert abs(symbols.phi_expansion_error(xi, 0.0, 0.15)) < 5e-3 * 0.15 ** 2

    def test_cubic_constant(self):
        for xi in np.linspace(0.2, 3.0, 9):
            for z1 in (-0.2, 0.1, 0.2):
                for z2 in (-0.15, 0.2):
                    r = abs(symbols.phi_expansion_error(xi, z1, z2))
                    assert r <= symbols.PHI_EXPANSION_CONSTANT * (
                        abs(z1) ** 3 + abs(z2) ** 3)

    def test_halving_reduces_sevenfold(self):
        for xi in (0.5, 1.0, 2.0):
            big = abs(symbols.phi_expansion_error(xi, 0.2, 0.2))
            small = abs(symbols.phi_expansion_error(xi, 0.1, 0.1))
            assert big / small >= 7.0

    def test_offset_cap(self):
        with pytest.raises(ValueError):
            symbols.phi_expansion_error(1.0, 0.6, 0.0)


class TestSInfinity:
    def test_scale_invariance(self):
        vals = [symbols.s_infinity_estimate(symbols.sample_block_cutoffs(j, j, j, 64))
                for j in (-3, 0, 3)]
        assert max(vals) / min(vals) < 1.02

    def test_product_bound(self):
        rng = np.random.default_rng(11)
        x = np.linspace(-4, 4, 256, endpoint=False)
        for _ in range(5):
            m1 = np.exp(-x ** 2) * np.polyval(rng.standard_normal(4), x)
            m2 = np.exp(-0.5 * x ** 2) * np.polyval(rng.standard_normal(3), x)
            s1 = symbols.SymbolSample((0,), [x], m1)
            s2 = symbols.SymbolSample((0,), [x], m2)
            s12 = symbols.SymbolSample((0,), [x], m1 * m2)
            est = symbols.s_infinity_estimate
            assert est(s12) <= est(s1) * est(s2) * 1.05

    def test_t1_block_ratio_bounded(self):
        ratios = []
        for (j1, j2, j3) in symbols.ordered_blocks(-4, 4):
            s = symbols.sample_block_t1(j1, j2, j3, resolution=64)
            ratios.append(symbols.s_infinity_estimate(s)
                          / symbols.t1_block_bound(j1, j2, j3))
        assert max(ratios) < 50.0

    def test_resolution_error(self):
        with pytest.raises(symbols.ResolutionError):
            symbols.s_infinity_estimate(symbols.sample_block_cutoffs(0, 0, 0, 16))

    def test_refinement_converges(self):
        a = symbols.s_infinity_estimate(symbols.sample_block_t1(1, 0, 0, 64))
        b = symbols.s_infinity_estimate(symbols.sample_block_t1(1, 0, 0, 96))
        assert abs(a - b) / b < 0.05


class TestTheta:
    def test_zero_at_start(self):
        assert symbols.theta_phase([0.0], [1.0], 1.0, 0.0) == 0.0

    def test_constant_history_log(self):
        times = np.linspace(0.0, 50.0, 2001)
        amp = 0.3
        got = symbols.theta_phase(times, np.full_like(times, amp), 1.0, 50.0)
        expected = symbols.theta_coefficient(1.0) * amp * np.log(51.0)
        assert got == pytest.approx(expected, rel=1e-4)

    def test_coefficient_symmetry(self):
        for xi in (0.3, 1.0, 2.4):
            assert symbols.theta_coefficient(-xi) == pytest.approx(
                symbols.theta_coefficient(xi), rel=1e-13)

    def test_coefficient_zero_frequency(self):
        assert symbols.theta_coefficient(0.0) == 0.0

    def test_coefficient_against_quadrature_t1(self):
        xi = 1.0
        tq = sum(symbols.t_symbol(1, perm) for perm in
                 [(xi, xi, -xi), (xi, -xi, xi), (-xi, xi, xi)])
        expected = -np.pi * xi / (3.0 * symbols.frak_a(xi)) * tq
        assert symbols.theta_coefficient(xi) == pytest.approx(expected, rel=1e-10)

    def test_increment_bound(self):
        # |Theta(t2) - Theta(t1)| <= |coeff| max|h|^2 (ln(t2+1) - ln(t1+1))
        rng = np.random.default_rng(0)
        times = np.linspace(0.0, 80.0, 401)
        h2 = 0.1 * (1.0 + 0.5 * np.sin(times)) * rng.uniform(0.5, 1.0)
        series = symbols.theta_series(times, h2, 1.3)
        cap = abs(symbols.theta_coefficient(1.3)) * np.max(h2)
        inc = np.abs(np.diff(series))
        dlog = np.diff(np.log(times + 1.0))
        assert np.all(inc <= cap * dlog * (1.0 + 1e-9))

    def test_history_validation(self):
        with pytest.raises(ValueError):
            symbols.theta_phase([1.0, 2.0], [1.0, 1.0], 1.0, 3.0)

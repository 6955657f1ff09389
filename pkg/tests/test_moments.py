"""Characteristic function, jet moments, observables, Husimi density, SNRs."""

import math

import numpy as np
import pytest

from epnoise.errors import OrderTooLarge, SingularParameters
from epnoise.model import SystemParams, stationary_gaussian
from epnoise.moments import (
    antinormal_moment,
    chi_stationary,
    chi_stationary_formal,
    husimi_density,
    intensity_dispersion_from_moments,
    observables,
    snr_limit_checks,
)

from test_model import P_STAR, random_stable


@pytest.fixture(scope="module")
def g_star():
    return stationary_gaussian(P_STAR)


class TestChi:
    def test_normalized_at_origin(self, g_star):
        assert chi_stationary(g_star, [0.0, 0.0]) == pytest.approx(1.0)
        assert antinormal_moment(g_star, 0, 0, 0, 0) == pytest.approx(1.0)

    def test_pinned_value(self, g_star):
        # at alpha = (0.1, 0.2i) the linear part cancels exactly (q1 real, q2
        # imaginary) and the quadratic part is -23.68/432
        got = chi_stationary(g_star, [0.1, 0.2j])
        assert got == pytest.approx(math.exp(-23.68 / 432.0), rel=1e-12)
        assert got.imag == pytest.approx(0.0, abs=1e-15)

    def test_formal_slots_are_independent(self, g_star):
        # starred slots need not be conjugates of the unstarred ones
        v = np.array([0.1 + 0.2j, -0.3j, 0.05, 0.4 - 0.1j])
        lin = np.conj(g_star.q) @ v[:2] - v[2:] @ g_star.q
        quad = v[2:] @ g_star.m @ v[:2]
        assert chi_stationary_formal(g_star, v) == pytest.approx(np.exp(lin + quad))

    def test_shape_validation(self, g_star):
        with pytest.raises(ValueError):
            chi_stationary(g_star, [0.1, 0.2, 0.3])


class TestMoments:
    def test_first_moments_equal_displacement(self, g_star):
        assert antinormal_moment(g_star, 1, 0, 0, 0) == pytest.approx(g_star.q[0])
        assert antinormal_moment(g_star, 0, 1, 0, 0) == pytest.approx(g_star.q[1])
        assert antinormal_moment(g_star, 0, 0, 1, 0) == pytest.approx(
            np.conj(g_star.q[0])
        )

    def test_second_moments_match_covariance(self, g_star):
        obs = observables(g_star, P_STAR)
        for n in range(2):
            for k in range(2):
                # antinormal <a_n a_k+> = <a_k+ a_n> + delta_nk
                want = obs.rho[n, k] + (1.0 if n == k else 0.0)
                orders = [0, 0, 0, 0]
                orders[n] += 1
                orders[2 + k] += 1
                got = antinormal_moment(g_star, *orders)
                assert got == pytest.approx(want, abs=1e-12)

    def test_moments_factorize_without_noise(self):
        # pure coherent state: gamma1 = 0 makes every cumulant beyond q vanish
        p = SystemParams(delta=0.3, j=1.0, f=0.4, gamma1=0.0, gamma2=0.9)
        g = stationary_gaussian(p)
        got = antinormal_moment(g, 2, 1, 1, 0)
        want = g.q[0] ** 2 * g.q[1] * np.conj(g.q[0])
        # antinormal ordering contributes the +1 from each a a+ contraction
        want += 2.0 * g.q[0] * g.q[1]
        assert got == pytest.approx(want, abs=1e-12)

    def test_order_cap(self, g_star):
        with pytest.raises(OrderTooLarge):
            antinormal_moment(g_star, 3, 3, 3, 3)
        with pytest.raises(ValueError):
            antinormal_moment(g_star, -1, 0, 0, 0)


class TestObservables:
    def test_pinned_values_at_p_star(self, g_star):
        obs = observables(g_star, P_STAR)
        np.testing.assert_allclose(
            obs.intensity, [5.481481481481, 1.370370370370], rtol=1e-10
        )
        assert obs.dispersion[1] == pytest.approx(3.0507544581619, rel=1e-10)
        assert obs.snr2[1] == pytest.approx(1.37037037037 / math.sqrt(3.0507544581619), rel=1e-10)

    def test_rho_is_hermitian_psd(self):
        rng = np.random.default_rng(23)
        for p in random_stable(rng, 25):
            obs = observables(stationary_gaussian(p), p)
            np.testing.assert_allclose(obs.rho, obs.rho.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(obs.rho).min() >= -1e-12

    def test_dispersion_matches_fourth_moments(self):
        rng = np.random.default_rng(29)
        for p in random_stable(rng, 25):
            g = stationary_gaussian(p)
            obs = observables(g, p)
            for mode in (1, 2):
                jet_val = intensity_dispersion_from_moments(g, mode)
                scale = max(1.0, abs(jet_val))
                assert obs.dispersion[mode - 1] == pytest.approx(
                    jet_val, abs=1e-10 * scale
                )

    def test_gain_mode_hotter(self):
        # the pumped resonator always carries the larger thermal occupation
        rng = np.random.default_rng(31)
        for p in random_stable(rng, 25):
            if p.gamma1 == 0.0:
                continue
            g = stationary_gaussian(p)
            n_th1 = p.j * p.gamma2 * g.m0 - 1.0
            n_th2 = p.j * p.gamma1 * g.m0
            assert n_th1 > n_th2 > 0.0


class TestHusimi:
    def test_peak_height_and_positivity(self, g_star):
        det = float(np.linalg.det(-g_star.m).real)
        peak = husimi_density(g_star, g_star.q)
        assert peak == pytest.approx(1.0 / (math.pi**2 * det), rel=1e-12)
        rng = np.random.default_rng(37)
        pts = rng.standard_normal((40, 2)) + 1j * rng.standard_normal((40, 2))
        vals = [husimi_density(g_star, g_star.q + w) for w in pts]
        assert all(0.0 < v <= peak for v in vals)

    def test_vacuum_peak(self):
        p = SystemParams(delta=0.0, j=1.0, f=0.0, gamma1=0.0, gamma2=0.8)
        g = stationary_gaussian(p)
        assert husimi_density(g, [0.0, 0.0]) == pytest.approx(1.0 / math.pi**2)

    def test_corrupted_covariance_rejected(self, g_star):
        bad = type(g_star)(m0=g_star.m0, m=-g_star.m, q=g_star.q)
        with pytest.raises(SingularParameters):
            husimi_density(bad, [0.0, 0.0])


class TestSnr:
    def test_amplitude_snr_proportional_to_drive(self):
        base = dict(delta=0.1, j=1.0, gamma1=0.3, gamma2=1.4)
        seq = [SystemParams(f=f, **base) for f in (0.5, 1.0, 2.0, 4.0)]
        for mode in (1, 2):
            vals = snr_limit_checks(seq, kind=1, mode=mode)
            ratios = vals[1:] / vals[:-1]
            np.testing.assert_allclose(ratios, 2.0, rtol=1e-12)

    def test_intensity_snr_doubles_under_strong_drive(self):
        # under strong drive snr2 ~ |q|/sqrt(2 n_th + 1), so doubling f
        # asymptotically doubles it (from below)
        base = dict(delta=0.0, j=1.0, gamma1=0.3, gamma2=1.4)
        seq = [SystemParams(f=f, **base) for f in (4.0, 8.0, 16.0, 32.0)]
        vals = snr_limit_checks(seq, kind=2, mode=2)
        ratios = vals[1:] / vals[:-1]
        assert np.all(ratios < 2.0)
        assert np.all(np.diff(ratios) > 0)  # approach monotone in f
        np.testing.assert_allclose(ratios, 2.0, rtol=2e-2)

    def test_intensity_snr_approaches_one_at_boundary(self):
        # thermal occupation diverges toward gamma1 = gamma2; snr2 -> 1
        seq = [
            SystemParams(delta=0.0, j=1.0, f=0.1, gamma1=g1, gamma2=0.8)
            for g1 in (0.2, 0.5, 0.7, 0.78)
        ]
        vals = snr_limit_checks(seq, kind=2, mode=2)
        assert np.all(np.diff(vals) > 0)
        assert np.all(vals < 1.0)
        assert vals[-1] > 0.95

    def test_kind_mode_validation(self):
        with pytest.raises(ValueError):
            snr_limit_checks([P_STAR], kind=3, mode=1)
        with pytest.raises(ValueError):
            snr_limit_checks([P_STAR], kind=1, mode=0)

"""Truncated-Fock-space oracle: generator structure, steady states, transients."""

import numpy as np
import pytest

from epnoise.errors import CutoffTooSmall, DivergenceDetected, Unstable
from epnoise.fock import (
    FockConfig,
    FockState,
    build_liouvillian,
    chi_from_state,
    coherent_state,
    cutoff_scan,
    displaced_thermal_state,
    evolve,
    fock_observables,
    intensity_doubling_onset,
    ladder,
    load_density_csv,
    moment_ode_evolve,
    save_density_csv,
    steady_state,
    vacuum_state,
)
from epnoise.model import SystemParams, stationary_gaussian
from epnoise.moments import chi_stationary, observables

from test_model import P_STAR

# weakly occupied stable point: cheap truncations converge fast
P_MILD = SystemParams(delta=0.3, j=1.0, f=0.2, gamma1=0.1, gamma2=1.2)


def random_density(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


class TestOperators:
    def test_ladder_elements(self):
        a = ladder(5).toarray()
        for n in range(1, 5):
            assert a[n - 1, n] == pytest.approx(np.sqrt(n))
        assert np.count_nonzero(a) == 4
        np.testing.assert_allclose(
            (a @ a.conj().T - a.conj().T @ a)[:-1, :-1], np.eye(4), atol=1e-14
        )

    def test_liouvillian_preserves_trace(self):
        rng = np.random.default_rng(43)
        lv = build_liouvillian(P_MILD, (4, 3)).toarray()
        for _ in range(5):
            rho = random_density(rng, 12)
            drho = (lv @ rho.reshape(-1, order="F")).reshape((12, 12), order="F")
            assert abs(np.trace(drho)) < 1e-12

    def test_liouvillian_preserves_hermiticity(self):
        rng = np.random.default_rng(47)
        lv = build_liouvillian(P_MILD, (4, 3)).toarray()
        rho = random_density(rng, 12)
        drho = (lv @ rho.reshape(-1, order="F")).reshape((12, 12), order="F")
        np.testing.assert_allclose(drho, drho.conj().T, atol=1e-12)


class TestConfig:
    def test_budget_enforced(self):
        with pytest.raises(CutoffTooSmall):
            FockConfig(cutoff=(30, 30)).check_budget()
        FockConfig(cutoff=(24, 10)).check_budget()

    def test_cutoff_validation(self):
        with pytest.raises(ValueError):
            FockConfig(cutoff=1)
        with pytest.raises(ValueError):
            FockConfig(cutoff=(8, 0))
        assert FockConfig(cutoff=12).cutoffs == (12, 12)
        assert FockConfig(cutoff=(14, 8)).grown(2).cutoffs == (16, 10)


class TestStateBuilders:
    def test_vacuum(self):
        state = vacuum_state((4, 6))
        assert state.trace == pytest.approx(1.0)
        assert state.populations()[0, 0] == pytest.approx(1.0)
        assert state.tail_mass() == pytest.approx(0.0)

    def test_coherent_moments(self):
        alpha = np.array([0.5 - 0.3j, 0.2 + 0.4j])
        obs = fock_observables(coherent_state(alpha, (16, 16)))
        np.testing.assert_allclose(obs.mean_a, alpha, atol=1e-10)
        np.testing.assert_allclose(obs.intensity, np.abs(alpha) ** 2, atol=1e-10)
        # Poissonian number statistics
        np.testing.assert_allclose(obs.dispersion, np.abs(alpha) ** 2, atol=1e-9)

    def test_coherent_asymmetric_cutoffs_respect_mode_order(self):
        # heavy occupation must land in the first (larger) mode; a swapped
        # kron order would push the population into the truncated small mode
        state = coherent_state([2.0, 0.1], (20, 4))
        obs = fock_observables(state)
        np.testing.assert_allclose(obs.mean_a, [2.0, 0.1], atol=1e-6)
        assert state.tail_mass() < 1e-6

    def test_displaced_thermal_moments(self):
        alpha = np.array([0.4, -0.2j])
        nbar = np.array([0.3, 0.1])
        obs = fock_observables(displaced_thermal_state(alpha, nbar, (18, 14)))
        np.testing.assert_allclose(obs.mean_a, alpha, atol=1e-9)
        np.testing.assert_allclose(obs.intensity, np.abs(alpha) ** 2 + nbar, atol=1e-9)
        want_d = np.abs(alpha) ** 2 * (2 * nbar + 1) + nbar * (nbar + 1)
        np.testing.assert_allclose(obs.dispersion, want_d, atol=1e-8)

    def test_negative_nbar_rejected(self):
        with pytest.raises(ValueError):
            displaced_thermal_state([0.0, 0.0], [-0.1, 0.2], 8)


class TestSteadyState:
    def test_matches_analytic_at_mild_point(self):
        state = steady_state(P_MILD, FockConfig(cutoff=(14, 10)))
        got = fock_observables(state)
        want = observables(stationary_gaussian(P_MILD), P_MILD)
        np.testing.assert_allclose(got.mean_a, want.mean_a, atol=2e-6)
        np.testing.assert_allclose(got.rho, want.rho, atol=2e-6)
        np.testing.assert_allclose(got.intensity, want.intensity, atol=2e-6)
        np.testing.assert_allclose(got.dispersion, want.dispersion, atol=5e-6)

    def test_unstable_raises(self):
        p = SystemParams(delta=0.0, j=1.0, f=0.1, gamma1=1.0, gamma2=0.4)
        with pytest.raises(Unstable):
            steady_state(p, FockConfig(cutoff=8))

    def test_over_budget_raises(self):
        with pytest.raises(CutoffTooSmall):
            steady_state(P_MILD, FockConfig(cutoff=(40, 40)))

    def test_excess_tail_raises(self):
        # tight tail tolerance at a tiny cutoff cannot be met
        with pytest.raises(CutoffTooSmall):
            steady_state(P_MILD, FockConfig(cutoff=(3, 3), tail_tol=1e-10))


class TestCutoffScan:
    def test_converges_at_mild_point(self):
        report = cutoff_scan(P_MILD, FockConfig(cutoff=(10, 8)), step=4)
        assert report.converged
        assert report.cutoffs_hi == (14, 12)
        assert report.max_rel_diff < 1e-3
        assert report.tail_mass <= 1e-6
        want = observables(stationary_gaussian(P_MILD), P_MILD)
        np.testing.assert_allclose(
            report.observables_hi.intensity, want.intensity, atol=2e-6
        )
        assert report.state_hi.cutoffs == (14, 12)

    def test_reports_nonconvergence(self):
        # heavily occupied gain mode: these cutoffs are nowhere near enough
        report = cutoff_scan(P_STAR, FockConfig(cutoff=(8, 6)), step=2)
        assert not report.converged


class TestEvolve:
    def test_trace_conserved_and_relaxes(self):
        # slowest decay is e^{-(gamma2-gamma1) t / 4}; t = 50 puts it at 1e-6
        times = [0.0, 2.0, 8.0, 50.0]
        states = evolve(P_MILD, vacuum_state((12, 9)), times)
        for s in states:
            assert s.trace == pytest.approx(1.0, abs=1e-9)
        got = fock_observables(states[-1])
        want = observables(stationary_gaussian(P_MILD), P_MILD)
        np.testing.assert_allclose(got.intensity, want.intensity, atol=1e-5)

    def test_vacuum_is_fixed_point_without_pump_or_drive(self):
        p = SystemParams(delta=0.4, j=1.0, f=0.0, gamma1=0.0, gamma2=0.7)
        states = evolve(p, vacuum_state((6, 6)), [0.0, 3.0, 10.0])
        for s in states:
            assert s.populations()[0, 0] == pytest.approx(1.0, abs=1e-10)

    def test_divergence_detected_with_onset(self):
        p = SystemParams(delta=0.0, j=1.0, f=0.3, gamma1=1.5, gamma2=0.5)
        with pytest.raises(DivergenceDetected) as err:
            evolve(p, vacuum_state((8, 8)), np.linspace(0.0, 12.0, 13))
        assert 0.0 < err.value.onset < 12.0

    def test_time_grid_validation(self):
        with pytest.raises(ValueError):
            evolve(P_MILD, vacuum_state((4, 4)), [0.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            evolve(P_MILD, vacuum_state((4, 4)), [-1.0, 0.0])

    def test_config_cutoff_mismatch(self):
        with pytest.raises(ValueError):
            evolve(P_MILD, vacuum_state((4, 4)), [1.0], config=FockConfig(cutoff=6))


class TestMomentOde:
    def test_stationary_moments_are_fixed(self):
        g = stationary_gaussian(P_MILD)
        obs = observables(g, P_MILD)
        out = moment_ode_evolve(P_MILD, g.q, obs.rho, [0.0, 4.0, 15.0])
        for a_t, rho_t in out:
            np.testing.assert_allclose(a_t, g.q, atol=1e-12)
            np.testing.assert_allclose(rho_t, obs.rho, atol=1e-11)

    def test_matches_fock_evolution(self):
        a0 = np.array([0.3, 0.2j])
        times = [0.5, 1.5]
        moments = moment_ode_evolve(P_MILD, a0, np.outer(a0, a0.conj()), times)
        states = evolve(P_MILD, coherent_state(a0, (12, 9)), times)
        for (a_t, rho_t), state in zip(moments, states):
            got = fock_observables(state)
            np.testing.assert_allclose(got.mean_a, a_t, atol=1e-7)
            np.testing.assert_allclose(got.rho, rho_t, atol=1e-7)

    def test_divergence_flag_from_moment_intensities(self):
        p = SystemParams(delta=0.0, j=1.0, f=0.3, gamma1=1.5, gamma2=0.5)
        times = np.linspace(0.0, 12.0, 25)
        out = moment_ode_evolve(p, [0j, 0j], np.zeros((2, 2)), times)
        total = [float(rho_t[0, 0].real + rho_t[1, 1].real) for _, rho_t in out]
        onset = intensity_doubling_onset(times, total)
        assert onset is not None and 0.0 < onset < 12.0

    def test_no_flag_for_stable_relaxation(self):
        times = np.linspace(0.0, 20.0, 21)
        out = moment_ode_evolve(P_MILD, [0j, 0j], np.zeros((2, 2)), times)
        total = [float(rho_t[0, 0].real + rho_t[1, 1].real) for _, rho_t in out]
        assert intensity_doubling_onset(times, total) is None


class TestChiFromState:
    def test_coherent_closed_form(self):
        beta = np.array([0.4 - 0.1j, 0.25j])
        state = coherent_state(beta, (16, 16))
        for alpha in ([0.3 + 0.1j, -0.2j], [0.1, 0.2]):
            alpha = np.asarray(alpha, dtype=complex)
            want = np.exp(
                -np.abs(alpha) ** 2 + alpha * beta.conj() - alpha.conj() * beta
            ).prod()
            assert chi_from_state(state, alpha) == pytest.approx(want, abs=1e-9)

    def test_steady_state_matches_stationary_chi(self):
        state = steady_state(P_MILD, FockConfig(cutoff=(14, 10)))
        g = stationary_gaussian(P_MILD)
        for alpha in ([0.2, 0.1j], [-0.15j, 0.25]):
            got = chi_from_state(state, alpha)
            assert got == pytest.approx(chi_stationary(g, alpha), abs=1e-4)


class TestDensityCsv:
    def test_round_trip(self, tmp_path):
        state = steady_state(P_MILD, FockConfig(cutoff=(6, 5), tail_tol=1e-2))
        path = tmp_path / "rho.csv"
        save_density_csv(state, path)
        loaded = load_density_csv(path)
        assert loaded.cutoffs == state.cutoffs
        np.testing.assert_allclose(loaded.rho, state.rho, atol=1e-15)

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("row,col,re,im\n0,0,1.0,0.0\n")
        with pytest.raises(ValueError):
            load_density_csv(path)

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rabiring.errors import SingularDenominatorError
from rabiring.meanfield import (
    MinimizeStrategy,
    b_from_a,
    classify_solution,
    closed_form_afsr,
    closed_form_csr,
    closed_form_fsr,
    ground_energy,
    minimize_energy,
    newton_refine,
    reduced_residual,
    residual_jacobian,
    residual_norm,
    site_quantities,
    stationarity_residuals,
)
from rabiring.model import MeanFieldConfiguration, RingParameters, symmetry_orbit
from rabiring.normal_phase import classify_theta, critical_coupling
from rabiring.observables import ring_current

HEX_FSR = RingParameters(theta=np.pi, g1=0.7)
HEX_AFSR = RingParameters(theta=0.0, g1=0.7)
HEX_CSR1 = RingParameters(theta=0.49 * np.pi, g1=0.7)
HEX_CSR2 = RingParameters(theta=0.51 * np.pi, g1=0.7)


def random_configs(count, scale=5.0, seed=7):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield MeanFieldConfiguration(
            rng.uniform(-scale, scale, 6), rng.uniform(-scale, scale, 6)
        )


class TestSiteQuantities:
    def test_zero_displacement(self):
        p = RingParameters(g1=0.3)
        q = site_quantities(p, np.zeros(6))
        assert_allclose(q.delta_n, p.delta, rtol=1e-15)
        assert_allclose(q.lambda_n, p.g, rtol=1e-15)
        assert_allclose(q.chi_n, p.omega * p.g1 ** 2, rtol=1e-14)

    def test_gap_grows_with_displacement(self):
        p = RingParameters(g1=0.5)
        q = site_quantities(p, np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0]))
        assert np.all(np.diff(q.delta_n) > 0)
        assert np.all(np.diff(q.chi_n) < 0)

    def test_arrays_write_protected(self):
        q = site_quantities(RingParameters(g1=0.5), np.ones(6))
        with pytest.raises(ValueError):
            q.chi_n[0] = 1.0


class TestGroundEnergy:
    def test_zero_configuration_defaults(self):
        p = RingParameters(g1=0.4)
        zero = MeanFieldConfiguration.zero(6)
        assert_allclose(ground_energy(p, zero), -150.0, rtol=1e-15)

    def test_condensed_beats_normal_above_onset(self):
        cfg = closed_form_fsr(HEX_FSR)
        assert ground_energy(HEX_FSR, cfg) < -150.0

    def test_flux_reversal_with_conjugated_configuration(self):
        for cfg in random_configs(10):
            p = RingParameters(theta=0.37, g1=0.6)
            q = p.replace(theta=-0.37)
            mirrored = MeanFieldConfiguration(cfg.a, -cfg.b)
            assert_allclose(
                ground_energy(p, cfg), ground_energy(q, mirrored), rtol=1e-13
            )

    def test_hand_evaluated_single_site_terms(self):
        """With J = 0 the energy is a sum of independent site terms
        omega (A^2 + B^2) - Delta_n / 2."""
        p = RingParameters(hop=0.0, g1=0.5, delta=50.0)
        a = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
        b = np.array([0.0, 2.0, 0.0, 0.0, 0.0, 0.0])
        cfg = MeanFieldConfiguration(a, b)
        d0 = math.sqrt(50.0 ** 2 + 16.0 * p.g ** 2)
        expected = 1.0 + 4.0 - d0 / 2.0 - 5 * 25.0
        assert_allclose(ground_energy(p, cfg), expected, rtol=1e-14)


class TestStationarity:
    def test_zero_configuration_is_stationary(self):
        for g1 in (0.1, 0.474, 0.7):
            p = RingParameters(theta=0.3, g1=g1)
            r = stationarity_residuals(p, MeanFieldConfiguration.zero(6))
            assert_allclose(r, 0.0, atol=1e-15)

    def test_closed_forms_are_stationary(self):
        for p, cfg in (
            (HEX_FSR, closed_form_fsr(HEX_FSR)),
            (HEX_AFSR, closed_form_afsr(HEX_AFSR)),
            (HEX_CSR1, closed_form_csr(HEX_CSR1, "I")),
            (HEX_CSR2, closed_form_csr(HEX_CSR2, "II")),
        ):
            assert residual_norm(p, cfg) < 1e-10

    def test_residuals_are_half_the_energy_gradient(self):
        p = RingParameters(theta=0.8, g1=0.6)
        step = 1e-6
        for cfg in random_configs(20, seed=11):
            res = stationarity_residuals(p, cfg)
            x = cfg.stacked
            for i in range(12):
                e = np.zeros(12)
                e[i] = step
                up = ground_energy(p, MeanFieldConfiguration.from_stacked(x + e))
                dn = ground_energy(p, MeanFieldConfiguration.from_stacked(x - e))
                grad_i = (up - dn) / (2.0 * step)
                denom = max(1.0, abs(2.0 * res[i]))
                assert abs(grad_i - 2.0 * res[i]) / denom < 1e-6


class TestResidualJacobian:
    def test_matches_finite_differences(self):
        p = RingParameters(theta=0.49 * np.pi, g1=0.7)
        cfg = next(iter(random_configs(1, scale=3.0, seed=3)))
        jac = residual_jacobian(p, cfg)
        assert jac.shape == (12, 12)
        step = 1e-6
        x = cfg.stacked
        fd = np.zeros((12, 12))
        for i in range(12):
            e = np.zeros(12)
            e[i] = step
            up = stationarity_residuals(p, MeanFieldConfiguration.from_stacked(x + e))
            dn = stationarity_residuals(p, MeanFieldConfiguration.from_stacked(x - e))
            fd[:, i] = (up - dn) / (2.0 * step)
        assert np.max(np.abs(jac - fd)) < 1e-5

    def test_symmetric(self):
        p = RingParameters(theta=1.1, g1=0.65)
        cfg = next(iter(random_configs(1, seed=5)))
        jac = residual_jacobian(p, cfg)
        assert_allclose(jac, jac.T, atol=1e-12)


class TestNewtonRefine:
    def test_converges_from_perturbed_closed_form(self):
        cfg = closed_form_fsr(HEX_FSR)
        start = MeanFieldConfiguration(cfg.a + 0.05, cfg.b - 0.02)
        result = newton_refine(HEX_FSR, start)
        assert result.converged
        assert result.residual_norm < 1e-12
        assert result.config.close_to(cfg, tol=1e-8)

    def test_reports_failure_when_iterations_run_out(self):
        start = MeanFieldConfiguration(np.full(6, 3.0), np.zeros(6))
        result = newton_refine(HEX_FSR, start, max_iter=1)
        assert not result.converged
        assert result.iterations == 1
        assert result.residual_norm > 1e-12


class TestBFromA:
    def test_uniform_gives_zero(self):
        p = RingParameters(theta=0.7, g1=0.6)
        assert_allclose(b_from_a(p, np.full(6, 2.3)), 0.0, atol=1e-15)

    def test_real_flux_angles_give_zero(self):
        a = np.array([1.0, -2.0, 0.5, 3.0, -1.0, 0.0])
        for theta in (0.0, np.pi):
            p = RingParameters(theta=theta, g1=0.6)
            assert_allclose(b_from_a(p, a), 0.0, atol=1e-14)

    def test_consistent_with_chiral_closed_form(self):
        cfg = closed_form_csr(HEX_CSR1, "I")
        assert_allclose(b_from_a(HEX_CSR1, cfg.a), cfg.b, atol=1e-10)

    def test_requires_hexagon(self):
        with pytest.raises(ValueError):
            b_from_a(RingParameters(n=5, theta=0.7), np.ones(5))
        with pytest.raises(ValueError):
            b_from_a(RingParameters(theta=0.7), np.ones(5))

    def test_singular_denominator(self):
        p = RingParameters(hop=1.0, theta=0.0, g1=0.5)
        with pytest.raises(SingularDenominatorError):
            b_from_a(p, np.ones(6))


class TestReducedResidual:
    def test_matches_full_residual_on_the_slice(self):
        rng = np.random.default_rng(19)
        p = RingParameters(theta=0.49 * np.pi, g1=0.7)
        for _ in range(5):
            a = rng.uniform(-5.0, 5.0, 6)
            cfg = MeanFieldConfiguration(a, b_from_a(p, a))
            full = stationarity_residuals(p, cfg)
            assert_allclose(reduced_residual(p, a), full[:6], atol=1e-10)

    def test_zero_at_closed_form(self):
        cfg = closed_form_csr(HEX_CSR1, "I")
        assert np.max(np.abs(reduced_residual(HEX_CSR1, cfg.a))) < 1e-12


class TestClosedFormFsr:
    def test_none_below_and_at_onset(self):
        p = RingParameters(theta=np.pi, g1=0.0)
        g1c = critical_coupling(p, 0.0)
        assert closed_form_fsr(p.replace(g1=0.3)) is None
        assert closed_form_fsr(p.replace(g1=g1c)) is None

    def test_uniform_amplitude_value(self):
        cfg = closed_form_fsr(HEX_FSR)
        assert_allclose(cfg.a, 4.8856281643038235, rtol=1e-12)
        assert_allclose(cfg.b, 0.0, atol=1e-15)
        assert_allclose(ground_energy(HEX_FSR, cfg), -197.77210884353744, rtol=1e-12)

    def test_order_parameter_onset_is_linear_in_coupling(self):
        p = RingParameters(theta=np.pi, g1=0.0)
        g1c = critical_coupling(p, 0.0)
        slopes = []
        for delta in (1e-7, 1e-6, 1e-5):
            cfg = closed_form_fsr(p.replace(g1=g1c + delta))
            slopes.append(cfg.a[0] ** 2 / delta)
        assert slopes[0] > 0
        assert abs(slopes[1] - slopes[0]) / slopes[0] < 1e-3
        assert abs(slopes[2] - slopes[0]) / slopes[0] < 1e-3


class TestClosedFormAfsr:
    def test_staggered_pattern(self):
        cfg = closed_form_afsr(HEX_AFSR)
        assert_allclose(cfg.a, 4.8856281643038235 * np.array([1, -1, 1, -1, 1, -1]))
        assert_allclose(cfg.b, 0.0, atol=1e-15)
        assert residual_norm(HEX_AFSR, cfg) < 1e-10

    def test_energy_matches_uniform_branch_at_opposite_flux(self):
        """Staggering the signs absorbs a sign flip of the hopping, so the
        theta=0 staggered branch and the theta=pi uniform branch coincide."""
        cfg_a = closed_form_afsr(HEX_AFSR)
        cfg_f = closed_form_fsr(HEX_FSR)
        assert_allclose(
            ground_energy(HEX_AFSR, cfg_a), ground_energy(HEX_FSR, cfg_f), rtol=1e-13
        )

    def test_none_below_onset(self):
        p = RingParameters(theta=0.0, g1=0.0)
        g1c = critical_coupling(p, np.pi)
        assert_allclose(g1c, 0.5 * math.sqrt(0.9), rtol=1e-12)
        assert closed_form_afsr(p.replace(g1=0.4)) is None
        assert closed_form_afsr(p.replace(g1=g1c)) is None

    def test_requires_even_ring(self):
        with pytest.raises(ValueError):
            closed_form_afsr(RingParameters(n=5, theta=0.0, g1=0.7))


class TestClosedFormCsr:
    def test_variant_one_pattern(self):
        cfg = closed_form_csr(HEX_CSR1, "I")
        assert residual_norm(HEX_CSR1, cfg) < 1e-12
        a1, a2 = cfg.a[0], cfg.a[1]
        assert_allclose(cfg.a, [a1, a2, a2, a1, a2, a2], rtol=1e-12)
        assert a1 > 0 > a2
        b2 = cfg.b[1]
        assert_allclose(cfg.b, [0.0, b2, -b2, 0.0, b2, -b2], atol=1e-12)
        assert b2 != 0.0
        assert_allclose(a1, 4.333024, atol=1e-6)
        assert_allclose(a2, -4.286217, atol=1e-6)
        assert_allclose(b2, 0.431427, atol=1e-6)

    def test_variant_two_pattern(self):
        cfg = closed_form_csr(HEX_CSR2, "II")
        assert residual_norm(HEX_CSR2, cfg) < 1e-12
        a1, a2 = cfg.a[0], cfg.a[1]
        assert_allclose(cfg.a, [a1, a2, -a2, -a1, -a2, a2], rtol=1e-12)
        b2 = cfg.b[1]
        assert_allclose(cfg.b, [0.0, b2, b2, 0.0, -b2, -b2], atol=1e-12)

    def test_mirror_energies_agree(self):
        cfg1 = closed_form_csr(HEX_CSR1, "I")
        cfg2 = closed_form_csr(HEX_CSR2, "II")
        assert_allclose(
            ground_energy(HEX_CSR1, cfg1), ground_energy(HEX_CSR2, cfg2), rtol=1e-13
        )

    def test_none_outside_window(self):
        assert closed_form_csr(RingParameters(theta=0.2 * np.pi, g1=0.7), "I") is None
        assert closed_form_csr(RingParameters(theta=0.9 * np.pi, g1=0.7), "II") is None

    def test_none_at_onset(self):
        g1c = classify_theta(HEX_CSR1).g1c
        assert closed_form_csr(HEX_CSR1.replace(g1=g1c), "I") is None

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            closed_form_csr(HEX_CSR1, "III")


class TestClassifySolution:
    def test_normal(self):
        p = RingParameters(theta=0.3, g1=0.4)
        assert classify_solution(p, MeanFieldConfiguration.zero(6)).kind == "NP"

    def test_normal_with_numerical_noise(self):
        p = RingParameters(theta=0.3, g1=0.4)
        noisy = MeanFieldConfiguration(np.full(6, 1e-9), np.full(6, -1e-9))
        assert classify_solution(p, noisy).kind == "NP"

    def test_uniform(self):
        label = classify_solution(HEX_FSR, closed_form_fsr(HEX_FSR))
        assert label.kind == "FSR"
        assert label.momentum_index == 0

    def test_staggered(self):
        label = classify_solution(HEX_AFSR, closed_form_afsr(HEX_AFSR))
        assert label.kind == "AFSR"
        assert label.momentum_index == 3

    def test_chiral_with_current_sign(self):
        cfg = closed_form_csr(HEX_CSR1, "I")
        label = classify_solution(HEX_CSR1, cfg)
        assert label.text() == "CSR-I"
        assert label.momentum_index == 2
        assert label.chirality == int(np.sign(ring_current(cfg)))
        flipped = classify_solution(
            HEX_CSR1, MeanFieldConfiguration(cfg.a, -cfg.b)
        )
        assert flipped.chirality == -label.chirality

    def test_unrecognized(self):
        p = RingParameters(theta=0.49 * np.pi, g1=0.7)
        garbage = MeanFieldConfiguration(np.arange(6.0), np.arange(6.0) - 3.0)
        assert classify_solution(p, garbage).kind == "UNKNOWN"


class TestMinimizeEnergy:
    def test_normal_phase_below_onset(self):
        res = minimize_energy(
            RingParameters(theta=0.9 * np.pi, g1=0.3),
            MinimizeStrategy(random_starts=12),
        )
        assert len(res.minima) == 1
        only = res.minima[0]
        assert only.label.kind == "NP"
        assert_allclose(only.energy, -150.0, rtol=1e-12)

    def test_uniform_pair_above_onset(self):
        res = minimize_energy(
            RingParameters(theta=0.9 * np.pi, g1=0.7),
            MinimizeStrategy(random_starts=12),
        )
        family = res.ground_family()
        assert len(family) == 2
        assert all(r.label.kind == "FSR" for r in family)
        first, second = family[0].config, family[1].config
        assert first.close_to(second.negated(), tol=1e-8)

    def test_chiral_sixfold_family(self):
        res = minimize_energy(HEX_CSR1, MinimizeStrategy(random_starts=12))
        family = res.ground_family()
        assert len(family) == 6
        assert all(r.label.text() == "CSR-I" for r in family)
        assert_allclose(family[0].energy, -186.1154869832377, rtol=1e-10)
        closed = closed_form_csr(HEX_CSR1, "I")
        orbit = symmetry_orbit(closed)
        for member in family:
            assert any(member.config.close_to(o, tol=1e-6) for o in orbit)

    def test_counts_and_ordering(self):
        res = minimize_energy(HEX_CSR1, MinimizeStrategy(random_starts=12))
        assert res.n_converged <= res.n_starts
        energies = [r.energy for r in res.minima]
        assert energies == sorted(energies)
        assert all(r.residual_norm < 1e-10 for r in res.minima)
        assert all(r.seed_origin for r in res.minima)

    def test_deterministic(self):
        a = minimize_energy(HEX_CSR1, MinimizeStrategy(random_starts=12, seed=4))
        b = minimize_energy(HEX_CSR1, MinimizeStrategy(random_starts=12, seed=4))
        assert [r.energy for r in a.minima] == [r.energy for r in b.minima]
        for ra, rb in zip(a.minima, b.minima):
            assert np.array_equal(ra.config.stacked, rb.config.stacked)

    def test_energy_scales_with_frequency_unit(self):
        doubled = RingParameters(
            omega=2.0, delta=100.0, hop=0.1, theta=np.pi, g1=0.7
        )
        cfg = closed_form_fsr(doubled)
        ref = closed_form_fsr(HEX_FSR)
        assert_allclose(cfg.a, ref.a, rtol=1e-12)
        assert_allclose(
            ground_energy(doubled, cfg),
            2.0 * ground_energy(HEX_FSR, ref),
            rtol=1e-12,
        )

    def test_orbit_members_share_the_energy(self):
        cfg = closed_form_csr(HEX_CSR1, "I")
        e0 = ground_energy(HEX_CSR1, cfg)
        for member in symmetry_orbit(cfg):
            assert_allclose(ground_energy(HEX_CSR1, member), e0, rtol=1e-12)

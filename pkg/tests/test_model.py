import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rabiring.model import (
    MeanFieldConfiguration,
    PhaseLabel,
    RingParameters,
    constant_energy,
    symmetry_orbit,
)


class TestRingParameters:
    def test_defaults(self):
        p = RingParameters()
        assert p.n == 6
        assert p.omega == 1.0
        assert p.delta == 50.0
        assert p.hop == 0.05
        assert p.theta == 0.0
        assert p.g1 == 0.0

    def test_bare_coupling_roundtrip(self):
        p = RingParameters(g1=0.5)
        assert_allclose(p.g, 0.5 * math.sqrt(50.0), rtol=1e-15)
        again = RingParameters.from_bare(p.g)
        assert abs(again.g1 - 0.5) < 1e-12 * 0.5

    def test_replace(self):
        p = RingParameters().replace(theta=0.3, g1=0.7)
        assert p.theta == 0.3 and p.g1 == 0.7
        assert RingParameters().theta == 0.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"n": 2},
            {"n": 6.5},
            {"omega": 0.0},
            {"omega": -1.0},
            {"delta": 0.0},
            {"g1": -0.1},
            {"theta": 3.3},
            {"theta": -3.3},
            {"hop": math.nan},
            {"delta": math.inf},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            RingParameters(**kwargs)

    def test_theta_endpoints_allowed(self):
        RingParameters(theta=math.pi)
        RingParameters(theta=-math.pi)

    def test_immutable(self):
        p = RingParameters()
        with pytest.raises(Exception):
            p.g1 = 0.3


class TestMeanFieldConfiguration:
    def test_stacked_roundtrip(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=12)
        cfg = MeanFieldConfiguration.from_stacked(x)
        assert cfg.n == 6
        assert_allclose(cfg.stacked, x, rtol=0, atol=0)
        assert_allclose(cfg.alpha, cfg.a + 1j * cfg.b, rtol=0)

    def test_zero(self):
        cfg = MeanFieldConfiguration.zero(6)
        assert cfg.n == 6
        assert np.all(cfg.a == 0) and np.all(cfg.b == 0)

    def test_arrays_write_protected(self):
        cfg = MeanFieldConfiguration(np.ones(6), np.zeros(6))
        with pytest.raises(ValueError):
            cfg.a[0] = 2.0

    def test_input_not_aliased(self):
        a = np.ones(6)
        cfg = MeanFieldConfiguration(a, np.zeros(6))
        a[0] = 5.0
        assert cfg.a[0] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            MeanFieldConfiguration(np.ones(6), np.ones(5))
        with pytest.raises(ValueError):
            MeanFieldConfiguration.from_stacked(np.ones(11))
        with pytest.raises(ValueError):
            MeanFieldConfiguration(np.full(6, np.nan), np.zeros(6))

    def test_shift_and_negate(self):
        cfg = MeanFieldConfiguration(np.arange(6.0), np.arange(6.0) ** 2)
        rolled = cfg.shifted(2)
        assert_allclose(rolled.a, np.roll(cfg.a, 2), rtol=0)
        assert_allclose(cfg.shifted(6).a, cfg.a, rtol=0)
        assert_allclose(cfg.negated().stacked, -cfg.stacked, rtol=0)

    def test_close_to(self):
        cfg = MeanFieldConfiguration(np.ones(6), np.zeros(6))
        near = MeanFieldConfiguration(np.ones(6) + 5e-10, np.zeros(6))
        far = MeanFieldConfiguration(np.ones(6) + 1e-6, np.zeros(6))
        assert cfg.close_to(near)
        assert not cfg.close_to(far)
        assert not cfg.close_to(MeanFieldConfiguration.zero(6), tol=0.5)


class TestPhaseLabel:
    def test_text(self):
        assert PhaseLabel("NP").text() == "NP"
        assert PhaseLabel("FSR", momentum_index=0).text() == "FSR"
        assert PhaseLabel("AFSR", momentum_index=3).text() == "AFSR"
        chiral = PhaseLabel("CSR", momentum_index=2, chirality=1, variant="I")
        assert chiral.text() == "CSR-I"
        assert (
            PhaseLabel("CSR", momentum_index=1, chirality=-1, variant="II").text()
            == "CSR-II"
        )
        assert PhaseLabel("CSR", momentum_index=2, chirality=None).text() == "CSR(m=2)"

    def test_validation(self):
        with pytest.raises(ValueError):
            PhaseLabel("SOLID")
        with pytest.raises(ValueError):
            PhaseLabel("CSR", momentum_index=0, chirality=1)
        with pytest.raises(ValueError):
            PhaseLabel("CSR", momentum_index=2, chirality=2)
        with pytest.raises(ValueError):
            PhaseLabel("FSR", momentum_index=1)
        with pytest.raises(ValueError):
            PhaseLabel("NP", chirality=1)


def test_constant_energy_matches_direct_expression():
    p = RingParameters(g1=0.7)
    g2 = p.g ** 2
    expected = 6 * (-25.0 + (1.0 + 0.15) * g2 / 2500.0 - g2 / 50.0)
    assert_allclose(constant_energy(p), expected, rtol=1e-14)


def test_constant_energy_zero_coupling():
    assert_allclose(constant_energy(RingParameters()), -150.0, rtol=1e-15)


class TestSymmetryOrbit:
    def test_uniform_orbit_is_two(self):
        cfg = MeanFieldConfiguration(np.full(6, 1.5), np.zeros(6))
        orbit = symmetry_orbit(cfg)
        assert len(orbit) == 2
        stacked = sorted(tuple(m.stacked) for m in orbit)
        assert stacked[0][0] == -1.5 and stacked[1][0] == 1.5

    def test_zero_orbit_is_one(self):
        assert len(symmetry_orbit(MeanFieldConfiguration.zero(6))) == 1

    def test_staggered_orbit_is_two(self):
        signs = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
        orbit = symmetry_orbit(MeanFieldConfiguration(2.0 * signs, np.zeros(6)))
        assert len(orbit) == 2

    def test_period_three_pattern_orbit_is_six(self):
        a = np.array([2.0, -1.0, -1.0, 2.0, -1.0, -1.0])
        b = np.array([0.0, 0.5, -0.5, 0.0, 0.5, -0.5])
        orbit = symmetry_orbit(MeanFieldConfiguration(a, b))
        assert len(orbit) == 6

    def test_generic_orbit_is_twelve(self):
        rng = np.random.default_rng(3)
        cfg = MeanFieldConfiguration.from_stacked(rng.normal(size=12))
        assert len(symmetry_orbit(cfg)) == 12

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        cfg = MeanFieldConfiguration.from_stacked(rng.normal(size=12))
        orbit = symmetry_orbit(cfg)
        for member in orbit:
            again = symmetry_orbit(member)
            assert len(again) == len(orbit)
            for x, y in zip(again, orbit):
                assert x.close_to(y, tol=1e-12)

    def test_length_guard(self):
        cfg = MeanFieldConfiguration.zero(5)
        with pytest.raises(ValueError):
            symmetry_orbit(cfg, RingParameters(n=6))

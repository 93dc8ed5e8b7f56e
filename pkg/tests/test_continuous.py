import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from pbracket import (Density1D, DivergenceError, DomainError, Region, ZeroEvidenceError, cexpectation,
                      conditional_density, conditional_probability, exponential, ideal_gas_stats, normal,
                      point_bracket, region_probability, uniform_disc)


@pytest.fixture(scope="module")
def disc():
    return uniform_disc(1.0)


UPPER = Region.halfplane((0, 1), 0)
INNER = Region.disc(0.5)


class TestRegions:
    def test_interval_contains(self):
        r = Region.interval(0, 2)
        assert r.contains(1.0) and not r.contains(3.0)

    def test_algebra(self):
        r = Region.interval(0, 2) & ~Region.interval(1, 5)
        assert r.contains(0.5) and not r.contains(1.5)
        u = Region.interval(0, 1) | Region.interval(3, 4)
        assert u.contains(3.5) and not u.contains(2)

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            Region.interval(0, 1) & UPPER

    def test_point_bracket(self):
        assert point_bracket(UPPER, (0.0, 0.5)) == 1.0
        assert point_bracket(UPPER, (0.0, -0.5)) == 0.0


class TestDarts:
    def test_upper_half(self, disc):
        assert region_probability(disc, UPPER) == pytest.approx(0.5, abs=1e-6)

    def test_full_support(self, disc):
        assert region_probability(disc, disc.region) == pytest.approx(1.0, abs=1e-8)

    def test_inner_given_upper(self, disc):
        assert conditional_probability(disc, INNER, UPPER) == pytest.approx(0.25, abs=1e-6)

    def test_conditional_density(self, disc):
        assert conditional_density(disc, UPPER, (0.0, 0.5)) == pytest.approx(2 / math.pi, abs=1e-6)
        assert conditional_density(disc, UPPER, (0.0, -0.5)) == 0.0
        assert conditional_density(disc, disc.region, (0.2, 0.1)) == pytest.approx(1 / math.pi, abs=1e-8)

    def test_mean_x(self, disc):
        assert cexpectation(disc, lambda x, y: x) == pytest.approx(0.0, abs=1e-8)

    def test_complements_sum_to_one(self, disc):
        for r in (UPPER, INNER, Region.halfplane((1, 1), 0.3)):
            total = region_probability(disc, r) + region_probability(disc, ~r)
            assert total == pytest.approx(1.0, abs=1e-8)

    def test_oblique_segment(self, disc):
        d = 0.3 / math.sqrt(2)
        oracle = (math.acos(d) - d * math.sqrt(1 - d * d)) / math.pi
        assert region_probability(disc, Region.halfplane((1, 1), 0.3)) == pytest.approx(oracle, abs=1e-8)

    def test_superset_evidence(self, disc):
        assert conditional_probability(disc, disc.region, UPPER) == pytest.approx(1.0, abs=1e-8)

    def test_zero_evidence(self, disc):
        far = Region.disc(0.1, (5.0, 5.0))
        with pytest.raises(ZeroEvidenceError):
            conditional_probability(disc, UPPER, far)


LAM = 0.7


@pytest.fixture(scope="module")
def expo():
    return exponential(LAM)


class TestExponential:
    lam = LAM

    @pytest.fixture
    def d(self, expo):
        return expo

    @pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 3.0, 10.0])
    def test_survival(self, d, t):
        assert region_probability(d, Region.interval(t, math.inf)) == pytest.approx(math.exp(-self.lam * t), abs=1e-10)

    def test_memoryless(self, d):
        for r in np.linspace(0, 4, 5):
            for s in np.linspace(0.25, 3, 5):
                got = conditional_probability(d, Region.interval(r + s, math.inf), Region.interval(r, math.inf))
                assert got == pytest.approx(math.exp(-self.lam * s), abs=1e-10)

    def test_mean(self, d):
        assert cexpectation(d, lambda t: t) == pytest.approx(1 / self.lam, abs=1e-8)

    def test_normalization(self, d):
        assert cexpectation(d, lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-10)


class TestNormal:
    def test_moments(self):
        d = normal(1.5, 2.0)
        assert cexpectation(d, lambda x: x) == pytest.approx(1.5, abs=1e-8)
        assert cexpectation(d, lambda x: (x - 1.5) ** 2) == pytest.approx(2.0, abs=1e-8)

    def test_against_scipy(self):
        d = normal(0.0, 1.0)
        ref, _ = sp_integrate.quad(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi), -0.3, 1.1)
        assert region_probability(d, Region.interval(-0.3, 1.1)) == pytest.approx(ref, abs=1e-10)


class TestConstruction:
    def test_unnormalized_rejected(self):
        with pytest.raises(DomainError):
            Density1D(lambda x: 2 * np.ones_like(x), (0, 1))

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            Density1D(lambda x: 2 * x - 0.5 + 0 * x, (0, 1))

    def test_divergent_expectation(self):
        cauchy = Density1D(lambda x: 1 / (math.pi * (1 + x * x)), (-math.inf, math.inf))
        with pytest.raises(DivergenceError):
            cexpectation(cauchy, lambda x: x * x)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.1, 5.0), st.floats(0.0, 3.0))
def test_conditional_density_integrates_to_one(lam, r):
    d = exponential(lam)
    e = Region.interval(r, math.inf)
    total = d.integrate(lambda x: np.ones_like(x), e) / region_probability(d, e)
    assert total == pytest.approx(1.0, abs=1e-8)


class TestIdealGas:
    def test_equipartition(self):
        s = ideal_gas_stats(beta=2.0, m=1.3, V=4.0, h=0.7, N=5)
        assert s.mean_energy * 2.0 == pytest.approx(1.5, abs=1e-6)
        assert s.mean_energy_quadrature * 2.0 == pytest.approx(1.5, abs=1e-6)
        assert s.z_quadrature == pytest.approx(s.z, rel=1e-6)
        assert s.total_energy == pytest.approx(5 * s.mean_energy)

    def test_single_molecule_and_scaling(self):
        a = ideal_gas_stats(1.0, 1.0, 1.0, 1.0, 1)
        b = ideal_gas_stats(2.0, 1.0, 1.0, 1.0, 1)
        assert a.total_energy == a.mean_energy
        assert b.mean_energy == pytest.approx(a.mean_energy / 2)

    def test_bad_parameter(self):
        with pytest.raises(DomainError):
            ideal_gas_stats(0.0, 1.0, 1.0, 1.0, 1)

import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from pbracket import IntegrationError
from pbracket.quadrature import DEFAULT, Quadrature, indicator_segments, integrate, integrate2d


@pytest.mark.parametrize("f, lo, hi", [
    (np.sin, 0.0, math.pi),
    (lambda x: np.exp(-x * x), -math.inf, math.inf),
    (lambda x: np.exp(-2 * x), 0.0, math.inf),
    (lambda x: 1 / (1 + x * x), -math.inf, 0.0),
    (np.sqrt, 0.0, 1.0),
    (lambda x: np.abs(x - 0.3), -1.0, 1.0),
])
def test_against_scipy(f, lo, hi):
    ref, _ = sp_integrate.quad(lambda x: float(f(np.array(x))), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=500)
    got, err = integrate(f, lo, hi, points=(0.3,))
    assert got == pytest.approx(ref, abs=1e-9, rel=1e-8)
    assert err <= max(DEFAULT.abs_tol, DEFAULT.rel_tol * abs(got))


def test_indicator_restricts_range():
    got, _ = integrate(lambda x: np.ones_like(x), 0.0, 1.0, indicator=lambda x: (x > 0.25) & (x < 0.6))
    assert got == pytest.approx(0.35, abs=1e-12)


def test_segments_found_by_bisection():
    segs = indicator_segments(lambda x: (x > 0.1) & (x < 0.2) | (x > 0.7), 0.0, 1.0, 257)
    assert len(segs) == 2
    assert segs[0] == pytest.approx((0.1, 0.2), abs=1e-14)
    assert segs[1][0] == pytest.approx(0.7, abs=1e-14)


def test_nonfinite_integrand_raises():
    with pytest.raises(IntegrationError):
        integrate(lambda x: 1 / x, 0.0, 1.0)


def test_budget_exhaustion_raises_with_estimate():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0.0, 1.0, Quadrature(max_subdivisions=8))
    assert math.isfinite(info.value.estimate)


def test_disc_area():
    got, _ = integrate2d(lambda x, y: np.ones_like(x), lambda x, y: x * x + y * y <= 1, ((-1, 1), (-1, 1)))
    assert got == pytest.approx(math.pi, abs=1e-8)


def test_thin_slices_resolved_with_support():
    # lower half of the unit disc: near x = +-1 the slices are thinner than the probe spacing
    disc = lambda x, y: x * x + y * y <= 1
    lower = lambda x, y: y < 0
    got, _ = integrate2d(lambda x, y: np.ones_like(x), lower, ((-1, 1), (-1, 1)), support=disc)
    assert got == pytest.approx(math.pi / 2, abs=1e-9)


def test_2d_gaussian_moment():
    f = lambda x, y: x * x * np.exp(-(x * x + y * y) / 2) / (2 * math.pi)
    got, _ = integrate2d(f, lambda x, y: np.ones(np.shape(x), dtype=bool), ((-12, 12), (-12, 12)))
    assert got == pytest.approx(1.0, abs=1e-9)

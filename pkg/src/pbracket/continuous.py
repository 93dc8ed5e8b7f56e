"""Continuous sample spaces described by densities.

A density is a pure, vectorized pdf together with its support and a
:class:`~pbracket.quadrature.Quadrature` configuration.  Regions are
indicator functions with a bounding box; probabilities, conditional
probabilities and expectations are all quadrature over the intersection
of a region with the support.

Base-event brackets between two points are delta functions and are never
returned as numbers.  Conditioning on a point only answers whether the
point lies in an event (:func:`point_bracket`).

Examples
--------
>>> d = exponential(2.0)
>>> round(region_probability(d, Region.interval(1.0, math.inf)), 12)
0.135335283237
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DivergenceError, DomainError, IntegrationError, ZeroEvidenceError
from .quadrature import DEFAULT, Quadrature, integrate, integrate2d

_INF = math.inf


def _clip(a: tuple[float, float], b: tuple[float, float]) -> tuple[float, float]:
    return max(a[0], b[0]), min(a[1], b[1])


@dataclass(frozen=True)
class Region:
    """A measurable subset of the line or the plane.

    Parameters
    ----------
    indicator : callable
        ``indicator(x)`` in one dimension or ``indicator(x, y)`` in two,
        vectorized, returning booleans.
    bounds : tuple of (lo, hi)
        A box that contains the region, one pair per dimension.
    is_box : bool
        True when the region is exactly its bounding box; quadrature then
        skips indicator probing.
    """

    indicator: Callable
    bounds: tuple
    is_box: bool = False

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Region":
        """The closed interval ``[lo, hi]``; either end may be infinite."""
        if not lo <= hi:
            raise DomainError(f"empty interval [{lo}, {hi}]")
        return cls(lambda x: (x >= lo) & (x <= hi), ((float(lo), float(hi)),), True)

    @classmethod
    def box(cls, xlim: tuple[float, float], ylim: tuple[float, float]) -> "Region":
        (x0, x1), (y0, y1) = xlim, ylim
        return cls(lambda x, y: (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1),
                   ((float(x0), float(x1)), (float(y0), float(y1))), True)

    @classmethod
    def halfplane(cls, normal: tuple[float, float], offset: float = 0.0) -> "Region":
        """Points ``p`` with ``normal . p >= offset``."""
        a, b = map(float, normal)
        if a == 0.0 and b == 0.0:
            raise DomainError("half-plane normal must be nonzero")
        bounds = [(-_INF, _INF), (-_INF, _INF)]
        # axis-aligned half-planes get a tight box
        if a == 0.0:
            bounds[1] = (offset / b, _INF) if b > 0 else (-_INF, offset / b)
        elif b == 0.0:
            bounds[0] = (offset / a, _INF) if a > 0 else (-_INF, offset / a)
        return cls(lambda x, y: a * x + b * y >= offset, tuple(bounds))

    @classmethod
    def disc(cls, radius: float = 1.0, center: tuple[float, float] = (0.0, 0.0)) -> "Region":
        if radius <= 0:
            raise DomainError("disc radius must be positive")
        cx, cy = map(float, center)
        r2 = float(radius) ** 2
        return cls(lambda x, y: (x - cx) ** 2 + (y - cy) ** 2 <= r2,
                   ((cx - radius, cx + radius), (cy - radius, cy + radius)))

    def _check(self, other: "Region"):
        if self.dim != other.dim:
            raise DomainError(f"cannot combine {self.dim}-D and {other.dim}-D regions")

    def __and__(self, other: "Region") -> "Region":
        self._check(other)
        f, g = self.indicator, other.indicator
        bounds = tuple(_clip(a, b) for a, b in zip(self.bounds, other.bounds))
        both = self.is_box and other.is_box
        return Region(lambda *p: f(*p) & g(*p), bounds, both)

    def __or__(self, other: "Region") -> "Region":
        self._check(other)
        f, g = self.indicator, other.indicator
        bounds = tuple((min(a[0], b[0]), max(a[1], b[1])) for a, b in zip(self.bounds, other.bounds))
        return Region(lambda *p: f(*p) | g(*p), bounds)

    def __invert__(self) -> "Region":
        f = self.indicator
        return Region(lambda *p: ~np.asarray(f(*p), dtype=bool), ((-_INF, _INF),) * self.dim)

    def contains(self, point) -> bool:
        coords = np.atleast_1d(np.asarray(point, dtype=float))
        if coords.size != self.dim:
            raise DomainError(f"point has {coords.size} coordinates, region is {self.dim}-D")
        return bool(np.asarray(self.indicator(*coords)))


def _normalization_tol(quad: Quadrature) -> float:
    return max(100 * quad.abs_tol, 10 * quad.rel_tol)


class Density1D:
    """A probability density on an interval of the real line.

    Parameters
    ----------
    pdf : callable
        Vectorized density.
    support : (lo, hi)
        ``hi`` (or ``lo``) may be infinite.
    quad : Quadrature
        Settings used for every integral against this density.
    points : sequence of float
        Peaks or kinks of the pdf, handed to the integrator as break points.
    check : bool
        Verify nonnegativity and unit mass at construction.
    """

    dim = 1

    def __init__(self, pdf: Callable, support: tuple[float, float], quad: Quadrature = DEFAULT,
                 points: Sequence[float] = (), check: bool = True, name: str = "density"):
        lo, hi = map(float, support)
        if not lo < hi:
            raise DomainError(f"empty support ({lo}, {hi})")
        self.pdf = pdf
        self.support = (lo, hi)
        self.quad = quad
        self.points = tuple(points)
        self.name = name
        if check:
            self._validate()

    @property
    def region(self) -> Region:
        return Region.interval(*self.support)

    def _validate(self):
        lo, hi = self.support
        a = lo if math.isfinite(lo) else -50.0
        b = hi if math.isfinite(hi) else a + 100.0
        probe = np.linspace(a, b, 1001)
        if np.any(np.asarray(self.pdf(probe)) < 0):
            raise DomainError(f"{self.name}: pdf takes negative values")
        total = self.integrate(lambda x: np.ones_like(x))
        if abs(total - 1.0) > _normalization_tol(self.quad):
            raise DomainError(f"{self.name}: pdf integrates to {total!r}, not 1")

    def integrate(self, g: Callable, region: Region | None = None) -> float:
        """Integral of ``g * pdf`` over the support, optionally restricted to ``region``."""
        lo, hi = self.support
        indicator = None
        if region is not None:
            if region.dim != 1:
                raise DomainError("a 1-D density needs a 1-D region")
            lo, hi = _clip((lo, hi), region.bounds[0])
            if not lo < hi:
                return 0.0
            indicator = None if region.is_box else region.indicator
        pdf = self.pdf
        value, _ = integrate(lambda x: g(x) * pdf(x), lo, hi, self.quad,
                             points=self.points, indicator=indicator)
        return value

    def density_at(self, point) -> float:
        x = float(np.asarray(point).reshape(-1)[0])
        lo, hi = self.support
        return float(self.pdf(np.array([x]))[0]) if lo <= x <= hi else 0.0


class Density2D:
    """A probability density on a rectangle, optionally restricted by an indicator.

    Parameters
    ----------
    pdf : callable
        Vectorized ``pdf(x, y)``.
    box : ((x0, x1), (y0, y1))
        Finite rectangle containing the support.
    indicator : callable, optional
        Support predicate inside the box; the pdf is taken as zero outside.
    """

    dim = 2

    def __init__(self, pdf: Callable, box, indicator: Callable | None = None,
                 quad: Quadrature = DEFAULT, check: bool = True, name: str = "density"):
        (x0, x1), (y0, y1) = box
        box = ((float(x0), float(x1)), (float(y0), float(y1)))
        if not all(math.isfinite(v) for pair in box for v in pair):
            raise DomainError("a 2-D density needs a finite box")
        self.pdf = pdf
        self.box = box
        self.indicator = indicator
        self.quad = quad
        self.name = name
        if check:
            self._validate()

    @property
    def region(self) -> Region:
        if self.indicator is None:
            return Region.box(*self.box)
        return Region(self.indicator, self.box)

    def _validate(self):
        (x0, x1), (y0, y1) = self.box
        gx, gy = np.meshgrid(np.linspace(x0, x1, 41), np.linspace(y0, y1, 41))
        vals = np.asarray(self.pdf(gx, gy))
        if self.indicator is not None:
            vals = np.where(self.indicator(gx, gy), vals, 0.0)
        if np.any(vals < 0):
            raise DomainError(f"{self.name}: pdf takes negative values")
        total = self.integrate(lambda x, y: np.ones_like(x))
        if abs(total - 1.0) > _normalization_tol(self.quad):
            raise DomainError(f"{self.name}: pdf integrates to {total!r}, not 1")

    def integrate(self, g: Callable, region: Region | None = None) -> float:
        box = self.box
        event = None
        if region is not None:
            if region.dim != 2:
                raise DomainError("a 2-D density needs a 2-D region")
            box = tuple(_clip(a, b) for a, b in zip(box, region.bounds))
            if not all(a < b for a, b in box):
                return 0.0
            if not region.is_box:
                event = region.indicator
        support = self.indicator
        if event is None:
            event, support = support, None
        if event is None:
            def event(x, y):
                return np.ones(np.shape(x), dtype=bool)
        pdf = self.pdf
        value, _ = integrate2d(lambda x, y: g(x, y) * pdf(x, y), event, box, self.quad, support=support)
        return value

    def density_at(self, point) -> float:
        x, y = (float(v) for v in point)
        (x0, x1), (y0, y1) = self.box
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            return 0.0
        xa, ya = np.array([x]), np.array([y])
        if self.indicator is not None and not bool(np.asarray(self.indicator(xa, ya))[0]):
            return 0.0
        return float(np.asarray(self.pdf(xa, ya))[0])


Density = Density1D | Density2D


def _one(d: Density) -> Callable:
    if d.dim == 1:
        return lambda x: np.ones_like(x)
    return lambda x, y: np.ones_like(x)


def region_probability(d: Density, region: Region) -> float:
    """P(E) as the integral of the pdf over ``region``.

    Raises
    ------
    IntegrationError
        If quadrature does not reach its tolerance; ``estimate`` holds the
        value reached.
    """
    return min(1.0, max(0.0, d.integrate(_one(d), region)))


def _evidence(d: Density, region: Region) -> float:
    p = region_probability(d, region)
    if p <= _normalization_tol(d.quad) * 1e-2:
        raise ZeroEvidenceError("conditioning region has probability zero")
    return p


def conditional_density(d: Density, given: Region, point) -> float:
    """f(x|E) = f(x) / P(E) for x in E, and 0 outside E."""
    pe = _evidence(d, given)
    if not given.contains(point):
        return 0.0
    return d.density_at(point) / pe


def conditional_probability(d: Density, event: Region, given: Region) -> float:
    """P(F|E) = P(F and E) / P(E)."""
    pe = _evidence(d, given)
    return min(1.0, region_probability(d, event & given) / pe)


def cexpectation(d: Density, g: Callable, given: Region | None = None) -> float:
    """E[g] = integral of g * pdf, optionally conditioned on a region.

    Raises
    ------
    DivergenceError
        When the integral does not settle under subdivision, which is how an
        integral that fails to converge absolutely shows up.
    """
    try:
        value = d.integrate(g, given)
    except IntegrationError as exc:
        raise DivergenceError(f"expectation does not converge: {exc}",
                              estimate=exc.estimate, error=exc.error) from exc
    if given is not None:
        value /= _evidence(d, given)
    return value


def point_bracket(region: Region, point) -> float:
    """P(A|x): 1 when the point lies in A, else 0."""
    return 1.0 if region.contains(point) else 0.0


# ---------------------------------------------------------------- named densities

def uniform_disc(radius: float = 1.0, quad: Quadrature = DEFAULT) -> Density2D:
    """Uniform density 1/(pi r^2) on a disc centred at the origin."""
    if radius <= 0:
        raise DomainError("disc radius must be positive")
    c = 1.0 / (math.pi * radius * radius)
    disc = Region.disc(radius)
    return Density2D(lambda x, y: np.full(np.shape(x), c), disc.bounds, disc.indicator,
                     quad, name="uniform_disc")


def exponential(lam: float, quad: Quadrature = DEFAULT) -> Density1D:
    """lam * exp(-lam t) on [0, inf)."""
    if not lam > 0:
        raise DomainError("exponential rate must be positive")
    return Density1D(lambda t: lam * np.exp(-lam * t), (0.0, _INF), quad, name="exponential")


def normal(mu: float = 0.0, sigma2: float = 1.0, quad: Quadrature = DEFAULT) -> Density1D:
    """Normal density with mean ``mu`` and variance ``sigma2``."""
    if not sigma2 > 0:
        raise DomainError("variance must be positive")
    c = 1.0 / math.sqrt(2.0 * math.pi * sigma2)
    return Density1D(lambda x: c * np.exp(-(x - mu) ** 2 / (2.0 * sigma2)), (-_INF, _INF), quad,
                     points=(mu,), name="normal")


# ---------------------------------------------------------------- ideal gas

@dataclass(frozen=True)
class IdealGasStats:
    """One-molecule partition function and energies of a classical ideal gas."""

    z: float
    z_quadrature: float
    mean_energy: float
    mean_energy_quadrature: float
    total_energy: float


def ideal_gas_stats(beta: float, m: float, V: float, h: float, N: int,
                    quad: Quadrature = DEFAULT) -> IdealGasStats:
    """Closed-form and quadrature statistics of N free molecules in a box.

    The momentum integral is radial.  With ``p = s * sqrt(2 m / beta)`` it
    becomes ``z = 4 pi V (2 m / beta)^{3/2} / h^3 * int s^2 exp(-s^2) ds``,
    and the mean kinetic energy is ``(1 / beta) * int s^4 e^{-s^2} / int s^2 e^{-s^2}``.
    """
    for name, v in (("beta", beta), ("m", m), ("V", V), ("h", h), ("N", N)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    z = V * (2.0 * math.pi * m / (h * h * beta)) ** 1.5
    i2, _ = integrate(lambda s: s * s * np.exp(-s * s), 0.0, _INF, quad)
    i4, _ = integrate(lambda s: s ** 4 * np.exp(-s * s), 0.0, _INF, quad)
    z_quad = 4.0 * math.pi * V * (2.0 * m / beta) ** 1.5 / h ** 3 * i2
    mean = 1.5 / beta
    return IdealGasStats(z=z, z_quadrature=z_quad, mean_energy=mean,
                         mean_energy_quadrature=i4 / (i2 * beta), total_energy=N * mean)

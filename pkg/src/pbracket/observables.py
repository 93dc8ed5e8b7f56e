"""Observables on finite spaces, and products of independent spaces."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import TOL
from .errors import DomainError, ObservableError, TotalityError
from .sample import DiscreteSpace, EventSet, Partition, _evidence, validate_partition


class Observable:
    """A real-valued random variable, stored as outcome -> value.

    The observable acts diagonally on base outcomes, ``X|x) = x|x)``.
    Arithmetic with other observables or scalars is pointwise.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping):
        self._values = {k: float(v) for k, v in values.items()}

    @classmethod
    def from_function(cls, space: DiscreteSpace, fn: Callable) -> "Observable":
        return cls({label: fn(label) for label in space.outcomes})

    @classmethod
    def identity(cls, space: DiscreteSpace) -> "Observable":
        """X(w) = w for numeric outcome labels."""
        try:
            return cls({label: float(label) for label in space.outcomes})
        except (TypeError, ValueError) as exc:
            raise ObservableError("outcome labels are not numeric") from exc

    @classmethod
    def constant(cls, space: DiscreteSpace, c: float) -> "Observable":
        return cls({label: c for label in space.outcomes})

    @property
    def values(self) -> dict:
        return dict(self._values)

    def __getitem__(self, label):
        return self._values[label]

    def on(self, space: DiscreteSpace) -> np.ndarray:
        """Values aligned with the outcome order of ``space``."""
        try:
            return np.array([self._values[label] for label in space.outcomes])
        except KeyError as exc:
            raise TotalityError(f"observable has no value for outcome {exc.args[0]!r}") from None

    def _combine(self, other, op):
        if isinstance(other, Observable):
            if self._values.keys() != other._values.keys():
                raise TotalityError("observables are defined on different outcome sets")
            return Observable({k: op(v, other._values[k]) for k, v in self._values.items()})
        return Observable({k: op(v, float(other)) for k, v in self._values.items()})

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __pow__(self, k):
        return Observable({key: v ** k for key, v in self._values.items()})

    def map(self, fn: Callable[[float], float]) -> "Observable":
        return Observable({k: fn(v) for k, v in self._values.items()})

    def __repr__(self):
        return f"Observable({len(self._values)} values)"


def expectation(space: DiscreteSpace, x: Observable) -> float:
    """P(Omega|X|Omega) = sum of x(w) m(w)."""
    return math.fsum(x.on(space) * space.masses)


def expectation_fn(space: DiscreteSpace, fn: Callable[[float], float], x: Observable) -> float:
    """<F(X)> = sum of F(x(w)) m(w)."""
    vals = x.on(space)
    return math.fsum(float(fn(v)) * m for v, m in zip(vals, space.masses))


def variance(space: DiscreteSpace, x: Observable, tol: float | None = None) -> float:
    """Two-pass variance sum of (x - mean)^2 m.

    Tiny negative values from rounding are clamped to zero.
    """
    tol = TOL.algebraic if tol is None else tol
    vals = x.on(space)
    mean = math.fsum(vals * space.masses)
    var = math.fsum((vals - mean) ** 2 * space.masses)
    if var < 0:
        if var < -tol:
            raise ArithmeticError(f"negative variance {var}")
        var = 0.0
    return var


def conditional_expectation(space: DiscreteSpace, x: Observable, given: EventSet) -> float:
    """E(X|F) = sum over w in F of x(w) m(w) / P(F)."""
    vals = x.on(space)
    mf = space.mask(given)
    pf = _evidence(space, mf, "conditioning event")
    return math.fsum(vals[mf] * space.masses[mf]) / pf


def partition_expectation(space: DiscreteSpace, x: Observable, part: Partition) -> float:
    """Sum of E(X|F_j) P(F_j) over a partition; zero-mass blocks are skipped."""
    part = validate_partition(space, part.blocks)
    terms = []
    for block in part:
        pf = math.fsum(space.masses[space.mask(block)])
        if pf == 0.0:
            continue
        terms.append(conditional_expectation(space, x, block) * pf)
    return math.fsum(terms)


def _numeric(label):
    try:
        return float(label)
    except (TypeError, ValueError):
        return None


@dataclass(frozen=True)
class ProductSpace:
    """Joint space of independent factors.

    ``joint`` has tuple labels and product masses.  ``coords[i]`` holds the
    numeric value of each outcome label of factor ``i``, or ``None`` when
    that factor's labels are not decimal numerals.
    """

    factors: tuple[DiscreteSpace, ...]
    joint: DiscreteSpace
    coords: tuple

    def coordinate(self, i: int) -> Observable:
        """The coordinate observable X_i(r_1..r_n) = r_i."""
        self._check_index(i)
        values = self.coords[i]
        if values is None:
            raise ObservableError(f"factor {i} has non-numeric outcome labels")
        lookup = dict(zip(self.factors[i].outcomes, values))
        return Observable({label: lookup[label[i]] for label in self.joint.outcomes})

    def coordinate_event(self, i: int, labels) -> EventSet:
        """The event that coordinate ``i`` takes one of ``labels``."""
        self._check_index(i)
        wanted = set(labels)
        for label in wanted:
            self.factors[i].index(label)
        return EventSet(o for o in self.joint.outcomes if o[i] in wanted)

    def _check_index(self, i):
        if not isinstance(i, (int, np.integer)) or not 0 <= i < len(self.factors):
            raise IndexError(f"factor index {i} out of range for {len(self.factors)} factors")


def product_space(factors: Sequence[DiscreteSpace]) -> ProductSpace:
    """Cartesian product of independent spaces with product masses."""
    factors = tuple(factors)
    if not factors:
        raise DomainError("a product space needs at least one factor")
    labels = list(itertools.product(*(f.outcomes for f in factors)))
    grids = np.meshgrid(*(f.masses for f in factors), indexing="ij")
    masses = np.ones(grids[0].shape)
    for g in grids:
        masses = masses * g
    joint = DiscreteSpace(labels, masses.ravel())
    coords = []
    for f in factors:
        parsed = [_numeric(label) for label in f.outcomes]
        coords.append(None if any(v is None for v in parsed) else tuple(parsed))
    return ProductSpace(factors, joint, tuple(coords))


def marginal(ps: ProductSpace, i: int) -> DiscreteSpace:
    """Sum joint masses over every coordinate except ``i``."""
    ps._check_index(i)
    factor = ps.factors[i]
    sums = np.zeros(len(factor))
    for label, m in zip(ps.joint.outcomes, ps.joint.masses):
        sums[factor.index(label[i])] += m
    return DiscreteSpace(factor.outcomes, sums)


def moment_product(ps: ProductSpace, exponents: Sequence[int]) -> float:
    """<prod_i X_i^k_i> for independent coordinates, as prod_i <X_i^k_i>.

    Factors with a zero exponent are skipped, so their labels need not be
    numeric.
    """
    exponents = tuple(exponents)
    if len(exponents) != len(ps.factors):
        raise DomainError(f"{len(exponents)} exponents for {len(ps.factors)} factors")
    result = 1.0
    for i, k in enumerate(exponents):
        if k < 0 or int(k) != k:
            raise DomainError(f"exponent {k} is not a nonnegative integer")
        if k == 0:
            continue
        values = ps.coords[i]
        if values is None:
            raise ObservableError(f"factor {i} has non-numeric outcome labels")
        result *= math.fsum(np.asarray(values) ** int(k) * ps.factors[i].masses)
    return result

"""Finite sample spaces, events and probability brackets.

A :class:`DiscreteSpace` is the system P-ket of a finite experiment: an
ordered outcome list with a nonnegative mass per outcome.  Events are plain
label sets (:class:`EventSet`); internally they are turned into boolean masks
over the outcome order.

All objects are immutable and every operation is a pure function, so
spaces and events can be shared freely.

Examples
--------
>>> die = DiscreteSpace.uniform(["1", "2", "3", "4", "5", "6"])
>>> even = EventSet({"2", "4", "6"})
>>> probability(die, even)
0.5
>>> round(bracket(die, EventSet({"2"}), even), 12)
0.333333333333
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .config import TOL
from .errors import LabelError, PartitionError, ZeroEvidenceError, DomainError

Label = Hashable


def as_number(value) -> Fraction | float:
    """Parse ``"1/6"``-style strings exactly; pass numbers through."""
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse number {value!r}") from exc
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    return float(value)


@dataclass(frozen=True)
class EventSet:
    """A subset of a space's outcomes, addressed by label."""

    members: frozenset = field(default_factory=frozenset)

    def __init__(self, members: Iterable[Label] = ()):
        if isinstance(members, (str, bytes)):
            members = (members,)
        object.__setattr__(self, "members", frozenset(members))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, label):
        return label in self.members

    def __or__(self, other: "EventSet") -> "EventSet":
        return EventSet(self.members | other.members)

    def __and__(self, other: "EventSet") -> "EventSet":
        return EventSet(self.members & other.members)

    def __sub__(self, other: "EventSet") -> "EventSet":
        return EventSet(self.members - other.members)

    def __repr__(self):
        return f"EventSet({sorted(self.members, key=str)!r})"


class DiscreteSpace:
    """Finite outcome set with a distribution function.

    Parameters
    ----------
    outcomes : sequence of hashable
        Distinct outcome labels, in display order.
    masses : sequence or mapping
        One nonnegative mass per outcome.  Strings such as ``"1/6"`` are
        parsed as exact rationals.  The masses must sum to 1 within the
        algebraic tolerance; they are then renormalized once.
    """

    __slots__ = ("_outcomes", "_index", "_masses")

    def __init__(self, outcomes: Sequence[Label], masses: Sequence | Mapping, *, tol: float | None = None):
        tol = TOL.algebraic if tol is None else tol
        outcomes = tuple(outcomes)
        if not outcomes:
            raise DomainError("a sample space needs at least one outcome")
        index = {}
        for i, label in enumerate(outcomes):
            if label in index:
                raise LabelError(f"duplicate outcome label {label!r}")
            index[label] = i
        if isinstance(masses, Mapping):
            unknown = set(masses) - set(index)
            if unknown:
                raise LabelError(f"masses given for unknown outcomes {sorted(map(str, unknown))}")
            masses = [masses.get(label, 0) for label in outcomes]
        values = [as_number(m) for m in masses]
        if len(values) != len(outcomes):
            raise DomainError(f"{len(outcomes)} outcomes but {len(values)} masses")
        for label, m in zip(outcomes, values):
            if m < 0:
                raise DomainError(f"negative mass {float(m)} for outcome {label!r}")
        if all(isinstance(m, Fraction) for m in values):
            total = sum(values, Fraction(0))
            if abs(total - 1) > tol:
                raise DomainError(f"masses sum to {float(total)!r}, not 1")
            arr = np.array([float(m / total) for m in values])
        else:
            arr = np.array([float(m) for m in values])
            total = math.fsum(arr)
            if abs(total - 1.0) > tol:
                raise DomainError(f"masses sum to {total!r}, not 1")
            arr = arr / total
        arr.setflags(write=False)
        self._outcomes = outcomes
        self._index = index
        self._masses = arr

    @classmethod
    def uniform(cls, outcomes: Sequence[Label]) -> "DiscreteSpace":
        outcomes = tuple(outcomes)
        return cls(outcomes, [Fraction(1, len(outcomes))] * len(outcomes))

    @property
    def outcomes(self) -> tuple:
        return self._outcomes

    @property
    def masses(self) -> np.ndarray:
        """Read-only mass array in outcome order."""
        return self._masses

    def mass(self, label: Label) -> float:
        return float(self._masses[self.index(label)])

    def index(self, label: Label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise LabelError(f"unknown outcome {label!r}") from None

    def __len__(self):
        return len(self._outcomes)

    def __contains__(self, label):
        try:
            return label in self._index
        except TypeError:
            return False

    def __repr__(self):
        return f"DiscreteSpace({len(self)} outcomes)"

    @property
    def omega(self) -> EventSet:
        """The sure event, i.e. the whole outcome set."""
        return EventSet(self._outcomes)

    def event(self, *labels: Label) -> EventSet:
        ev = EventSet(labels)
        self.mask(ev)
        return ev

    def singletons(self) -> list[EventSet]:
        return [EventSet((label,)) for label in self._outcomes]

    def complement(self, event: EventSet) -> EventSet:
        mask = self.mask(event)
        return EventSet(o for o, inside in zip(self._outcomes, mask) if not inside)

    def mask(self, event: EventSet | Iterable[Label]) -> np.ndarray:
        """Boolean mask of ``event`` over the outcome order."""
        out = np.zeros(len(self._outcomes), dtype=bool)
        for label in event:
            out[self.index(label)] = True
        return out


def _p(space: DiscreteSpace, mask: np.ndarray) -> float:
    return math.fsum(space.masses[mask])


def probability(space: DiscreteSpace, event: EventSet) -> float:
    """P(E) = P(E|Omega), the summed mass of the event."""
    return min(1.0, _p(space, space.mask(event)))


def _evidence(space: DiscreteSpace, mask: np.ndarray, what: str) -> float:
    p = _p(space, mask)
    if p == 0.0:
        raise ZeroEvidenceError(f"{what} has probability zero")
    return p


def bracket(space: DiscreteSpace, a: EventSet, b: EventSet) -> float:
    """The P-bracket P(A|B) = P(A and B) / P(B).

    Raises
    ------
    ZeroEvidenceError
        If P(B) = 0; the bracket is undefined there.
    """
    mb = space.mask(b)
    pb = _evidence(space, mb, "evidence")
    return min(1.0, _p(space, space.mask(a) & mb) / pb)


def bayes(space: DiscreteSpace, a: EventSet, b: EventSet) -> float:
    """P(A|B) computed the long way round: P(B|A) P(A) / P(B)."""
    ma = space.mask(a)
    pa = _evidence(space, ma, "event A")
    pb = _evidence(space, space.mask(b), "evidence B")
    return bracket(space, b, a) * pa / pb


@dataclass(frozen=True)
class Partition:
    """A complete, mutually disjoint family of events."""

    blocks: tuple[EventSet, ...]

    def __iter__(self):
        return iter(self.blocks)

    def __len__(self):
        return len(self.blocks)


def validate_partition(space: DiscreteSpace, blocks: Iterable[EventSet | Iterable[Label]]) -> Partition:
    """Check that ``blocks`` are pairwise disjoint and cover the space.

    Raises
    ------
    PartitionError
        Naming the first outcome that is covered twice or not at all.
    """
    blocks = tuple(b if isinstance(b, EventSet) else EventSet(b) for b in blocks)
    owner: dict = {}
    for i, block in enumerate(blocks):
        for label in sorted(block, key=str):
            space.index(label)
            if label in owner:
                raise PartitionError(
                    f"outcome {label!r} lies in blocks {owner[label]} and {i}", outcome=label)
            owner[label] = i
    for label in space.outcomes:
        if label not in owner:
            raise PartitionError(f"outcome {label!r} is not covered by any block", outcome=label)
    return Partition(blocks)


def singleton_partition(space: DiscreteSpace) -> Partition:
    """The P-basis: one block per outcome."""
    return Partition(tuple(space.singletons()))


def total_probability(space: DiscreteSpace, event: EventSet, part: Partition) -> float:
    """Sum of P(E|H_i) P(H_i) over the blocks of a partition.

    Blocks of zero probability contribute nothing.
    """
    part = validate_partition(space, part.blocks)
    me = space.mask(event)
    terms = []
    for block in part:
        mh = space.mask(block)
        ph = _p(space, mh)
        if ph == 0.0:
            continue
        terms.append(_p(space, me & mh) / ph * ph)
    return math.fsum(terms)


def identity_insertion(space: DiscreteSpace, a: EventSet, b: EventSet, part: Partition) -> float:
    """Expand P(A|B) through a partition: sum_i P(A|H_i) P(H_i|B).

    This reproduces P(A|B) when the partition is the P-basis, when A is a
    union of blocks, or when B is the sure event.  For a coarse partition
    and general A, B the sum differs from P(A|B) (take A = B = {1} on a die
    with blocks odd/even: the sum is 1/3).
    """
    mb = space.mask(b)
    pb = _evidence(space, mb, "evidence")
    ma = space.mask(a)
    terms = []
    for block in part:
        mh = space.mask(block)
        ph = _p(space, mh)
        if ph == 0.0:
            continue
        terms.append(_p(space, ma & mh) / ph * (_p(space, mh & mb) / pb))
    return math.fsum(terms)


def is_independent(space: DiscreteSpace, e: EventSet, f: EventSet, tol: float | None = None) -> bool:
    """True iff P(E and F) = P(E) P(F) within ``tol``.

    Events of probability zero are independent of everything.
    """
    tol = TOL.algebraic if tol is None else tol
    me, mf = space.mask(e), space.mask(f)
    pe, pf = _p(space, me), _p(space, mf)
    if pe == 0.0 or pf == 0.0:
        return True
    return abs(_p(space, me & mf) - pe * pf) <= tol


def ket_expansion(space: DiscreteSpace, event: EventSet) -> dict:
    """Right expansion of the P-ket |E): outcome -> P(outcome|E).

    Outcomes outside E map to 0; the values sum to 1.
    """
    me = space.mask(event)
    pe = _evidence(space, me, "event")
    return {label: (float(m) / pe if inside else 0.0)
            for label, m, inside in zip(space.outcomes, space.masses, me)}


def bra_expansion(event: EventSet) -> frozenset:
    """Left expansion of the P-bra P(E|: only the member labels, no masses."""
    return event.members

"""Discrete-time homogeneous Markov chains.

``P[i, j]`` is the probability of moving from state ``i`` to state ``j`` in
one step, so ``P`` is row-stochastic.  A chain state is a
:class:`ProbVector` with an explicit orientation:

* a *row* vector evolves by multiplying ``P`` from the right,
  ``u(n) = u(0) P^n`` (:func:`evolve_left`);
* a *column* vector evolves under the transpose, ``v(n) = (P^T)^n v(0)``
  (:func:`evolve_right`).

Both share one product kernel; the orientation is bookkeeping that stops a
row vector from being fed where a column vector is expected.

Examples
--------
>>> P = StochasticMatrix(["R", "N", "S"], [["1/2", "1/4", "1/4"],
...                                        ["1/2", "0", "1/2"],
...                                        ["1/4", "1/4", "1/2"]])
>>> u = ProbVector.uniform(P.states)
>>> np.round(evolve_left(u, P, 3).weights, 3)
array([0.401, 0.198, 0.401])
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .config import TOL
from .errors import AlignmentError, ConvergenceError, DomainError, LabelError, OrientationError
from .sample import as_number

ROW = "row"
COLUMN = "column"


def _float_matrix(entries) -> np.ndarray:
    rows = [[float(as_number(v)) if isinstance(v, str) else float(v) for v in row] for row in entries]
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _check_labels(states: Sequence) -> tuple:
    states = tuple(states)
    if len(set(states)) != len(states):
        raise LabelError("duplicate state labels")
    if not states:
        raise DomainError("a chain needs at least one state")
    return states


class StochasticMatrix:
    """A row-stochastic transition matrix with labelled states.

    Parameters
    ----------
    states : sequence of hashable
        State labels, giving the row and column order.
    entries : array-like
        ``entries[i][j]`` = p_ij.  Strings such as ``"1/4"`` are allowed.
    tol : float, optional
        Allowed deviation of each row sum from 1.
    """

    __slots__ = ("_states", "_index", "_p")

    def __init__(self, states: Sequence, entries, tol: float | None = None):
        tol = TOL.algebraic if tol is None else tol
        states = _check_labels(states)
        p = _float_matrix(entries)
        if p.shape[0] != len(states):
            raise DomainError(f"{len(states)} states but a {p.shape[0]}x{p.shape[0]} matrix")
        if not np.all(np.isfinite(p)):
            raise DomainError("matrix entries must be finite")
        if np.any(p < 0):
            i, j = np.argwhere(p < 0)[0]
            raise DomainError(f"negative transition probability p[{states[i]!r}, {states[j]!r}] = {p[i, j]}")
        sums = p.sum(axis=1)
        bad = np.abs(sums - 1.0) > tol
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(f"row {states[i]!r} sums to {sums[i]!r}, not 1")
        p.setflags(write=False)
        self._states = states
        self._index = {s: i for i, s in enumerate(states)}
        self._p = p

    @classmethod
    def identity(cls, states: Sequence) -> "StochasticMatrix":
        return cls(states, np.eye(len(tuple(states))))

    @property
    def states(self) -> tuple:
        return self._states

    @property
    def matrix(self) -> np.ndarray:
        """Read-only row-stochastic array."""
        return self._p

    def __len__(self):
        return len(self._states)

    def __getitem__(self, key) -> float:
        i, j = key
        return float(self._p[self.index(i), self.index(j)])

    def index(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise LabelError(f"unknown state {label!r}") from None

    def __repr__(self):
        return f"StochasticMatrix({len(self)} states)"

    def format(self, digits: int = 12) -> str:
        """Row-major table with state labels."""
        labels = [str(s) for s in self._states]
        cells = [[f"{v:.{digits}g}" for v in row] for row in self._p]
        width = max(len(c) for c in labels + [c for row in cells for c in row])
        head = " " * width + " " + " ".join(c.rjust(width) for c in labels)
        body = [lab.rjust(width) + " " + " ".join(c.rjust(width) for c in row)
                for lab, row in zip(labels, cells)]
        return "\n".join([head, *body])


class ProbVector:
    """A probability vector over labelled states, with orientation.

    Parameters
    ----------
    states : sequence of hashable
    weights : sequence of float or str
        Nonnegative, summing to 1 within tolerance.  They are renormalized.
    orientation : {"row", "column"}
    """

    __slots__ = ("_states", "_w", "_orientation")

    def __init__(self, states: Sequence, weights: Iterable, orientation: str = ROW,
                 tol: float | None = None):
        tol = TOL.algebraic if tol is None else tol
        if orientation not in (ROW, COLUMN):
            raise DomainError(f"orientation must be 'row' or 'column', not {orientation!r}")
        states = _check_labels(states)
        w = np.array([float(as_number(v)) if isinstance(v, str) else float(v) for v in weights])
        if w.shape != (len(states),):
            raise DomainError(f"{len(states)} states but {w.size} weights")
        if np.any(w < -tol) or not np.all(np.isfinite(w)):
            raise DomainError(f"probability vector has negative or non-finite entries: {w}")
        total = math.fsum(w)
        if abs(total - 1.0) > tol:
            raise DomainError(f"probability vector sums to {total!r}, not 1")
        w = np.clip(w, 0.0, None)
        w = w / math.fsum(w)
        w.setflags(write=False)
        self._states = states
        self._w = w
        self._orientation = orientation

    @classmethod
    def uniform(cls, states: Sequence, orientation: str = ROW) -> "ProbVector":
        states = tuple(states)
        return cls(states, np.full(len(states), 1.0 / len(states)), orientation)

    @classmethod
    def one_hot(cls, states: Sequence, label, orientation: str = ROW) -> "ProbVector":
        states = tuple(states)
        if label not in states:
            raise LabelError(f"unknown state {label!r}")
        return cls(states, [1.0 if s == label else 0.0 for s in states], orientation)

    @property
    def states(self) -> tuple:
        return self._states

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def orientation(self) -> str:
        return self._orientation

    def __getitem__(self, label) -> float:
        try:
            return float(self._w[self._states.index(label)])
        except ValueError:
            raise LabelError(f"unknown state {label!r}") from None

    def transpose(self) -> "ProbVector":
        other = COLUMN if self._orientation == ROW else ROW
        return ProbVector(self._states, self._w, other)

    @property
    def T(self) -> "ProbVector":
        return self.transpose()

    def self_overlap(self) -> float:
        """The sum of squared weights.  At most 1, and equal to 1 only for a one-hot vector."""
        return math.fsum(self._w ** 2)

    def aligned(self, states: Sequence) -> np.ndarray:
        """Weights reordered to ``states``; the label sets must agree."""
        states = tuple(states)
        if states == self._states:
            return np.array(self._w)
        if set(states) != set(self._states):
            raise AlignmentError(f"vector states {self._states} do not match operator states {states}")
        pos = {s: i for i, s in enumerate(self._states)}
        return np.array([self._w[pos[s]] for s in states])

    def __repr__(self):
        return f"ProbVector({dict(zip(self._states, self._w.tolist()))}, {self._orientation})"


def _require(vec: ProbVector, orientation: str, what: str):
    if vec.orientation != orientation:
        raise OrientationError(f"{what} needs a {orientation} vector, got a {vec.orientation} vector")


def _times_power(u: np.ndarray, p: np.ndarray, n: int) -> np.ndarray:
    """u @ p^n by binary powering, without forming p^n when n is a power of two."""
    base = p
    while n:
        if n & 1:
            u = u @ base
        n >>= 1
        if n:
            base = base @ base
    return u


def _check_steps(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"number of steps must be a nonnegative integer, got {n!r}")
    return int(n)


def _tidy(states, w: np.ndarray, orientation: str) -> ProbVector:
    return ProbVector(states, w, orientation, tol=TOL.insertion)


def evolve_left(u0: ProbVector, P: StochasticMatrix, n: int) -> ProbVector:
    """Row-vector evolution u(n) = u(0) P^n.

    Raises
    ------
    OrientationError
        If ``u0`` is a column vector.
    AlignmentError
        If ``u0`` and ``P`` have different state sets.
    """
    _require(u0, ROW, "evolve_left")
    n = _check_steps(n)
    u = _times_power(u0.aligned(P.states), P.matrix, n)
    return _tidy(P.states, u, ROW)


def evolve_right(P: StochasticMatrix, v0: ProbVector, n: int) -> ProbVector:
    """Column-vector evolution v(n) = (P^T)^n v(0).

    ``P`` is the usual row-stochastic matrix; its transpose acts on the
    column from the left.  The result is the transpose of
    ``evolve_left(v0.T, P, n)``.
    """
    _require(v0, COLUMN, "evolve_right")
    n = _check_steps(n)
    # (P^T)^n v = ((v^T) P^n)^T, so the row kernel serves both sides
    v = _times_power(v0.aligned(P.states), P.matrix, n)
    return _tidy(P.states, v, COLUMN)


def matrix_power(P: StochasticMatrix, n: int) -> StochasticMatrix:
    """P^n by repeated squaring; rows are re-checked to be stochastic."""
    n = _check_steps(n)
    r = len(P)
    result = _times_power(np.eye(r), P.matrix, n)
    return StochasticMatrix(P.states, result, tol=TOL.insertion)


def chapman_kolmogorov_discrete(P: StochasticMatrix, m: int, n: int) -> float:
    """max |P^(m+n) - P^m P^n| over all entries."""
    m, n = _check_steps(m), _check_steps(n)
    lhs = matrix_power(P, m + n).matrix
    rhs = matrix_power(P, m).matrix @ matrix_power(P, n).matrix
    return float(np.max(np.abs(lhs - rhs)))


def power_iteration(P: StochasticMatrix, u0: ProbVector | None = None, tol: float = 1e-13,
                    max_iter: int = 100_000) -> ProbVector:
    """Iterate u <- u P until successive iterates differ by less than ``tol`` in L1.

    Raises
    ------
    ConvergenceError
        After ``max_iter`` steps; ``last`` holds the final iterate.
    """
    u = np.full(len(P), 1.0 / len(P)) if u0 is None else u0.aligned(P.states)
    p = P.matrix
    for _ in range(max_iter):
        nxt = u @ p
        nxt = nxt / math.fsum(nxt)
        if np.abs(nxt - u).sum() < tol:
            return _tidy(P.states, nxt, ROW)
        u = nxt
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps",
                           last=_tidy(P.states, u, ROW))


def stationary_multiplicity(P: StochasticMatrix, tol: float = 1e-10) -> int:
    """Dimension of the space of left fixed vectors of ``P``.

    This equals the number of closed communicating classes; the stationary
    distribution is unique exactly when it is 1.
    """
    a = P.matrix.T - np.eye(len(P))
    sv = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(sv <= tol * max(1, len(P))))


def stationary(P: StochasticMatrix, tol: float = 1e-13, max_iter: int = 100_000) -> ProbVector:
    """The stationary row vector pi with pi P = pi.

    Power iteration is tried first.  If it does not settle (a periodic
    chain), the linear system pi (P - I) = 0, sum(pi) = 1 is solved directly.

    Raises
    ------
    ConvergenceError
        If the stationary distribution is not unique, or the final residual
        ``max |pi P - pi|`` exceeds 1e-10.
    """
    k = stationary_multiplicity(P)
    if k > 1:
        last = None
        try:
            last = power_iteration(P, tol=tol, max_iter=1000)
        except ConvergenceError as exc:
            last = exc.last
        raise ConvergenceError(f"stationary distribution is not unique ({k} closed classes)", last=last)
    try:
        pi = power_iteration(P, tol=tol, max_iter=max_iter).weights
    except ConvergenceError:
        r = len(P)
        a = P.matrix.T - np.eye(r)
        a[-1, :] = 1.0
        b = np.zeros(r)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
        pi = np.clip(pi, 0.0, None)
        pi = pi / math.fsum(pi)
    residual = float(np.max(np.abs(pi @ P.matrix - pi)))
    if residual > TOL.insertion:
        raise ConvergenceError(f"stationary residual {residual:.3g} exceeds tolerance",
                               last=_tidy(P.states, pi, ROW))
    return _tidy(P.states, pi, ROW)

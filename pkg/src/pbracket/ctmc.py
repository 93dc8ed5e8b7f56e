"""Continuous-time homogeneous Markov chains and the master equation.

Orientation is fixed throughout: ``Q[i, j]`` (i != j) is the rate of jumps
from ``i`` to ``j``, rows of ``Q`` sum to zero, and ``P(t) = exp(Q t)`` is
row-stochastic.  A distribution held as a column vector therefore obeys
``dp/dt = Q^T p`` and evolves as ``p(t) = exp(Q^T t) p(0)``.

Gain-loss tables are usually written as ``W[n, n']``, the rate of gains of
``n`` from ``n'``.  :meth:`GainLossRates.from_gain` converts that layout with
``q[n', n] = W[n, n']``.

``exp(Q t)`` is computed by uniformization:

    P(t) = sum_k  e^{-L t} (L t)^k / k!  M^k,    M = I + Q / L,

with ``L = 1.05 max |q_ii|``.  Every term is nonnegative, so the result is a
stochastic matrix up to rounding.  Long horizons are split into ``2^j``
equal steps of ``L t <= 30`` and the step matrix is squared.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .config import TOL
from .dtmc import COLUMN, ProbVector, StochasticMatrix, _check_labels, _float_matrix, _require
from .errors import AlignmentError, DomainError, LabelError
from .observables import Observable

_TAIL = 1e-14
_CHUNK = 30.0


class Generator:
    """A CTMC rate matrix Q with labelled states.

    Off-diagonal entries must be nonnegative and every row must sum to zero
    within ``tol`` times the largest rate in that row.
    """

    __slots__ = ("_states", "_index", "_q")

    def __init__(self, states: Sequence, entries, tol: float | None = None):
        tol = TOL.algebraic if tol is None else tol
        states = _check_labels(states)
        q = _float_matrix(entries)
        if q.shape[0] != len(states):
            raise DomainError(f"{len(states)} states but a {q.shape[0]}x{q.shape[0]} matrix")
        if not np.all(np.isfinite(q)):
            raise DomainError("generator entries must be finite")
        off = q - np.diag(np.diag(q))
        if np.any(off < 0):
            i, j = np.argwhere(off < 0)[0]
            raise DomainError(f"negative rate q[{states[i]!r}, {states[j]!r}] = {q[i, j]}")
        sums = q.sum(axis=1)
        scale = np.maximum(1.0, np.abs(q).max(axis=1))
        bad = np.abs(sums) > tol * scale
        if np.any(bad):
            i = int(np.argmax(bad))
            raise DomainError(f"generator row {states[i]!r} sums to {sums[i]!r}, not 0")
        q.setflags(write=False)
        self._states = states
        self._index = {s: i for i, s in enumerate(states)}
        self._q = q

    @property
    def states(self) -> tuple:
        return self._states

    @property
    def matrix(self) -> np.ndarray:
        return self._q

    def __len__(self):
        return len(self._states)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except (KeyError, TypeError):
            raise LabelError(f"unknown state {label!r}") from None

    def __getitem__(self, key) -> float:
        i, j = key
        return float(self._q[self.index(i), self.index(j)])

    def __repr__(self):
        return f"Generator({len(self)} states)"


@dataclass(frozen=True)
class GainLossRates:
    """Jump rates between labelled states, ``rates[(i, j)]`` = rate of i -> j.

    Missing pairs are zero.  Self-rates must be zero.
    """

    states: tuple
    rates: Mapping

    def __post_init__(self):
        states = _check_labels(self.states)
        object.__setattr__(self, "states", states)
        known = set(states)
        clean = {}
        for (i, j), r in dict(self.rates).items():
            if i not in known or j not in known:
                raise LabelError(f"rate between unknown states {i!r} -> {j!r}")
            r = float(r)
            if not math.isfinite(r) or r < 0:
                raise DomainError(f"rate {i!r} -> {j!r} must be a finite nonnegative number, got {r}")
            if i == j and r != 0:
                raise DomainError(f"self-rate on {i!r} must be zero")
            if r:
                clean[(i, j)] = r
        object.__setattr__(self, "rates", clean)

    @classmethod
    def from_gain(cls, states: Sequence, gain) -> "GainLossRates":
        """Build from a gain matrix ``W[n][n']`` = rate into ``n`` from ``n'``."""
        states = tuple(states)
        w = _float_matrix(gain)
        if w.shape[0] != len(states):
            raise DomainError(f"{len(states)} states but a {w.shape[0]}x{w.shape[0]} gain matrix")
        return cls(states, {(states[src], states[dst]): w[dst, src]
                            for dst in range(len(states)) for src in range(len(states))
                            if src != dst or w[dst, src] != 0})

    def gain_matrix(self) -> np.ndarray:
        """``W[n, n']`` = rate into ``n`` from ``n'``."""
        pos = {s: i for i, s in enumerate(self.states)}
        w = np.zeros((len(self.states),) * 2)
        for (i, j), r in self.rates.items():
            w[pos[j], pos[i]] = r
        return w

    def exit_rates(self) -> np.ndarray:
        """v_n, the total rate of leaving each state."""
        return self.gain_matrix().sum(axis=0)


def generator_from_rates(g: GainLossRates) -> Generator:
    """Q with q_ij = rate i -> j off the diagonal and q_ii = -sum_j q_ij."""
    pos = {s: i for i, s in enumerate(g.states)}
    q = np.zeros((len(g.states),) * 2)
    for (i, j), r in g.rates.items():
        q[pos[i], pos[j]] = r
    np.fill_diagonal(q, -q.sum(axis=1))
    return Generator(g.states, q)


def _poisson_weights(x: float) -> np.ndarray:
    """e^{-x} x^k / k! for k = 0..K, stopping once the remaining tail is below 1e-14."""
    w = [math.exp(-x)]
    total = w[0]
    k = 0
    while 1.0 - total > _TAIL or k < x:
        k += 1
        w.append(w[-1] * x / k)
        total += w[-1]
        if k > 10 * x + 100:
            break
    return np.array(w)


def _check_time(t) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"time must be finite and nonnegative, got {t}")
    return t


def _uniformized(q: np.ndarray, t: float) -> np.ndarray:
    r = q.shape[0]
    rate = float(np.max(-np.diag(q))) if r else 0.0
    if rate == 0.0 or t == 0.0:
        return np.eye(r)
    lam = 1.05 * rate + np.finfo(float).tiny
    squarings = max(0, math.ceil(math.log2(lam * t / _CHUNK))) if lam * t > _CHUNK else 0
    step = t / 2 ** squarings
    m = np.eye(r) + q / lam
    weights = _poisson_weights(lam * step)
    term = np.eye(r)
    p = weights[0] * term
    for wk in weights[1:]:
        term = term @ m
        p = p + wk * term
    p = p / weights.sum()
    for _ in range(squarings):
        p = p @ p
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def transition_matrix(Q: Generator, t: float) -> StochasticMatrix:
    """P(t) = exp(Q t) by uniformization.

    Raises
    ------
    DomainError
        If ``t`` is negative.
    """
    t = _check_time(t)
    return StochasticMatrix(Q.states, _uniformized(Q.matrix, t))


@dataclass(frozen=True)
class KolmogorovResiduals:
    forward: float
    backward: float


def kolmogorov_residuals(Q: Generator, t: float) -> KolmogorovResiduals:
    """Residuals of P' = P Q (forward) and P' = Q P (backward).

    P' is a central difference with step ``h = 1e-4 max(1, t)``, shrunk to
    ``t / 2`` when ``t`` is smaller than that.
    """
    t = _check_time(t)
    if t == 0:
        raise DomainError("Kolmogorov residuals need t > 0")
    h = 1e-4 * max(1.0, t)
    if h >= t:
        h = t / 2
    q = Q.matrix
    p = _uniformized(q, t)
    dp = (_uniformized(q, t + h) - _uniformized(q, t - h)) / (2 * h)
    return KolmogorovResiduals(forward=float(np.max(np.abs(dp - p @ q))),
                               backward=float(np.max(np.abs(dp - q @ p))))


def _on_states(x, states: tuple) -> np.ndarray:
    if isinstance(x, Observable):
        x = x.values
    if isinstance(x, Mapping):
        try:
            return np.array([float(x[s]) for s in states])
        except KeyError as exc:
            raise AlignmentError(f"observable has no value for state {exc.args[0]!r}") from None
    arr = np.asarray(x, dtype=float)
    if arr.shape != (len(states),):
        raise AlignmentError(f"observable has {arr.size} values for {len(states)} states")
    return arr


def evolve_density(p0: ProbVector, Q: Generator, t: float) -> ProbVector:
    """Master-equation evolution p(t) = exp(Q^T t) p(0) of a column vector.

    Negative entries smaller than 1e-12 in magnitude are treated as rounding
    and clamped; larger ones raise :class:`DomainError`.
    """
    _require(p0, COLUMN, "evolve_density")
    t = _check_time(t)
    p = _uniformized(Q.matrix, t).T @ p0.aligned(Q.states)
    if np.any(p < -TOL.algebraic):
        raise DomainError(f"evolved density has negative entries: {p.min()}")
    return ProbVector(Q.states, np.clip(p, 0.0, None), COLUMN)


def doi_expectation(x, p: ProbVector) -> float:
    """<s| X |p>: the all-ones bra applied after the diagonal observable."""
    vals = _on_states(x, p.states)
    return math.fsum(vals * p.weights)


def _occupation(label) -> int:
    try:
        n = int(label)
    except (TypeError, ValueError):
        raise DomainError(f"state {label!r} is not an occupation number") from None
    if n < 0 or str(n) != str(label).strip():
        raise DomainError(f"state {label!r} is not a nonnegative integer")
    return n


def peliti_expectation(x, p: ProbVector) -> float:
    """Expectation through the standard bra under the factorial inner product.

    With <m|n> = n! delta_mn, the state |psi> = sum_n p_n |n> and the
    standard bra sum_m <m| / m!, each term is ``(1/n!) * X(n) p_n * n!``.
    The factorials are carried exactly as integers up to n = 20 and as
    log-gamma values above that, and the sum is accumulated exactly.
    """
    vals = _on_states(x, p.states)
    total = Fraction(0)
    for label, xv, pv in zip(p.states, vals, p.weights):
        n = _occupation(label)
        amplitude = Fraction(float(xv)) * Fraction(float(pv))
        if n <= 20:
            f = math.factorial(n)
            total += amplitude * f / f
        else:
            ln = math.lgamma(n + 1)
            total += amplitude * Fraction(math.exp(ln - ln))
    return float(total)


def heisenberg_operator(x, Q: Generator, t: float) -> np.ndarray:
    """X(t) = U^{-1} X U with U = exp(Q^T t) and U^{-1} = exp(-Q^T t).

    U^{-1} grows like exp(|Q| t), and rounding in it is amplified by its
    norm.  A :class:`RuntimeWarning` is issued when the expected error of
    the similarity transform exceeds 1e-10.
    """
    t = _check_time(t)
    xs = _on_states(x, Q.states)
    u = _uniformized(Q.matrix, t).T
    u_inv = scipy.linalg.expm(-Q.matrix.T * t)
    norm = float(np.abs(u_inv).sum(axis=0).max())
    expected = norm * max(1.0, float(np.abs(xs).max(initial=0.0))) * len(Q) * np.finfo(float).eps
    if expected > TOL.insertion:
        warnings.warn(f"Heisenberg operator is ill-conditioned (|U^-1| = {norm:.3g}); "
                      f"expect an error near {expected:.1g}", RuntimeWarning, stacklevel=2)
    return u_inv @ np.diag(xs) @ u


def heisenberg_expectation(x, Q: Generator, t: float, p0: ProbVector) -> float:
    """1^T X(t) p(0), the Heisenberg-picture expectation at time t."""
    _require(p0, COLUMN, "heisenberg_expectation")
    op = heisenberg_operator(x, Q, t)
    return math.fsum(op.sum(axis=0) * p0.aligned(Q.states))


def ctmc_stationary(Q: Generator) -> ProbVector:
    """Row vector pi with pi Q = 0 and sum(pi) = 1, by a direct solve."""
    r = len(Q)
    a = Q.matrix.T.copy()
    a[-1, :] = 1.0
    b = np.zeros(r)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        raise DomainError("generator has no unique stationary distribution") from None
    if np.any(pi < -TOL.insertion):
        raise DomainError("generator has no unique stationary distribution")
    return ProbVector(Q.states, np.clip(pi, 0.0, None), tol=TOL.insertion)


# ---------------------------------------------------------------- continuous states on a grid

def cell_widths(grid: np.ndarray) -> np.ndarray:
    """Cell width around each grid point; uniform grids get the constant spacing."""
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 2 or np.any(np.diff(x) <= 0):
        raise DomainError("grid must be a strictly increasing sequence of at least 2 points")
    mids = 0.5 * (x[1:] + x[:-1])
    edges = np.concatenate([[x[0] - (mids[0] - x[0])], mids, [x[-1] + (x[-1] - mids[-1])]])
    return np.diff(edges)


@dataclass(frozen=True)
class GridKernel:
    """Rate density ``w(x, x')`` of jumps into ``x`` from ``x'`` on a grid.

    ``w`` must be vectorized and nonnegative on grid x grid.
    """

    grid: np.ndarray
    w: Callable

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        cell_widths(grid)
        object.__setattr__(self, "grid", grid)

    @property
    def widths(self) -> np.ndarray:
        return cell_widths(self.grid)

    def gain(self) -> np.ndarray:
        """w(x_i | x_j) sampled on the grid, rows indexed by the destination."""
        xi, xj = np.meshgrid(self.grid, self.grid, indexing="ij")
        w = np.broadcast_to(np.asarray(self.w(xi, xj), dtype=float), xi.shape).copy()
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DomainError("grid kernel must be finite and nonnegative")
        np.fill_diagonal(w, 0.0)
        return w

    def operator(self) -> np.ndarray:
        """L(x_i, x_j) = w(x_i|x_j) dx_j - delta_ij v(x_i), acting on density samples."""
        w = self.gain()
        dx = self.widths
        v = (w * dx[:, None]).sum(axis=0)
        return w * dx[None, :] - np.diag(v)

    def generator(self) -> Generator:
        """The generator of cell masses m_i = p_i dx_i: rate j -> i is w(x_i|x_j) dx_i."""
        w = self.gain()
        dx = self.widths
        q = (w * dx[:, None]).T
        np.fill_diagonal(q, -q.sum(axis=1))
        return Generator(tuple(range(self.grid.size)), q)


def grid_master_evolve(kernel: GridKernel, p0, t: float) -> np.ndarray:
    """Evolve density samples p0 on the grid by the discretized master equation.

    The density is converted to cell masses, which evolve under a proper
    generator by uniformization, then converted back.  Total mass
    ``sum p dx`` is conserved.

    Raises
    ------
    DomainError
        If ``sum p0 dx`` differs from 1 by more than 1e-10.
    """
    t = _check_time(t)
    p0 = np.asarray(p0, dtype=float)
    dx = kernel.widths
    if p0.shape != dx.shape:
        raise AlignmentError(f"{p0.size} density samples for {dx.size} grid points")
    if np.any(p0 < 0):
        raise DomainError("density samples must be nonnegative")
    mass = p0 * dx
    total = math.fsum(mass)
    if abs(total - 1.0) > TOL.insertion:
        raise DomainError(f"initial density has mass {total!r}, not 1")
    q = kernel.generator().matrix
    m = _uniformized(q, t).T @ mass
    return m / dx

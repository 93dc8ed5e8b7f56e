"""Poisson, Wiener and Brownian processes: analytic laws and seeded sampling.

All three processes are homogeneous with independent increments, so a
path on a time grid is built by cumulatively summing independent
increments:

* Poisson:  N(t_k) - N(t_{k-1}) ~ Poisson(lambda * dt)
* Wiener:   W(t_k) - W(t_{k-1}) ~ Normal(0, sigma^2 dt)
* Brownian: X(t_k) - X(t_{k-1}) ~ Normal(mu dt, sigma^2 dt), X(0) = x0

Paths start at time 0.  Random numbers come from :mod:`pbracket.rng`,
one stream per path, so path ``i`` for a given seed is the same whether it
is drawn alone or inside a batch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .quadrature import Quadrature, integrate
from .rng import Streams

_CK_QUAD = Quadrature(abs_tol=1e-14, rel_tol=1e-12)


def _positive(name: str, v: float) -> float:
    v = float(v)
    if not (v > 0 and math.isfinite(v)):
        raise DomainError(f"{name} must be positive and finite, got {v}")
    return v


@dataclass(frozen=True)
class PoissonProcess:
    """Counting process with rate ``lam`` per unit time."""

    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive("lambda", self.lam))


@dataclass(frozen=True)
class WienerProcess:
    """W(t) ~ Normal(0, t sigma^2)."""

    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))


@dataclass(frozen=True)
class BrownianMotion:
    """X(t) = x0 + mu t + sigma W(t) with W a standard Wiener process."""

    x0: float = 0.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", _positive("sigma", self.sigma))


Process = PoissonProcess | WienerProcess | BrownianMotion


def _time(t, strict: bool = True) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0 or (strict and t == 0):
        raise DomainError(f"time must be {'positive' if strict else 'nonnegative'}, got {t}")
    return t


# ---------------------------------------------------------------- Poisson law

def poisson_pmf(p: PoissonProcess, k: int, t: float) -> float:
    """P(N(t) = k) = (lam t)^k e^{-lam t} / k!."""
    t = _time(t)
    if isinstance(k, bool) or int(k) != k or k < 0:
        raise DomainError(f"count must be a nonnegative integer, got {k!r}")
    k = int(k)
    x = p.lam * t
    return math.exp(k * math.log(x) - x - math.lgamma(k + 1))


def poisson_transition(p: PoissonProcess, i: int, j: int, t: float) -> float:
    """p_ij over an elapsed time t: the pmf of j - i, or 0 when j < i."""
    for name, v in (("i", i), ("j", j)):
        if isinstance(v, bool) or int(v) != v or v < 0:
            raise DomainError(f"state {name} must be a nonnegative integer, got {v!r}")
    if j < i:
        _time(t)
        return 0.0
    return poisson_pmf(p, int(j) - int(i), t)


def poisson_tail_cutoff(p: PoissonProcess, t: float, tail: float = 1e-16) -> int:
    """Smallest K with P(N(t) > K) below ``tail`` (and K >= the mean)."""
    x = p.lam * _time(t)
    term = math.exp(-x)
    cdf = term
    k = 0
    while 1.0 - cdf > tail or k < x:
        k += 1
        term *= x / k
        cdf += term
        if term == 0.0 and k > x:
            break
    return k


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def poisson_moments(p: PoissonProcess, t: float) -> Moments:
    """Mean and variance of N(t) by summing k pmf(k) and (k - mean)^2 pmf(k)."""
    kmax = poisson_tail_cutoff(p, t)
    k = np.arange(kmax + 1)
    pmf = np.array([poisson_pmf(p, int(j), t) for j in k])
    mean = math.fsum(k * pmf)
    return Moments(mean, math.fsum((k - mean) ** 2 * pmf))


# ---------------------------------------------------------------- Gaussian laws

def _normal_pdf(x, mean, var):
    x = np.asarray(x, dtype=float)
    return np.exp(-(x - mean) ** 2 / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def wiener_density(w: WienerProcess, x, t: float):
    """Density of W(t) at x: Normal(0, t sigma^2)."""
    t = _time(t)
    out = _normal_pdf(x, 0.0, t * w.sigma ** 2)
    return float(out) if out.ndim == 0 else out


def brownian_density(b: BrownianMotion, y, t: float):
    """Density of the displacement X(t) - x0 at y: Normal(mu t, t sigma^2)."""
    t = _time(t)
    out = _normal_pdf(y, b.mu * t, t * b.sigma ** 2)
    return float(out) if out.ndim == 0 else out


def wiener_transition(w: WienerProcess, x, t: float, y, s: float):
    """P(x, t | y, s): density of W(t) = x given W(s) = y."""
    if not s < t:
        raise DomainError(f"need s < t, got s={s}, t={t}")
    return _normal_pdf(np.asarray(x, dtype=float) - y, 0.0, (t - s) * w.sigma ** 2)


def ck_check_continuous(w: WienerProcess, s: float, tau: float, t: float,
                        points: int = 7, quad: Quadrature = _CK_QUAD) -> float:
    """Largest deviation from the continuous Chapman-Kolmogorov identity.

    For (x, y) on a ``points x points`` grid spanning three standard
    deviations of the t - s transition, compares P(x, t | y, s) with
    the integral over z of P(x, t | z, tau) P(z, tau | y, s).

    Raises
    ------
    DomainError
        Unless s < tau < t.
    """
    if not s < tau < t:
        raise DomainError(f"need s < tau < t, got {s}, {tau}, {t}")
    spread = 3.0 * w.sigma * math.sqrt(t - s)
    grid = np.linspace(-spread, spread, points)
    # break points at multiples of each kernel's width keep a narrow peak
    # from slipping between quadrature nodes
    offsets = np.array([-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0])
    sd_near = w.sigma * math.sqrt(tau - s)
    sd_far = w.sigma * math.sqrt(t - tau)
    worst = 0.0
    for y in grid:
        for x in grid:
            direct = float(wiener_transition(w, x, t, y, s))
            brk = np.concatenate([y + sd_near * offsets, x + sd_far * offsets]).tolist()
            conv, _ = integrate(lambda z: wiener_transition(w, x, t, z, tau) * wiener_transition(w, z, tau, y, s),
                                -math.inf, math.inf, quad, points=brk)
            worst = max(worst, abs(direct - conv))
    return worst


# ---------------------------------------------------------------- sampling

@dataclass(frozen=True)
class SamplePath:
    """Values of one realisation at increasing times."""

    times: tuple
    values: tuple
    seed: int

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise DomainError("times and values differ in length")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError("times must be strictly increasing")

    def to_csv(self, digits: int = 13) -> str:
        rows = [f"#seed={self.seed}", "t,value"]
        rows += [f"{t:.{digits}g},{v:.{digits}g}" for t, v in zip(self.times, self.values)]
        return "\n".join(rows) + "\n"


def _check_times(times: Sequence[float]) -> np.ndarray:
    arr = np.asarray(times, dtype=float).reshape(-1)
    if arr.size == 0:
        return arr
    if not np.all(np.isfinite(arr)) or arr[0] < 0:
        raise DomainError("times must be finite and start at or after 0")
    if np.any(np.diff(arr) <= 0):
        raise DomainError("times must be strictly increasing")
    return arr


def sample_paths(proc: Process, times: Sequence[float], seed: int, n_paths: int,
                 first_path: int = 0) -> np.ndarray:
    """Simulate ``n_paths`` independent paths; returns shape (n_paths, len(times)).

    Path ``first_path + i`` uses its own stream, so results do not depend
    on batching.
    """
    times = _check_times(times)
    if isinstance(n_paths, bool) or int(n_paths) != n_paths or n_paths < 1:
        raise DomainError(f"n_paths must be a positive integer, got {n_paths!r}")
    n_paths = int(n_paths)
    streams = Streams(seed, n_paths, first_path)
    dts = np.diff(np.concatenate([[0.0], times]))
    out = np.empty((n_paths, times.size))
    if isinstance(proc, PoissonProcess):
        level = np.zeros(n_paths, dtype=np.int64)
        for j, dt in enumerate(dts):
            level = level + streams.poisson(proc.lam * dt)
            out[:, j] = level
        return out
    if isinstance(proc, WienerProcess):
        x0, mu, sigma = 0.0, 0.0, proc.sigma
    elif isinstance(proc, BrownianMotion):
        x0, mu, sigma = proc.x0, proc.mu, proc.sigma
    else:
        raise DomainError(f"cannot sample {type(proc).__name__}")
    level = np.full(n_paths, x0)
    for j, dt in enumerate(dts):
        level = level + mu * dt + sigma * math.sqrt(dt) * streams.normal()
        out[:, j] = level
    return out


def sample_path(proc: Process, times: Sequence[float], seed: int) -> SamplePath:
    """A single realisation (path 0 of the seed's streams)."""
    times = _check_times(times)
    if times.size == 0:
        return SamplePath((), (), int(seed))
    values = sample_paths(proc, times, seed, 1)[0]
    return SamplePath(tuple(times.tolist()), tuple(values.tolist()), int(seed))


def empirical_moments(proc: Process, t: float, n_paths: int, seed: int) -> Moments:
    """Sample mean and unbiased sample variance of the value at time t."""
    t = _time(t)
    if n_paths < 100:
        raise DomainError(f"need at least 100 paths, got {n_paths}")
    x = sample_paths(proc, [t], seed, n_paths)[:, 0]
    return Moments(float(np.mean(x)), float(np.var(x, ddof=1)))


def analytic_moments(proc: Process, t: float) -> Moments:
    """Exact mean and variance of the value at time t."""
    t = _time(t, strict=False)
    if isinstance(proc, PoissonProcess):
        return Moments(proc.lam * t, proc.lam * t)
    if isinstance(proc, WienerProcess):
        return Moments(0.0, t * proc.sigma ** 2)
    return Moments(proc.x0 + proc.mu * t, t * proc.sigma ** 2)

"""Counter-based SplitMix64 streams.

Each sample path owns an independent stream keyed by

    key = mix64(mix64(seed) XOR path_index)

Scrambling the seed before the XOR matters: with a raw seed, small seeds
XOR a run of path indices onto nearly the same set of keys, so two seeds
would give the same streams in a different order.  Its k-th draw (k = 0, 1, ...) is

    z = mix64(key + (k + 1) * 0x9E3779B97F4A7C15)   (mod 2^64)
    u = (z >> 11) * 2^-53                             in [0, 1)

where ``mix64`` is the SplitMix64 finalizer.  Draws are pure functions of
``(seed, path, k)``, so paths can be generated in any order or in parallel
and fixed-seed results are portable.

Normal variates use the cosine branch of Box-Muller on two consecutive
draws: ``sqrt(-2 ln(1 - u1)) cos(2 pi u2)``.  Poisson variates use inversion
for means up to 10 and Hormann's PTRS transformed rejection above.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

_MASK = (1 << 64) - 1
GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SCALE = 2.0 ** -53


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on an array of uint64 (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def path_keys(seed: int, n_paths: int, first_path: int = 0) -> np.ndarray:
    """Stream keys for paths ``first_path .. first_path + n_paths - 1``."""
    idx = np.arange(first_path, first_path + n_paths, dtype=np.uint64)
    return mix64(mix64(np.uint64(int(seed) & _MASK)) ^ idx)


class Streams:
    """One SplitMix64 stream per path, each with its own draw counter."""

    def __init__(self, seed: int, n_paths: int, first_path: int = 0):
        self.keys = path_keys(seed, n_paths, first_path)
        self.counters = np.zeros(n_paths, dtype=np.uint64)

    def uniform(self, active: np.ndarray | None = None) -> np.ndarray:
        """One draw in [0, 1) per path (or per active path); advances those counters."""
        sel = slice(None) if active is None else active
        keys = self.keys[sel]
        counters = self.counters[sel]
        z = mix64(keys + (counters + np.uint64(1)) * GOLDEN)
        self.counters[sel] = counters + np.uint64(1)
        return (z >> np.uint64(11)).astype(np.float64) * _SCALE

    def normal(self) -> np.ndarray:
        """One standard normal per path by Box-Muller."""
        u1 = self.uniform()
        u2 = self.uniform()
        return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)

    def poisson(self, mean: float) -> np.ndarray:
        """One Poisson(mean) count per path."""
        if mean < 0 or not math.isfinite(mean):
            raise ValueError(f"Poisson mean must be finite and nonnegative, got {mean}")
        n = self.keys.size
        if mean == 0:
            return np.zeros(n, dtype=np.int64)
        if mean <= 10:
            return self._poisson_inversion(mean)
        return self._poisson_ptrs(mean)

    def _poisson_inversion(self, mean: float) -> np.ndarray:
        u = self.uniform()
        k = np.zeros(u.size, dtype=np.int64)
        p = math.exp(-mean)
        cdf = p
        j = 0
        active = u > cdf
        while active.any():
            j += 1
            p *= mean / j
            cdf += p
            k[active] = j
            active &= u > cdf
            if p == 0.0 and cdf >= 1.0 - 1e-16:
                break
        return k

    def _poisson_ptrs(self, mean: float) -> np.ndarray:
        n = self.keys.size
        out = np.zeros(n, dtype=np.int64)
        pending = np.ones(n, dtype=bool)
        smu = math.sqrt(mean)
        b = 0.931 + 2.53 * smu
        a = -0.059 + 0.02483 * b
        inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        log_mean = math.log(mean)
        while pending.any():
            idx = np.nonzero(pending)[0]
            u = self.uniform(idx) - 0.5
            v = self.uniform(idx)
            us = 0.5 - np.abs(u)
            k = np.floor((2.0 * a / us + b) * u + mean + 0.43)
            quick = (us >= 0.07) & (v <= vr)
            reject = (k < 0) | ((us < 0.013) & (v > us))
            with np.errstate(divide="ignore", invalid="ignore"):
                lhs = np.log(v * inv_alpha / (a / (us * us) + b))
                rhs = -mean + k * log_mean - gammaln(k + 1.0)
            accept = quick | (~reject & (lhs <= rhs))
            out[idx[accept]] = k[accept].astype(np.int64)
            pending[idx[accept]] = False
        return out

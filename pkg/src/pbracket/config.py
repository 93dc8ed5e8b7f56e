"""Shared numerical tolerances.

Every module and the command line read their defaults from a single
:class:`Tolerances` record.  The environment variables
``PBRACKET_TOL_ALGEBRAIC`` and ``PBRACKET_TOL_INSERTION`` override the two
defaults when set.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

ALGEBRAIC = 1e-12
INSERTION = 1e-10


@dataclass(frozen=True)
class Tolerances:
    algebraic: float = ALGEBRAIC   # single sums, normalization, Bayes agreement
    insertion: float = INSERTION   # summed identity insertions, matrix products

    @classmethod
    def from_env(cls) -> "Tolerances":
        return cls(
            algebraic=float(os.environ.get("PBRACKET_TOL_ALGEBRAIC", ALGEBRAIC)),
            insertion=float(os.environ.get("PBRACKET_TOL_INSERTION", INSERTION)),
        )


TOL = Tolerances.from_env()

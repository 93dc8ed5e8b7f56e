"""Acceptance criteria 1-11, each at its stated tolerance.

Run under pytest (one test per criterion, with a PASS/FAIL summary at the
end of the session) or directly::

    python -m tests.test_acceptance
"""
import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from pbracket import (COLUMN, ROW, BrownianMotion, DiscreteSpace, Generator, GridKernel, Observable,
                      PoissonProcess, ProbVector, Region, StochasticMatrix, WienerProcess, ck_check_continuous,
                      conditional_density, conditional_probability, cexpectation, doi_expectation,
                      empirical_moments, evolve_density, evolve_left, expectation, exponential,
                      grid_master_evolve, heisenberg_expectation, ideal_gas_stats, kolmogorov_residuals,
                      matrix_power, peliti_expectation, poisson_moments, poisson_pmf, product_space,
                      region_probability, transition_matrix, uniform_disc, variance)
from pbracket.dsl import evaluate, load_model, parse, to_text
from pbracket.invariants import verify_model

from .conftest import MODELS
from .test_evaluator import CASES
from .test_parser import CORPUS

# criterion number -> (passed, title, detail)
RESULTS = {}

TITLES = {
    1: "Land of Oz three-step evolution",
    2: "die and two-dice statistics",
    3: "darts on the unit disc",
    4: "exponential survival and memorylessness",
    5: "ideal gas mean energy",
    6: "two-state CTMC closed form and Kolmogorov equations",
    7: "Poisson process against the pure-birth chain",
    8: "Heisenberg and Schroedinger pictures",
    9: "conservation of probability",
    10: "Wiener Chapman-Kolmogorov and Monte Carlo bands",
    11: "DSL models, agreement with the API, round trip",
}


class _Checks:
    """Collects named sub-checks; the criterion passes when all of them do."""

    def __init__(self):
        self.items = []

    def within(self, label, error, tol):
        self.items.append((label, bool(error <= tol), f"{label} {error:.2e} <= {tol:g}"))

    def true(self, label, ok, detail=""):
        self.items.append((label, bool(ok), f"{label} {detail}".strip()))

    def outcome(self):
        bad = [d for _, ok, d in self.items if not ok]
        if bad:
            return False, "failed: " + "; ".join(bad)
        return True, "; ".join(d for _, _, d in self.items)


def _best_of(fn, repeats=7):
    """Fastest wall time of ``fn`` over a few calls, and its last result."""
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


# ---------------------------------------------------------------- criteria

OZ_STATES = ("R", "N", "S")
OZ_MATRIX = [[0.5, 0.25, 0.25], [0.5, 0.0, 0.5], [0.25, 0.25, 0.5]]
# reference values to three decimals; an exact entry may sit exactly 5e-4 away (3/16 rounds to .188)
OZ_P3_3DP = [[".406", ".203", ".391"], [".406", ".188", ".406"], [".391", ".203", ".406"]]
OZ_U3_3DP = [".401", ".198", ".401"]


def _decimal_gap(values, decimals):
    """Largest gap between floats and decimal strings, computed exactly."""
    return float(max(abs(Fraction(float(v)) - Fraction(s))
                     for v, s in zip(np.ravel(values), np.ravel(decimals))))


def criterion_1():
    c = _Checks()
    p = StochasticMatrix(OZ_STATES, OZ_MATRIX)
    u0 = ProbVector(OZ_STATES, [1 / 3, 1 / 3, 1 / 3], ROW)

    def run():
        return matrix_power(p, 3), evolve_left(u0, p, 3)
    elapsed, (p3, u3) = _best_of(run)
    c.within("P^3 vs 3-decimal reference", _decimal_gap(p3.matrix, OZ_P3_3DP), 5e-4)
    c.within("u(3) vs 3-decimal reference", _decimal_gap(u3.weights, OZ_U3_3DP), 5e-4)
    c.true("runtime", elapsed < 1e-3, f"{elapsed * 1e3:.3f} ms < 1 ms")
    return c.outcome()


def criterion_2():
    c = _Checks()
    faces = ["1", "2", "3", "4", "5", "6"]
    die = DiscreteSpace(faces, ["1/6"] * 6)
    x = Observable({f: float(f) for f in faces})
    c.within("E[X] - 7/2", abs(expectation(die, x) - 3.5), 1e-12)
    c.within("Var[X] - 35/12", abs(variance(die, x) - 35 / 12), 1e-12)
    dice = product_space([die, die])
    c.within("E[XY] - 49/4", abs(expectation(dice.joint, dice.coordinate(0) * dice.coordinate(1)) - 12.25), 1e-12)
    return c.outcome()


def criterion_3():
    c = _Checks()
    t0 = time.perf_counter()
    board = uniform_disc(1.0)
    upper = Region.halfplane((0.0, 1.0), 0.0)
    inner = Region.disc(0.5)
    c.within("P(upper) - 1/2", abs(region_probability(board, upper) - 0.5), 1e-6)
    c.within("P(F|E) - 1/4", abs(conditional_probability(board, inner, upper) - 0.25), 1e-6)
    c.within("f(x|E) - 2/pi", abs(conditional_density(board, upper, (0.1, 0.3)) - 2 / math.pi), 1e-6)
    c.within("E[X]", abs(cexpectation(board, lambda x, y: x)), 1e-8)
    elapsed = time.perf_counter() - t0
    c.true("runtime", elapsed < 1.0, f"{elapsed:.3f} s < 1 s")
    return c.outcome()


def criterion_4():
    c = _Checks()
    lam = 0.5
    d = exponential(lam)
    survival = max(abs(region_probability(d, Region.interval(t, math.inf)) - math.exp(-lam * t))
                   for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0))
    c.within("survival", survival, 1e-10)
    grid = (0.25, 0.5, 1.0, 2.0, 4.0)
    memory = max(abs(conditional_probability(d, Region.interval(r + s, math.inf), Region.interval(r, math.inf))
                     - math.exp(-lam * s)) for r in grid for s in grid)
    c.within("memorylessness 5x5", memory, 1e-10)
    c.within("mean - 1/lambda", abs(cexpectation(d, lambda t: t) - 1 / lam), 1e-8)
    return c.outcome()


def criterion_5():
    c = _Checks()
    worst_energy = worst_z = 0.0
    for beta, m, v, h in [(1.0, 1.0, 1.0, 1.0), (2.0, 1.3, 4.0, 0.7), (0.1, 5.0, 0.2, 3.0)]:
        s = ideal_gas_stats(beta, m, v, h, N=10)
        worst_energy = max(worst_energy, abs(beta * s.mean_energy_quadrature - 1.5))
        worst_z = max(worst_z, abs(s.z_quadrature - s.z) / s.z)
    c.within("beta<e> - 3/2", worst_energy, 1e-6)
    c.within("z relative", worst_z, 1e-6)
    return c.outcome()


def criterion_6():
    c = _Checks()
    a, b = 1.0, 2.0
    q = Generator(("0", "1"), [[-a, a], [b, -b]])
    times = np.round(np.arange(1, 101) * 0.1, 10)
    closed = max(abs(transition_matrix(q, t).matrix[0, 1] - a / (a + b) * (1 - math.exp(-(a + b) * t)))
                 for t in times)
    c.within("p01(t) closed form", closed, 1e-10)
    kol = max(max(r.forward, r.backward) for r in (kolmogorov_residuals(q, t) for t in (0.1, 0.5, 1, 2, 5, 10)))
    c.within("Kolmogorov", kol, 1e-6)
    semi = max(float(np.max(np.abs(transition_matrix(q, s).matrix @ transition_matrix(q, t).matrix
                                   - transition_matrix(q, s + t).matrix)))
               for s, t in [(0.1, 0.2), (0.5, 1.5), (1.0, 3.0), (4.0, 6.0)])
    c.within("semigroup", semi, 1e-10)
    return c.outcome()


def criterion_7():
    c = _Checks()
    lam, size = 2.0, 60
    states = [str(i) for i in range(size + 1)]
    q = Generator(states, np.diag([-lam] * size + [0.0]) + np.diag([lam] * size, 1))
    p = PoissonProcess(lam)
    worst_row = 0.0
    for t in (0.5, 1.0, 3.0, 5.0):
        row = transition_matrix(q, t).matrix[0]
        worst_row = max(worst_row, max(abs(row[k] - poisson_pmf(p, k, t)) for k in range(size)))
    c.within("pure-birth row vs pmf", worst_row, 1e-8)
    worst_moment = 0.0
    for lam_, t in [(2.0, 3.0), (0.5, 1.0), (10.0, 2.5)]:
        m = poisson_moments(PoissonProcess(lam_), t)
        worst_moment = max(worst_moment, abs(m.mean - lam_ * t), abs(m.variance - lam_ * t))
    c.within("mean and variance - lambda t", worst_moment, 1e-10)
    return c.outcome()


def _random_generator(rng, r, scale):
    q = rng.random((r, r)) * scale
    q[rng.random((r, r)) < 0.3] = 0.0
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return Generator([str(i) for i in range(r)], q)


def criterion_8():
    c = _Checks()
    t0 = time.perf_counter()
    rng = np.random.default_rng(500)
    worst_pic = worst_dp = 0.0
    for _ in range(500):
        r = int(rng.integers(2, 8))
        q = _random_generator(rng, r, float(rng.uniform(0.1, 3)))
        # U^-1 = exp(-Q^T t) amplifies rounding by up to exp(|Q^T t|_1); keep that below e^5
        norm = max(np.abs(q.matrix).sum(axis=0).max(), 1e-3)
        t = float(rng.uniform(0, 5 / norm))
        x = rng.uniform(-5, 5, r)
        p0 = ProbVector(q.states, rng.dirichlet(np.ones(r)), COLUMN)
        pt = evolve_density(p0, q, t)
        schr = doi_expectation(x, pt)
        worst_pic = max(worst_pic, abs(schr - heisenberg_expectation(x, q, t, p0)))
        worst_dp = max(worst_dp, abs(peliti_expectation(x, pt) - schr))
    elapsed = time.perf_counter() - t0
    c.within("pictures, 500 cases", worst_pic, 1e-10)
    c.within("Doi vs Peliti", worst_dp, 1e-10)
    c.true("runtime", elapsed < 10.0, f"{elapsed:.2f} s < 10 s")
    return c.outcome()


def criterion_9():
    c = _Checks()
    rng = np.random.default_rng(9)
    worst_ones = worst_simplex = 0.0
    for _ in range(200):
        r = int(rng.integers(2, 12))
        q = _random_generator(rng, r, float(rng.uniform(0.1, 5)))
        t = float(rng.uniform(0, 10))
        u = transition_matrix(q, t).matrix.T
        worst_ones = max(worst_ones, float(np.max(np.abs(np.ones(r) @ u - 1.0))))
        w = evolve_density(ProbVector(q.states, rng.dirichlet(np.ones(r)), COLUMN), q, t).weights
        worst_simplex = max(worst_simplex, abs(math.fsum(w) - 1.0), float(max(0.0, -w.min())))
    c.within("1^T exp(Q^T t) - 1^T", worst_ones, 1e-12)
    c.within("evolve_density off the simplex", worst_simplex, 1e-12)
    grid = np.sort(rng.uniform(0, 3, 40))
    kernel = GridKernel(grid, lambda x, y: np.exp(-(x - y) ** 2) * (1 + np.sin(x) ** 2))
    p0 = np.exp(-grid)
    p0 = p0 / (p0 * kernel.widths).sum()
    mass = max(abs((grid_master_evolve(kernel, p0, t) * kernel.widths).sum() - 1.0) for t in (0.1, 1.0, 10.0))
    c.within("grid master equation mass", mass, 1e-10)
    return c.outcome()


def criterion_10():
    c = _Checks()
    t0 = time.perf_counter()
    c.within("Wiener CK residual", ck_check_continuous(WienerProcess(1.0), 0.0, 0.5, 1.0), 1e-8)
    n = 100_000
    m = empirical_moments(PoissonProcess(3.0), 2.0, n, 42)
    c.true("Poisson mean", abs(m.mean - 6.0) <= 4 * math.sqrt(6.0 / n),
           f"|{m.mean:.5f} - 6| <= {4 * math.sqrt(6.0 / n):.4f}")
    m = empirical_moments(WienerProcess(1.0), 4.0, n, 42)
    c.true("Wiener mean", abs(m.mean) <= 4 * math.sqrt(4.0 / n), f"|{m.mean:.5f}| <= {4 * math.sqrt(4.0 / n):.4f}")
    m = empirical_moments(BrownianMotion(0.0, 1.5, 1.0), 2.0, n, 42)
    c.true("Brownian mean", abs(m.mean - 3.0) <= 4 * math.sqrt(2.0 / n),
           f"|{m.mean:.5f} - 3| <= {4 * math.sqrt(2.0 / n):.4f}")
    elapsed = time.perf_counter() - t0
    c.true("runtime", elapsed < 30.0, f"{elapsed:.2f} s < 30 s")
    return c.outcome()


SEVEN = ("die", "twodice", "darts", "exponential", "oz", "twostate-ctmc", "purebirth")


def criterion_11():
    c = _Checks()
    failing = []
    for name in SEVEN:
        if any(not r.passed for r in verify_model(load_model(MODELS / f"{name}.model"))):
            failing.append(name)
    c.true("seven models verify", not failing, f"{len(SEVEN) - len(failing)}/{len(SEVEN)}")
    models = {}
    worst = 0.0
    for model, expr, bindings, direct in CASES:
        if model not in models:
            models[model] = load_model(MODELS / f"{model}.model")
        worst = max(worst, abs(evaluate(expr, models[model], bindings) - direct()))
    c.within(f"DSL vs API over {len(CASES)} queries", worst, 1e-12)
    broken = [s for s in CORPUS if parse(to_text(parse(s))) != parse(s)]
    c.true("round trip", not broken, f"{len(CORPUS) - len(broken)}/{len(CORPUS)} expressions")
    return c.outcome()


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 12)}


def run_criterion(n):
    try:
        passed, detail = CRITERIA[n]()
    except Exception as exc:  # an exception is a failed criterion, not a crashed run
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    RESULTS[n] = (passed, TITLES[n], detail)
    return passed, detail


def report_line(n):
    passed, title, detail = RESULTS[n]
    return f"{'PASS' if passed else 'FAIL'}  criterion {n:2d}: {title}  [{detail}]"


def report_lines():
    return [report_line(n) for n in sorted(RESULTS)]


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    passed, detail = run_criterion(n)
    print(report_line(n))
    assert passed, detail


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        run_criterion(n)
        print(report_line(n), flush=True)
    sys.exit(0 if all(r[0] for r in RESULTS.values()) else 1)

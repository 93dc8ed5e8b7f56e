"""Invariant checks run by ``pbracket verify``.

Each check returns a :class:`CheckResult`; an exception raised inside a
check counts as a failure and its message becomes the detail.  The suite
for a model covers every declaration it contains:

* finite spaces: normalization, complement, additivity, orthonormal base
  events, identity insertion, Bayes, total probability and expectation;
* product spaces: marginals and factorization of coordinate events;
* chains: simplex preservation, left/right duality, Chapman-Kolmogorov,
  probability conservation, stationary residual;
* generators: conservation, semigroup, Kolmogorov equations, picture
  equivalence, Doi/Peliti agreement;
* densities: normalization, complements, conditional normalization;
* processes: moment laws, CTMC agreement, continuous Chapman-Kolmogorov.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import continuous as cont
from .config import TOL
from .ctmc import (GainLossRates, Generator, doi_expectation, evolve_density, generator_from_rates,
                   heisenberg_expectation, kolmogorov_residuals, peliti_expectation, transition_matrix)
from .dtmc import (COLUMN, ProbVector, StochasticMatrix, chapman_kolmogorov_discrete, evolve_left,
                   evolve_right, stationary, stationary_multiplicity)
from .errors import DomainError
from .observables import (ProductSpace, expectation, expectation_fn, marginal, moment_product,
                          partition_expectation, variance)
from .processes import (BrownianMotion, PoissonProcess, WienerProcess, brownian_density,
                        ck_check_continuous, poisson_moments, poisson_tail_cutoff,
                        poisson_transition, sample_path, wiener_density)
from .quadrature import Quadrature, integrate
from .sample import (DiscreteSpace, EventSet, Partition, bayes, bracket, identity_insertion,
                     probability, singleton_partition, total_probability)

QUAD_TOL = 1e-8


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def _run(name: str, fn: Callable[[], tuple[bool, str] | float], limit: float | None = None) -> CheckResult:
    """Run a check; a float result is compared against ``limit``."""
    try:
        out = fn()
    except Exception as exc:  # a crashing check is a failed check
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    if limit is not None:
        return CheckResult(name, bool(out <= limit), f"residual {out:.3g}, limit {limit:.0e}")
    ok, detail = out
    return CheckResult(name, bool(ok), detail)


# ---------------------------------------------------------------- finite spaces

def check_space(name: str, space: DiscreteSpace, events: dict, observables: dict) -> list[CheckResult]:
    out = []
    tag = f"space {name}"
    evs = list(events.items())
    out.append(_run(f"{tag}: masses sum to 1", lambda: abs(math.fsum(space.masses) - 1.0), TOL.algebraic))

    def complement():
        worst = 0.0
        for _, e in evs:
            worst = max(worst, abs(probability(space, space.complement(e)) - (1 - probability(space, e))))
        return worst
    out.append(_run(f"{tag}: complement rule", complement, TOL.algebraic))

    def additivity():
        worst = 0.0
        for _, e in evs + [("Omega", space.omega)]:
            parts = math.fsum(probability(space, EventSet((o,))) for o in e)
            worst = max(worst, abs(probability(space, e) - parts))
        return worst
    out.append(_run(f"{tag}: additivity over base events", additivity, TOL.algebraic))

    if len(space) <= 200:
        def orthonormal():
            pos = [o for o, m in zip(space.outcomes, space.masses) if m > 0]
            worst = 0.0
            for a in pos:
                for b in pos:
                    worst = max(worst, abs(bracket(space, EventSet((a,)), EventSet((b,))) - (a == b)))
            return worst
        out.append(_run(f"{tag}: base events orthonormal", orthonormal, TOL.algebraic))

    positive = [(n, e) for n, e in evs if probability(space, e) > 0] + [("Omega", space.omega)]

    def sure_event():
        return max(abs(bracket(space, space.omega, e) - 1.0) for _, e in positive)
    out.append(_run(f"{tag}: P(Omega|E) = 1", sure_event, TOL.algebraic))

    basis = singleton_partition(space)

    def insertion():
        worst = 0.0
        for (_, a), (_, b) in itertools.product(positive, positive):
            direct = bracket(space, a, b)
            worst = max(worst, abs(identity_insertion(space, a, b, basis) - direct))
            # a coarse partition is exact when A is a union of its blocks
            part = Partition((a, space.complement(a)))
            worst = max(worst, abs(identity_insertion(space, a, b, part) - direct))
        return worst
    out.append(_run(f"{tag}: identity insertion", insertion, TOL.insertion))

    def bayes_rule():
        worst = 0.0
        for (_, a), (_, b) in itertools.product(positive, positive):
            worst = max(worst, abs(bayes(space, a, b) - bracket(space, a, b)))
        return worst
    out.append(_run(f"{tag}: Bayes agrees with the bracket", bayes_rule, TOL.algebraic))

    def total():
        worst = 0.0
        for (_, a), (_, h) in itertools.product(evs + [("Omega", space.omega)], evs):
            part = Partition((h, space.complement(h)))
            worst = max(worst, abs(total_probability(space, a, part) - probability(space, a)))
        return worst
    if evs:
        out.append(_run(f"{tag}: total probability", total, TOL.algebraic))

    for oname, x in observables.items():
        def law(x=x):
            worst = 0.0
            parts = [basis] + [Partition((h, space.complement(h))) for _, h in evs]
            for part in parts:
                worst = max(worst, abs(partition_expectation(space, x, part) - expectation(space, x)))
            return worst
        out.append(_run(f"{tag}: law of total expectation for {oname}", law, TOL.algebraic * 100))

        def var_forms(x=x):
            v = variance(space, x)
            alt = expectation_fn(space, lambda t: t * t, x) - expectation(space, x) ** 2
            scale = max(1.0, expectation_fn(space, lambda t: t * t, x))
            ok = v >= 0 and abs(v - alt) <= TOL.insertion * scale
            return ok, f"two-pass {v:.12g}, moment form {alt:.12g}"
        out.append(_run(f"{tag}: variance of {oname} nonnegative and consistent", var_forms))
    return out


def check_product(name: str, ps: ProductSpace) -> list[CheckResult]:
    tag = f"product {name}"
    out = []

    def marginals():
        worst = 0.0
        for i, f in enumerate(ps.factors):
            m = marginal(ps, i)
            worst = max(worst, float(np.max(np.abs(m.masses - f.masses))))
        return worst
    out.append(_run(f"{tag}: marginals recover the factors", marginals, TOL.algebraic))

    def factorization():
        worst = 0.0
        joint = ps.joint
        for i, j in itertools.combinations(range(len(ps.factors)), 2):
            for a in ps.factors[i].outcomes[:12]:
                for b in ps.factors[j].outcomes[:12]:
                    both = ps.coordinate_event(i, [a]) & ps.coordinate_event(j, [b])
                    lhs = probability(joint, both)
                    rhs = ps.factors[i].mass(a) * ps.factors[j].mass(b)
                    worst = max(worst, abs(lhs - rhs))
        return worst
    out.append(_run(f"{tag}: coordinate events factorize", factorization, TOL.algebraic))

    numeric = [i for i, c in enumerate(ps.coords) if c is not None]
    if numeric and len(ps.joint) <= 10_000:
        def moments():
            exps = [1 if i in numeric else 0 for i in range(len(ps.factors))]
            brute = math.fsum(
                m * math.prod(float(lab[i]) for i in numeric) for lab, m in zip(ps.joint.outcomes, ps.joint.masses))
            return abs(moment_product(ps, exps) - brute)
        out.append(_run(f"{tag}: product moment equals joint expectation", moments, TOL.algebraic * 100))
    return out


# ---------------------------------------------------------------- chains

def check_chain(name: str, P: StochasticMatrix, u0: ProbVector) -> list[CheckResult]:
    tag = f"chain {name}"
    out = []

    def simplex():
        rng = np.random.default_rng(0)
        starts = [u0] + [ProbVector(P.states, rng.dirichlet(np.ones(len(P)))) for _ in range(5)]
        worst = 0.0
        for u in starts:
            for n in range(0, 11):
                w = evolve_left(u, P, n).weights
                worst = max(worst, abs(math.fsum(w) - 1.0), float(max(0.0, -w.min())))
        return worst
    out.append(_run(f"{tag}: evolution stays on the simplex", simplex, TOL.algebraic))

    def duality():
        worst = 0.0
        for n in range(0, 11):
            left = evolve_left(u0, P, n).weights
            right = evolve_right(P, u0.T, n).weights
            worst = max(worst, float(np.max(np.abs(left - right))))
        return worst
    out.append(_run(f"{tag}: left and right evolution are transposes", duality, TOL.algebraic))

    def ck():
        return max(chapman_kolmogorov_discrete(P, m, n) for m, n in [(0, 3), (1, 2), (3, 4), (5, 7)])
    out.append(_run(f"{tag}: Chapman-Kolmogorov", ck, TOL.insertion))

    out.append(_run(f"{tag}: all-ones bra is invariant",
                    lambda: float(np.max(np.abs(np.ones(len(P)) @ P.matrix.T - 1.0))), TOL.algebraic))

    def overlap():
        v = u0.self_overlap()
        one_hot = np.count_nonzero(u0.weights) == 1
        return (v <= 1 + TOL.algebraic and (abs(v - 1) <= TOL.algebraic) == one_hot), f"<Omega|Omega> = {v:.12g}"
    out.append(_run(f"{tag}: self-overlap at most 1", overlap))

    def stationary_check():
        k = stationary_multiplicity(P)
        if k != 1:
            return True, f"{k} closed classes; no unique stationary distribution"
        pi = stationary(P).weights
        return float(np.max(np.abs(pi @ P.matrix - pi))) <= TOL.insertion, f"pi = {np.round(pi, 12).tolist()}"
    out.append(_run(f"{tag}: stationary residual", stationary_check))
    return out


def _occupation_labels(states) -> bool:
    try:
        return all(int(s) >= 0 and str(int(s)) == str(s) for s in states)
    except (TypeError, ValueError):
        return False


def check_generator(name: str, Q: Generator, p0: ProbVector, observables: dict) -> list[CheckResult]:
    tag = f"generator {name}"
    out = []
    times = [0.1, 0.5, 1.0, 2.0, 10.0]

    def conservation():
        worst = 0.0
        for t in times:
            u = transition_matrix(Q, t).matrix.T
            worst = max(worst, float(np.max(np.abs(np.ones(len(Q)) @ u - 1.0))))
        return worst
    out.append(_run(f"{tag}: 1^T exp(Q^T t) = 1^T", conservation, TOL.algebraic))

    def semigroup():
        worst = 0.0
        for s, t in [(0.1, 0.2), (0.5, 1.0), (1.0, 2.5)]:
            lhs = transition_matrix(Q, s).matrix @ transition_matrix(Q, t).matrix
            worst = max(worst, float(np.max(np.abs(lhs - transition_matrix(Q, s + t).matrix))))
        return worst
    out.append(_run(f"{tag}: semigroup property", semigroup, TOL.insertion))

    def kolmogorov():
        r = kolmogorov_residuals(Q, 1.0)
        return max(r.forward, r.backward)
    out.append(_run(f"{tag}: Kolmogorov forward and backward equations", kolmogorov, 1e-6))

    def commute():
        p = transition_matrix(Q, 1.0).matrix
        q = Q.matrix
        return float(np.max(np.abs(p @ q - q @ p)))
    out.append(_run(f"{tag}: P(t) Q = Q P(t)", commute, 1e-8))

    def simplex():
        worst = 0.0
        for t in times:
            w = evolve_density(p0, Q, t).weights
            worst = max(worst, abs(math.fsum(w) - 1.0), float(max(0.0, -w.min())))
        return worst
    out.append(_run(f"{tag}: master equation stays on the simplex", simplex, TOL.algebraic))

    for oname, x in observables.items():
        def pictures(x=x):
            worst = 0.0
            for t in [0.0, 0.5, 1.0]:
                schr = doi_expectation(x, evolve_density(p0, Q, t))
                heis = heisenberg_expectation(x, Q, t, p0)
                worst = max(worst, abs(schr - heis))
            return worst
        out.append(_run(f"{tag}: Heisenberg and Schroedinger pictures agree for {oname}", pictures, TOL.insertion))
        if _occupation_labels(Q.states):
            def doi_peliti(x=x):
                worst = 0.0
                for t in [0.0, 0.5, 1.0]:
                    p = evolve_density(p0, Q, t)
                    worst = max(worst, abs(doi_expectation(x, p) - peliti_expectation(x, p)))
                return worst
            out.append(_run(f"{tag}: Doi and Peliti expectations agree for {oname}", doi_peliti, TOL.insertion))
    return out


# ---------------------------------------------------------------- densities

def check_density(name: str, d, regions: dict) -> list[CheckResult]:
    tag = f"density {name}"
    out = []
    one = (lambda x: np.ones_like(x)) if d.dim == 1 else (lambda x, y: np.ones_like(x))
    out.append(_run(f"{tag}: integrates to 1", lambda: abs(d.integrate(one) - 1.0), QUAD_TOL))
    for rname, r in regions.items():
        def comp(r=r):
            return abs(cont.region_probability(d, r) + cont.region_probability(d, ~r) - 1.0)
        out.append(_run(f"{tag}: P({rname}) + P(~{rname}) = 1", comp, QUAD_TOL))

        def cond(r=r):
            if cont.region_probability(d, r) == 0:
                return 0.0
            return abs(cont.conditional_probability(d, d.region, r) - 1.0)
        out.append(_run(f"{tag}: conditional density on {rname} integrates to 1", cond, QUAD_TOL))
    if d.name == "exponential":
        def memoryless():
            base = None
            worst = 0.0
            for s in (0.5, 1.0, 2.0):
                vals = [cont.conditional_probability(d, cont.Region.interval(r + s, math.inf),
                                                     cont.Region.interval(r, math.inf)) for r in (0.0, 1.0, 3.0)]
                worst = max(worst, max(vals) - min(vals))
            return worst
        out.append(_run(f"{tag}: memorylessness", memoryless, QUAD_TOL))
    return out


# ---------------------------------------------------------------- processes

_MOMENT_QUAD = Quadrature(abs_tol=1e-13, rel_tol=1e-12)


def _moment(f: Callable, k: int, center: float) -> float:
    value, _ = integrate(lambda x: x ** k * f(x), -math.inf, math.inf, _MOMENT_QUAD, points=(center,))
    return value


def check_process(name: str, p) -> list[CheckResult]:
    tag = f"process {name}"
    out = []
    if isinstance(p, PoissonProcess):
        def moments():
            worst = 0.0
            for t in (0.5, 1.0, 3.0):
                m = poisson_moments(p, t)
                worst = max(worst, abs(m.mean - p.lam * t), abs(m.variance - p.lam * t))
            return worst
        out.append(_run(f"{tag}: mean and variance equal lambda t", moments, TOL.insertion))

        def ctmc_agreement():
            t = 1.0
            size = poisson_tail_cutoff(p, t, 1e-14) + 20
            states = tuple(str(i) for i in range(size + 1))
            g = generator_from_rates(GainLossRates(states, {(states[i], states[i + 1]): p.lam for i in range(size)}))
            row = transition_matrix(g, t).matrix[0]
            return max(abs(row[k] - poisson_transition(p, 0, k, t)) for k in range(size - 10))
        out.append(_run(f"{tag}: agrees with the pure-birth chain", ctmc_agreement, 1e-8))
    elif isinstance(p, WienerProcess):
        out.append(_run(f"{tag}: continuous Chapman-Kolmogorov",
                        lambda: ck_check_continuous(p, 0.0, 0.5, 1.0), 1e-8))

        def moments():
            t = 2.0
            f = lambda x: wiener_density(p, x, t)
            return max(abs(_moment(f, 0, 0.0) - 1), abs(_moment(f, 1, 0.0)), abs(_moment(f, 2, 0.0) - t * p.sigma ** 2))
        out.append(_run(f"{tag}: mean 0 and variance t sigma^2", moments, QUAD_TOL))
    elif isinstance(p, BrownianMotion):
        def moments():
            t = 2.0
            mean = p.mu * t
            f = lambda y: brownian_density(p, y, t)
            m1 = _moment(f, 1, mean)
            var = _moment(lambda y: (y - mean) ** 2 * f(y), 0, mean)
            return max(abs(m1 - mean), abs(var - t * p.sigma ** 2))
        out.append(_run(f"{tag}: drift mu t and variance t sigma^2", moments, QUAD_TOL))

        def reduces():
            w = WienerProcess(p.sigma)
            b0 = BrownianMotion(p.x0, 0.0, p.sigma)
            xs = np.linspace(-3, 3, 13)
            return float(np.max(np.abs(brownian_density(b0, xs, 1.5) - wiener_density(w, xs, 1.5))))
        out.append(_run(f"{tag}: zero drift reduces to Wiener", reduces, 0.0))
    out.append(_run(f"{tag}: fixed seed reproduces the path",
                    lambda: (sample_path(p, [0.5, 1.0, 2.0], 42) == sample_path(p, [0.5, 1.0, 2.0], 42), "")))
    return out


# ---------------------------------------------------------------- whole model

def verify_model(model) -> list[CheckResult]:
    """Every applicable check for a loaded model."""
    results: list[CheckResult] = []

    def on(kind: str, name: str, table: dict) -> dict:
        return {n: d.value for n, d in table.items() if d.home.kind == kind and d.home.name == name}

    for name, space in model.spaces.items():
        results += check_space(name, space, on("space", name, model.events), on("space", name, model.observables))
        if name in model.products:
            results += check_product(name, model.products[name])
    for name, P in model.chains.items():
        results += check_chain(name, P, model.chain_initial[name])
        u = model.chain_initial[name]
        results += check_space(f"{name} at step 0", DiscreteSpace(u.states, u.weights),
                               on("chain", name, model.events), on("chain", name, model.observables))
    for name, Q in model.generators.items():
        results += check_generator(name, Q, model.generator_initial[name], on("generator", name, model.observables))
        p = evolve_density(model.generator_initial[name], Q, 1.0)
        results += check_space(f"{name} at time 1", DiscreteSpace(p.states, p.weights),
                               on("generator", name, model.events), on("generator", name, model.observables))
    for name, d in model.densities.items():
        results += check_density(name, d, on("density", name, model.events))
    for name, p in model.processes.items():
        results += check_process(name, p)
    return results

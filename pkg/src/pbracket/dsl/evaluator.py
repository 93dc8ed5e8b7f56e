"""Evaluate bracket expressions against a model.

Every query is answered on one *home*: a finite space, a density, or
the distribution of a chain or generator at some time.  The home is
inferred from the names in the query:

* a declared event or observable carries its home;
* any other event atom must be an outcome or state label, and the home is
  whichever space or chain has that label;
* ``Omega_t`` needs a chain (``t`` a whole number of steps) or a generator.

Chains and generators are reduced to a finite space holding the
distribution at the requested time (the declared initial distribution
for plain ``Omega``), after which the finite-space rules apply.

Dispatch by shape:

==========================  ==============================================
``P(A|B)``                  bracket on a finite space; conditional
                            probability on a density
``P(A|Omega)``              probability / region probability
``P(A|Omega_t)``            probability under the evolved distribution
``P(Omega|X|...|Omega)``    expectation of the product of the observables
``E[obs]``, ``E[obs] | F``  expectation, conditional expectation
``Var[obs]``                variance
==========================  ==============================================
"""
from __future__ import annotations

from typing import Mapping

import numpy as np

from .. import continuous as cont
from ..ctmc import doi_expectation, evolve_density
from ..dtmc import evolve_left
from ..errors import EvaluationError
from ..observables import Observable, conditional_expectation, expectation, variance
from ..sample import DiscreteSpace, EventSet, bracket, probability
from .model import Home, Model
from .nodes import (Bracket, Complement, Expect, Intersect, Name, Num, ObsName, Omega, OmegaT,
                    Product, Sum, Union_, Var, event_names, obs_names)
from .parser import parse


class _Context:
    def __init__(self, model: Model, bindings: Mapping[str, float]):
        self.model = model
        self.bindings = {k: float(v) for k, v in (bindings or {}).items()}

    # -- home resolution

    def _label_homes(self, label: str) -> list[Home]:
        return [h for h in self.model.homes()
                if h.kind != "density" and label in self.model.outcomes(h)]

    def home(self, node) -> Home:
        m = self.model
        found: set[Home] = set()
        sides = [node.lhs, node.rhs] if isinstance(node, Bracket) else []
        if isinstance(node, Expect) and node.given is not None:
            sides.append(node.given)
        ambiguous = {}
        for name in sorted(set().union(*map(event_names, sides))):
            if name in m.events:
                found.add(m.events[name].home)
                continue
            homes = self._label_homes(name)
            if not homes:
                raise EvaluationError(f"unknown event or outcome {name!r}")
            if len(homes) == 1:
                found.add(homes[0])
            else:
                ambiguous[name] = homes
        # a label found on several homes is settled by the other names
        for name, homes in ambiguous.items():
            if not found & set(homes):
                raise EvaluationError(f"label {name!r} is ambiguous between {', '.join(map(str, homes))}")
        obs = set(node.mids) if isinstance(node, Bracket) else obs_names(node.obs)
        for name in obs:
            if name in m.observables:
                found.add(m.observables[name].home)
            elif name in m.events:
                raise EvaluationError(f"{name!r} is an event; an observable is expected here")
            elif name not in self.bindings:
                raise EvaluationError(f"unknown observable {name!r}")
        timed = isinstance(node, Bracket) and isinstance(node.rhs, OmegaT)
        if not found:
            candidates = m.homes()
            if timed:
                candidates = [h for h in candidates if h.kind in ("chain", "generator")]
            if len(candidates) != 1:
                raise EvaluationError("cannot tell which space, density or chain the query refers to")
            found = set(candidates)
        if len(found) > 1:
            raise EvaluationError(f"query mixes {', '.join(sorted(map(str, found)))}")
        home = found.pop()
        if timed and home.kind not in ("chain", "generator"):
            raise EvaluationError(f"Omega_t needs a chain or generator, but the query is on {home}")
        return home

    # -- finite distributions

    def space_at(self, home: Home, time: float | None):
        """The finite space for ``home`` at ``time``, with the state vector it came from."""
        m = self.model
        if home.kind == "space":
            return m.spaces[home.name], None
        if home.kind == "chain":
            u = m.chain_initial[home.name]
            if time is not None:
                if time != int(time):
                    raise EvaluationError(f"chain {home.name!r} moves in whole steps; got Omega_{time}")
                u = evolve_left(u, m.chains[home.name], int(time))
            return DiscreteSpace(u.states, u.weights), u
        p = m.generator_initial[home.name]
        if time is not None:
            p = evolve_density(p, m.generators[home.name], time)
        return DiscreteSpace(p.states, p.weights), p

    def events(self, node, home: Home, space: DiscreteSpace) -> EventSet:
        if isinstance(node, Omega):
            return space.omega
        if isinstance(node, Name):
            decl = self.model.events.get(node.id)
            if decl is not None:
                if decl.home != home:
                    raise EvaluationError(f"event {node.id!r} lives on {decl.home}, not {home}")
                return decl.value
            return EventSet((node.id,))
        if isinstance(node, Union_):
            return self.events(node.left, home, space) | self.events(node.right, home, space)
        if isinstance(node, Intersect):
            return self.events(node.left, home, space) & self.events(node.right, home, space)
        if isinstance(node, Complement):
            return space.complement(self.events(node.operand, home, space))
        raise EvaluationError(f"not an event: {node!r}")

    def observable(self, node, home: Home, space: DiscreteSpace) -> Observable:
        if isinstance(node, Num):
            return Observable.constant(space, node.value)
        if isinstance(node, ObsName):
            decl = self.model.observables.get(node.id)
            if decl is None:
                return Observable.constant(space, self.bindings[node.id])
            return decl.value
        left = self.observable(node.left, home, space)
        right = self.observable(node.right, home, space)
        return left + right if isinstance(node, Sum) else left * right

    # -- densities

    def region(self, node, home: Home, d) -> cont.Region:
        if isinstance(node, Omega):
            return d.region
        if isinstance(node, Name):
            decl = self.model.events.get(node.id)
            if decl is None or decl.home != home:
                raise EvaluationError(f"{node.id!r} is not a region of {home}")
            return decl.value
        if isinstance(node, Union_):
            return self.region(node.left, home, d) | self.region(node.right, home, d)
        if isinstance(node, Intersect):
            return self.region(node.left, home, d) & self.region(node.right, home, d)
        if isinstance(node, Complement):
            return ~self.region(node.operand, home, d)
        raise EvaluationError(f"not an event: {node!r}")

    def function(self, node, d):
        if isinstance(node, Num):
            c = node.value
        elif isinstance(node, ObsName):
            decl = self.model.observables.get(node.id)
            if decl is not None:
                return decl.value
            c = self.bindings[node.id]
        else:
            f = self.function(node.left, d)
            g = self.function(node.right, d)
            if isinstance(node, Sum):
                return lambda *p: f(*p) + g(*p)
            return lambda *p: f(*p) * g(*p)
        return lambda *p: np.full(np.shape(p[0]), c)


def _mids_tree(mids: tuple):
    tree = ObsName(mids[0])
    for name in mids[1:]:
        tree = Product(tree, ObsName(name))
    return tree


def evaluate(expr, model: Model, bindings: Mapping[str, float] | None = None) -> float:
    """Value of a bracket expression (text or parsed tree) on ``model``.

    ``bindings`` supplies numeric constants that may appear by name inside
    observable expressions.

    Raises
    ------
    ParseError, EvaluationError
        Or the library error of the underlying operation (zero evidence,
        integration failure, ...).
    """
    node = parse(expr) if isinstance(expr, str) else expr
    ctx = _Context(model, bindings or {})
    home = ctx.home(node)

    if home.kind == "density":
        d = model.densities[home.name]
        if isinstance(node, Bracket):
            if node.mids:
                return cont.cexpectation(d, ctx.function(_mids_tree(node.mids), d))
            a = ctx.region(node.lhs, home, d)
            if isinstance(node.rhs, Omega):
                return cont.region_probability(d, a)
            return cont.conditional_probability(d, a, ctx.region(node.rhs, home, d))
        if isinstance(node, Expect):
            given = None if node.given is None else ctx.region(node.given, home, d)
            return cont.cexpectation(d, ctx.function(node.obs, d), given)
        g = ctx.function(node.obs, d)
        mean = cont.cexpectation(d, g)
        return max(0.0, cont.cexpectation(d, lambda *p: (g(*p) - mean) ** 2))

    time = node.rhs.time if isinstance(node, Bracket) and isinstance(node.rhs, OmegaT) else None
    space, vec = ctx.space_at(home, time)
    if isinstance(node, Bracket):
        if node.mids:
            x = ctx.observable(_mids_tree(node.mids), home, space)
            if home.kind == "generator":
                return doi_expectation(x, vec)
            return expectation(space, x)
        a = ctx.events(node.lhs, home, space)
        if isinstance(node.rhs, (Omega, OmegaT)):
            return probability(space, a)
        return bracket(space, a, ctx.events(node.rhs, home, space))
    x = ctx.observable(node.obs, home, space)
    if isinstance(node, Expect):
        if node.given is None:
            return expectation(space, x)
        return conditional_expectation(space, x, ctx.events(node.given, home, space))
    return variance(space, x)


"""Model files: JSON declarations of spaces, events, observables and dynamics.

A model file is a UTF-8 JSON object whose top-level keys are drawn from
``spaces``, ``events``, ``observables``, ``chains``, ``generators``,
``densities`` and ``processes`` (plus an optional free-text
``description``).  Each key maps names to declarations.  Names must be
identifiers and must not be ``Omega``.

Numbers may be JSON numbers or strings; ``"1/6"`` is read as an exact
rational and ``"inf"`` / ``"-inf"`` are accepted where an unbounded value
makes sense.

Every event and observable lives on one *home*: a space, a density or a
chain (``"space"``, ``"density"`` or ``"chain"`` key).  When the model
declares exactly one home the key may be omitted.  See the README for the
full schema.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .. import continuous as cont
from ..ctmc import GainLossRates, Generator, generator_from_rates
from ..dtmc import COLUMN, ROW, ProbVector, StochasticMatrix
from ..errors import ModelError, PBracketError
from ..observables import Observable, product_space
from ..processes import BrownianMotion, PoissonProcess, WienerProcess
from ..sample import DiscreteSpace, EventSet, as_number

SECTIONS = ("spaces", "events", "observables", "chains", "generators", "densities", "processes")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_RESERVED = {"Omega"}


@dataclass(frozen=True)
class Home:
    """Where an event or observable lives: ``kind`` is space, density, chain or generator."""

    kind: str
    name: str

    def __str__(self):
        return f"{self.kind} {self.name!r}"


@dataclass(frozen=True)
class Declared:
    home: Home
    value: Any


@dataclass
class Model:
    """A loaded, validated model."""

    spaces: dict = field(default_factory=dict)
    products: dict = field(default_factory=dict)
    events: dict = field(default_factory=dict)
    observables: dict = field(default_factory=dict)
    chains: dict = field(default_factory=dict)
    chain_initial: dict = field(default_factory=dict)
    generators: dict = field(default_factory=dict)
    generator_initial: dict = field(default_factory=dict)
    densities: dict = field(default_factory=dict)
    processes: dict = field(default_factory=dict)
    description: str = ""
    source: str = "<memory>"

    def homes(self) -> list[Home]:
        out = [Home("space", n) for n in self.spaces]
        out += [Home("density", n) for n in self.densities]
        out += [Home("chain", n) for n in self.chains]
        out += [Home("generator", n) for n in self.generators]
        return out

    def home_of(self, name: str, decl: dict, what: str) -> Home:
        keys = [k for k in ("space", "density", "chain") if k in decl]
        if len(keys) > 1:
            raise ModelError(f"{what} {name!r} names more than one home ({', '.join(keys)})")
        if not keys:
            homes = self.homes()
            if len(homes) != 1:
                raise ModelError(f"{what} {name!r} must say which space, density or chain it belongs to")
            return homes[0]
        key = keys[0]
        target = decl[key]
        if key == "space" and target in self.spaces:
            return Home("space", target)
        if key == "density" and target in self.densities:
            return Home("density", target)
        if key == "chain" and target in self.chains:
            return Home("chain", target)
        if key == "chain" and target in self.generators:
            return Home("generator", target)
        raise ModelError(f"{what} {name!r} refers to unknown {key} {target!r}")

    def outcomes(self, home: Home) -> tuple:
        if home.kind == "space":
            return self.spaces[home.name].outcomes
        if home.kind == "chain":
            return self.chains[home.name].states
        if home.kind == "generator":
            return self.generators[home.name].states
        return ()

    def summary(self) -> str:
        lines = [f"model {self.source}"]
        if self.description:
            lines.append(f"  {self.description}")
        for name, sp in self.spaces.items():
            kind = "product space" if name in self.products else "space"
            lines.append(f"  {kind} {name}: {len(sp)} outcomes")
        for name, d in self.densities.items():
            lines.append(f"  density {name}: {d.name}, {d.dim}-D")
        for name, p in self.chains.items():
            lines.append(f"  chain {name}: {len(p)} states {list(p.states)}")
        for name, q in self.generators.items():
            lines.append(f"  generator {name}: {len(q)} states")
        for name, e in self.events.items():
            lines.append(f"  event {name} on {e.home}")
        for name, o in self.observables.items():
            lines.append(f"  observable {name} on {o.home}")
        for name, p in self.processes.items():
            lines.append(f"  process {name}: {p}")
        return "\n".join(lines)


# ---------------------------------------------------------------- helpers

def _number(v, what: str) -> float:
    if isinstance(v, str) and v.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    if isinstance(v, str) and v.strip().lower() in ("-inf", "-infinity"):
        return -math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ModelError(f"{what}: expected a number, got {v!r}")
    try:
        return float(as_number(v))
    except PBracketError as exc:
        raise ModelError(f"{what}: {exc}") from None


def _exact(v, what: str):
    """Keep rationals exact so masses like "1/6" renormalize without drift."""
    if isinstance(v, bool) or not isinstance(v, (int, float, str)):
        raise ModelError(f"{what}: expected a number, got {v!r}")
    try:
        return as_number(v)
    except PBracketError as exc:
        raise ModelError(f"{what}: {exc}") from None


def _label(v) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ModelError(f"labels must be strings or integers, got {v!r}")
    return str(v)


def _labels(seq, what: str) -> tuple:
    if not isinstance(seq, list) or not seq:
        raise ModelError(f"{what}: expected a nonempty list of labels")
    return tuple(_label(v) for v in seq)


def _check_keys(decl: dict, allowed: set, what: str):
    if not isinstance(decl, dict):
        raise ModelError(f"{what}: expected an object, got {type(decl).__name__}")
    extra = set(decl) - allowed
    if extra:
        raise ModelError(f"{what}: unknown keys {sorted(extra)}")


def _weights(decl, states: tuple, what: str) -> list:
    if isinstance(decl, dict):
        unknown = set(decl) - set(states)
        if unknown:
            raise ModelError(f"{what}: weights for unknown labels {sorted(unknown)}")
        return [_exact(decl.get(s, 0), what) for s in states]
    if isinstance(decl, list):
        if len(decl) != len(states):
            raise ModelError(f"{what}: {len(decl)} weights for {len(states)} labels")
        return [_exact(v, what) for v in decl]
    raise ModelError(f"{what}: expected a list or an object of weights")


def _matrix(decl, n: int, what: str) -> np.ndarray:
    if not isinstance(decl, list) or len(decl) != n or not all(isinstance(r, list) and len(r) == n for r in decl):
        raise ModelError(f"{what}: expected a {n}x{n} list of rows")
    return np.array([[_number(v, what) for v in row] for row in decl])


def _wrap(what: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ModelError:
        raise
    except PBracketError as exc:
        raise ModelError(f"{what}: {exc}") from None


# ---------------------------------------------------------------- sections

def _load_space(model: Model, name: str, decl: dict):
    what = f"space {name!r}"
    if "product" in decl:
        _check_keys(decl, {"product"}, what)
        factors = decl["product"]
        if not isinstance(factors, list) or not factors:
            raise ModelError(f"{what}: 'product' needs a nonempty list of space names")
        for f in factors:
            if f not in model.spaces or f in model.products:
                raise ModelError(f"{what}: unknown (or product) factor space {f!r}; declare factors first")
        ps = _wrap(what, product_space, [model.spaces[f] for f in factors])
        model.products[name] = ps
        model.spaces[name] = ps.joint
        return
    _check_keys(decl, {"outcomes", "masses", "uniform"}, what)
    outcomes = _labels(decl.get("outcomes"), what)
    if decl.get("uniform"):
        if "masses" in decl:
            raise ModelError(f"{what}: give either 'masses' or 'uniform', not both")
        model.spaces[name] = _wrap(what, DiscreteSpace.uniform, outcomes)
        return
    if "masses" not in decl:
        raise ModelError(f"{what}: needs 'masses' or \"uniform\": true")
    masses = _weights(decl["masses"], outcomes, what)
    model.spaces[name] = _wrap(what, DiscreteSpace, outcomes, masses)


def _initial(decl, states: tuple, orientation: str, what: str) -> ProbVector:
    if decl is None:
        return ProbVector.uniform(states, orientation)
    if isinstance(decl, str):
        return _wrap(what, ProbVector.one_hot, states, decl, orientation)
    w = [float(v) for v in _weights(decl, states, what)]
    return _wrap(what, ProbVector, states, w, orientation)


def _load_chain(model: Model, name: str, decl: dict):
    what = f"chain {name!r}"
    _check_keys(decl, {"states", "matrix", "initial"}, what)
    states = _labels(decl.get("states"), what)
    if "matrix" not in decl:
        raise ModelError(f"{what}: needs 'matrix'")
    rows = decl["matrix"]
    if not isinstance(rows, list) or len(rows) != len(states):
        raise ModelError(f"{what}: expected {len(states)} matrix rows")
    exact = [[_exact(v, what) for v in row] if isinstance(row, list) else None for row in rows]
    if any(r is None or len(r) != len(states) for r in exact):
        raise ModelError(f"{what}: expected a {len(states)}x{len(states)} matrix")
    model.chains[name] = _wrap(what, StochasticMatrix, states, [[float(v) for v in r] for r in exact])
    model.chain_initial[name] = _initial(decl.get("initial"), states, ROW, what)


def _load_generator(model: Model, name: str, decl: dict):
    what = f"generator {name!r}"
    _check_keys(decl, {"states", "matrix", "rates", "gain", "birth_death", "initial"}, what)
    forms = [k for k in ("matrix", "rates", "gain", "birth_death") if k in decl]
    if len(forms) != 1:
        raise ModelError(f"{what}: give exactly one of 'matrix', 'rates', 'gain', 'birth_death'")
    form = forms[0]
    if form == "birth_death":
        bd = decl["birth_death"]
        _check_keys(bd, {"size", "birth", "death", "linear_death"}, what)
        size = bd.get("size")
        if isinstance(size, bool) or not isinstance(size, int) or size < 1:
            raise ModelError(f"{what}: birth_death.size must be a positive integer")
        if "states" in decl:
            raise ModelError(f"{what}: birth_death generates its own states 0..size")
        states = tuple(str(i) for i in range(size + 1))
        birth = _number(bd.get("birth", 0), what)
        death = _number(bd.get("death", 0), what)
        linear = bool(bd.get("linear_death", False))
        rates = {}
        for i in range(size):
            rates[(states[i], states[i + 1])] = birth
            rates[(states[i + 1], states[i])] = death * (i + 1 if linear else 1)
        q = _wrap(what, lambda: generator_from_rates(GainLossRates(states, rates)))
    else:
        states = _labels(decl.get("states"), what)
        if form == "matrix":
            q = _wrap(what, Generator, states, _matrix(decl["matrix"], len(states), what))
        elif form == "gain":
            g = _wrap(what, GainLossRates.from_gain, states, _matrix(decl["gain"], len(states), what))
            q = _wrap(what, generator_from_rates, g)
        else:
            entries = decl["rates"]
            if not isinstance(entries, list):
                raise ModelError(f"{what}: 'rates' must be a list of {{from, to, rate}} objects")
            rates = {}
            for e in entries:
                _check_keys(e, {"from", "to", "rate"}, what)
                key = (_label(e.get("from")), _label(e.get("to")))
                if key in rates:
                    raise ModelError(f"{what}: duplicate rate {key[0]} -> {key[1]}")
                rates[key] = _number(e.get("rate"), what)
            q = _wrap(what, lambda: generator_from_rates(GainLossRates(states, rates)))
    model.generators[name] = q
    model.generator_initial[name] = _initial(decl.get("initial"), q.states, COLUMN, what)


def _region(decl, dim: int, what: str) -> cont.Region:
    if not isinstance(decl, dict) or len(decl) != 1:
        raise ModelError(f"{what}: a region is an object with exactly one key")
    (kind, arg), = decl.items()
    if kind == "interval":
        if dim != 1 or not isinstance(arg, list) or len(arg) != 2:
            raise ModelError(f"{what}: 'interval' needs [lo, hi] on a 1-D density")
        return _wrap(what, cont.Region.interval, _number(arg[0], what), _number(arg[1], what))
    if kind in ("and", "or"):
        if not isinstance(arg, list) or not arg:
            raise ModelError(f"{what}: '{kind}' needs a nonempty list of regions")
        parts = [_region(r, dim, what) for r in arg]
        out = parts[0]
        for r in parts[1:]:
            out = (out & r) if kind == "and" else (out | r)
        return out
    if kind == "not":
        return ~_region(arg, dim, what)
    if dim != 2:
        raise ModelError(f"{what}: region {kind!r} needs a 2-D density")
    if kind == "halfplane":
        _check_keys(arg, {"normal", "offset"}, what)
        normal = arg.get("normal")
        if not isinstance(normal, list) or len(normal) != 2:
            raise ModelError(f"{what}: halfplane.normal must be [a, b]")
        return _wrap(what, cont.Region.halfplane, tuple(_number(v, what) for v in normal),
                     _number(arg.get("offset", 0), what))
    if kind == "disc":
        _check_keys(arg, {"radius", "center"}, what)
        center = arg.get("center", [0, 0])
        return _wrap(what, cont.Region.disc, _number(arg.get("radius", 1), what),
                     tuple(_number(v, what) for v in center))
    if kind == "box":
        if not isinstance(arg, list) or len(arg) != 2:
            raise ModelError(f"{what}: box needs [[x0, x1], [y0, y1]]")
        return _wrap(what, cont.Region.box, *[tuple(_number(v, what) for v in pair) for pair in arg])
    raise ModelError(f"{what}: unknown region kind {kind!r}")


def _load_density(model: Model, name: str, decl: dict):
    what = f"density {name!r}"
    kind = decl.get("kind") if isinstance(decl, dict) else None
    if kind == "uniform_disc":
        _check_keys(decl, {"kind", "radius"}, what)
        d = _wrap(what, cont.uniform_disc, _number(decl.get("radius", 1), what))
    elif kind == "exponential":
        _check_keys(decl, {"kind", "lambda"}, what)
        d = _wrap(what, cont.exponential, _number(decl.get("lambda"), what))
    elif kind == "normal":
        _check_keys(decl, {"kind", "mu", "sigma2"}, what)
        d = _wrap(what, cont.normal, _number(decl.get("mu", 0), what), _number(decl.get("sigma2", 1), what))
    else:
        raise ModelError(f"{what}: kind must be uniform_disc, exponential or normal")
    model.densities[name] = d


def _load_process(model: Model, name: str, decl: dict):
    what = f"process {name!r}"
    kind = decl.get("kind") if isinstance(decl, dict) else None
    if kind == "poisson":
        _check_keys(decl, {"kind", "lambda"}, what)
        p = _wrap(what, PoissonProcess, _number(decl.get("lambda"), what))
    elif kind == "wiener":
        _check_keys(decl, {"kind", "sigma"}, what)
        p = _wrap(what, WienerProcess, _number(decl.get("sigma", 1), what))
    elif kind == "brownian":
        _check_keys(decl, {"kind", "x0", "mu", "sigma"}, what)
        p = _wrap(what, BrownianMotion, _number(decl.get("x0", 0), what),
                  _number(decl.get("mu", 0), what), _number(decl.get("sigma", 1), what))
    else:
        raise ModelError(f"{what}: kind must be poisson, wiener or brownian")
    model.processes[name] = p


def _load_event(model: Model, name: str, decl):
    what = f"event {name!r}"
    if isinstance(decl, list):
        decl = {"members": decl}
    _check_keys(decl, {"space", "density", "chain", "members", "coordinate", "region"}, what)
    home = model.home_of(name, decl, "event")
    if home.kind == "density":
        if "region" not in decl or "members" in decl:
            raise ModelError(f"{what}: events on a density are given by 'region'")
        value = _region(decl["region"], model.densities[home.name].dim, what)
    else:
        if "members" not in decl or "region" in decl:
            raise ModelError(f"{what}: events on a {home.kind} are given by 'members'")
        members = decl["members"]
        if not isinstance(members, list):
            raise ModelError(f"{what}: 'members' must be a list")
        if "coordinate" in decl:
            ps = model.products.get(home.name)
            if ps is None:
                raise ModelError(f"{what}: 'coordinate' needs a product space")
            value = _wrap(what, ps.coordinate_event, decl["coordinate"], [_label(m) for m in members])
        else:
            known = set(model.outcomes(home))
            labels = [tuple(_label(x) for x in m) if isinstance(m, list) else _label(m) for m in members]
            for lab in labels:
                if lab not in known:
                    raise ModelError(f"{what}: unknown outcome {lab!r} of {home}")
            value = EventSet(labels)
    model.events[name] = Declared(home, value)


def _density_coordinate(dim: int, i: int, what: str):
    if dim == 1:
        if i != 0:
            raise ModelError(f"{what}: a 1-D density only has coordinate 0")
        return lambda x: x
    if i == 0:
        return lambda x, y: x
    if i == 1:
        return lambda x, y: y
    raise ModelError(f"{what}: coordinate must be 0 or 1")


def _load_observable(model: Model, name: str, decl: dict):
    what = f"observable {name!r}"
    _check_keys(decl, {"space", "density", "chain", "values", "identity", "coordinate"}, what)
    home = model.home_of(name, decl, "observable")
    forms = [k for k in ("values", "identity", "coordinate") if k in decl]
    if len(forms) != 1:
        raise ModelError(f"{what}: give exactly one of 'values', 'identity', 'coordinate'")
    form = forms[0]
    if home.kind == "density":
        dim = model.densities[home.name].dim
        if form == "values":
            raise ModelError(f"{what}: observables on a density use 'identity' or 'coordinate'")
        i = 0 if form == "identity" else decl["coordinate"]
        if form == "identity" and dim != 1:
            raise ModelError(f"{what}: 'identity' needs a 1-D density; use 'coordinate'")
        value = _density_coordinate(dim, i, what)
    else:
        outcomes = model.outcomes(home)
        if form == "values":
            vals = decl["values"]
            if not isinstance(vals, (list, dict)):
                raise ModelError(f"{what}: 'values' must be a list or an object keyed by outcome")
            w = _weights(vals, outcomes, what) if isinstance(vals, list) else None
            if isinstance(vals, dict):
                missing = set(outcomes) - set(vals)
                if missing:
                    raise ModelError(f"{what}: no value for outcomes {sorted(map(str, missing))}")
                w = _weights(vals, outcomes, what)
            value = Observable({o: float(v) for o, v in zip(outcomes, w)})
        elif form == "identity":
            try:
                value = Observable({o: float(o) for o in outcomes})
            except (TypeError, ValueError):
                raise ModelError(f"{what}: 'identity' needs numeric labels on {home}") from None
        else:
            ps = model.products.get(home.name)
            if ps is None:
                raise ModelError(f"{what}: 'coordinate' needs a product space")
            value = _wrap(what, ps.coordinate, decl["coordinate"])
    model.observables[name] = Declared(home, value)


# ---------------------------------------------------------------- entry points

def load_model_dict(data: dict, source: str = "<memory>") -> Model:
    """Build a :class:`Model` from an already-decoded JSON object."""
    if not isinstance(data, dict):
        raise ModelError("a model file must contain a JSON object")
    extra = set(data) - set(SECTIONS) - {"description"}
    if extra:
        raise ModelError(f"unknown top-level keys {sorted(extra)}; allowed: {', '.join(SECTIONS)}")
    model = Model(source=source, description=str(data.get("description", "")))
    seen: dict[tuple, str] = {}
    for section in SECTIONS:
        block = data.get(section, {})
        if not isinstance(block, dict):
            raise ModelError(f"'{section}' must be an object mapping names to declarations")
        for name in block:
            if not _IDENT.match(name) or name in _RESERVED:
                raise ModelError(f"{section}: {name!r} is not a valid name")
            group = "dynamics" if section in ("chains", "generators") else section
            if (group, name) in seen:
                raise ModelError(f"{name!r} is declared both as a chain and as a generator")
            seen[(group, name)] = section
    loaders = [("spaces", _load_space), ("chains", _load_chain), ("generators", _load_generator),
               ("densities", _load_density), ("processes", _load_process),
               ("events", _load_event), ("observables", _load_observable)]
    for section, loader in loaders:
        for name, decl in data.get(section, {}).items():
            if not isinstance(decl, (dict, list)) or (isinstance(decl, list) and section != "events"):
                raise ModelError(f"{section} {name!r}: expected an object")
            loader(model, name, decl)
    return model


def load_model(path: str | Path) -> Model:
    """Read and validate a model file.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ModelError
        If the JSON is malformed or any declaration fails validation.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return load_model_dict(data, str(path))

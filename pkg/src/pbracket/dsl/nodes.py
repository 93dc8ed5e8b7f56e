"""Syntax tree of bracket expressions, and a printer that inverts the parser.

Parentheses are not kept as nodes.  The printer inserts the fewest
parentheses needed to rebuild the same tree, so
``parse(to_text(tree)) == tree`` for every tree the parser produces.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union


# ---------------------------------------------------------------- events

@dataclass(frozen=True)
class Omega:
    """The sure event, or the system state at time 0."""


@dataclass(frozen=True)
class OmegaT:
    """The system state after ``time`` steps (chains) or time units (generators)."""

    time: float


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class Union_:
    left: "EventExpr"
    right: "EventExpr"


@dataclass(frozen=True)
class Intersect:
    left: "EventExpr"
    right: "EventExpr"


@dataclass(frozen=True)
class Complement:
    operand: "EventExpr"


EventExpr = Union[Name, Union_, Intersect, Complement]


# ---------------------------------------------------------------- observables

@dataclass(frozen=True)
class ObsName:
    id: str


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Sum:
    left: "ObsExpr"
    right: "ObsExpr"


@dataclass(frozen=True)
class Product:
    left: "ObsExpr"
    right: "ObsExpr"


ObsExpr = Union[ObsName, Num, Sum, Product]


# ---------------------------------------------------------------- queries

@dataclass(frozen=True)
class Bracket:
    """P(lhs | mid_1 | ... | mid_k | rhs)."""

    lhs: Union[EventExpr, Omega]
    mids: tuple
    rhs: Union[EventExpr, Omega, OmegaT]


@dataclass(frozen=True)
class Expect:
    obs: ObsExpr
    given: EventExpr | None = None


@dataclass(frozen=True)
class Var:
    obs: ObsExpr


BracketExpr = Union[Bracket, Expect, Var]


# ---------------------------------------------------------------- printing

def format_number(value: float) -> str:
    """Shortest text that parses back to the same float."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


_EVENT_PREC = {Union_: 1, Intersect: 2, Complement: 3}
_OBS_PREC = {Sum: 1, Product: 2}


def _event(node, min_prec: int = 0) -> str:
    if isinstance(node, Omega):
        return "Omega"
    if isinstance(node, OmegaT):
        return f"Omega_{format_number(node.time)}"
    if isinstance(node, Name):
        return node.id
    prec = _EVENT_PREC[type(node)]
    if isinstance(node, Complement):
        text = "~" + _event(node.operand, prec)
    else:
        op = " + " if isinstance(node, Union_) else " & "
        # operators are left-associative, so a right operand of equal
        # precedence needs parentheses
        text = _event(node.left, prec) + op + _event(node.right, prec + 1)
    return f"({text})" if prec < min_prec else text


def _obs(node, min_prec: int = 0) -> str:
    if isinstance(node, ObsName):
        return node.id
    if isinstance(node, Num):
        return format_number(node.value)
    prec = _OBS_PREC[type(node)]
    op = "+" if isinstance(node, Sum) else "*"
    text = _obs(node.left, prec) + op + _obs(node.right, prec + 1)
    return f"({text})" if prec < min_prec else text


def to_text(node: BracketExpr) -> str:
    """Render a tree in the concrete syntax."""
    if isinstance(node, Bracket):
        parts = [_event(node.lhs), *node.mids, _event(node.rhs)]
        # "|u" directly followed by a space is the ASCII union, so a part
        # that starts with "u" is set off by a space
        return "P(" + "".join(
            (p if i == 0 else ("| " if p.startswith("u") else "|") + p) for i, p in enumerate(parts)) + ")"
    if isinstance(node, Expect):
        text = f"E[{_obs(node.obs)}]"
        return text if node.given is None else f"{text} | {_event(node.given)}"
    if isinstance(node, Var):
        return f"Var[{_obs(node.obs)}]"
    raise TypeError(f"not a bracket expression: {node!r}")


def event_names(node) -> set[str]:
    """Every atom name mentioned in an event expression."""
    if isinstance(node, Name):
        return {node.id}
    if isinstance(node, (Union_, Intersect)):
        return event_names(node.left) | event_names(node.right)
    if isinstance(node, Complement):
        return event_names(node.operand)
    return set()


def obs_names(node) -> set[str]:
    if isinstance(node, ObsName):
        return {node.id}
    if isinstance(node, (Sum, Product)):
        return obs_names(node.left) | obs_names(node.right)
    return set()

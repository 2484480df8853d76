"""Syntax trees for the supported STRIPS dialect.

Terms are plain strings; variables start with ``?``. Equality atoms use the
predicate name ``=``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class TypedVar:
    name: str
    type: str = "object"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Lit:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class When:
    condition: tuple[Lit, ...]
    effects: tuple[Lit, ...]


@dataclass(frozen=True)
class Forall:
    params: tuple[TypedVar, ...]
    body: tuple["Effect", ...]


Effect = Union[Lit, When, Forall]


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    params: tuple[TypedVar, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[TypedVar, ...] = ()
    precondition: tuple[Lit, ...] = ()
    effect: tuple[Effect, ...] = ()


@dataclass(frozen=True)
class ExistsPair:
    """``(exists (?x - t) (and (p ?a ?x) (p ?b ?x)))``"""

    var: TypedVar
    first: Atom
    second: Atom


@dataclass(frozen=True)
class PairDisjunction:
    """``(or (and a1 b1) (and a2 b2) ...)`` over ground or head-bound atoms."""

    pairs: tuple[tuple[Atom, Atom], ...]


@dataclass(frozen=True)
class DerivedRule:
    name: str
    params: tuple[TypedVar, ...]
    body: Union[ExistsPair, PairDisjunction]


@dataclass(frozen=True)
class DomainAst:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[tuple[str, str], ...] = ()
    predicates: tuple[PredicateSchema, ...] = ()
    derived: tuple[DerivedRule, ...] = ()
    actions: tuple[ActionSchema, ...] = ()

    def type_parents(self) -> dict[str, str]:
        parents = {"object": ""}
        parents.update(dict(self.types))
        return parents

    def predicate(self, name: str) -> PredicateSchema | None:
        for p in self.predicates:
            if p.name == name:
                return p
        for d in self.derived:
            if d.name == name:
                return PredicateSchema(d.name, d.params)
        return None


@dataclass(frozen=True)
class ProblemAst:
    name: str
    domain: str
    objects: tuple[tuple[str, str], ...] = ()
    init: tuple[Atom, ...] = ()
    goal: tuple[Lit, ...] = ()

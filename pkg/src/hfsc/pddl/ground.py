"""Instantiate schemas over typed objects into the grounded model."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

from ..model import (EMPTY, ConditionalEffect, EqualityDerived, GeneralizedProblem, GroundAction,
                     Instance, LiteralSet, Name, Problem)
from .ast import Atom, DomainAst, Effect, ExistsPair, Forall, Lit, ProblemAst, TypedVar, When
from .parser import PDDLError, check_problem


def effect_predicates(domain: DomainAst) -> set[str]:
    found: set[str] = set()

    def walk(e: Effect) -> None:
        if isinstance(e, Lit):
            found.add(e.atom.predicate)
        elif isinstance(e, When):
            found.update(x.atom.predicate for x in e.effects)
        else:
            for x in e.body:
                walk(x)

    for a in domain.actions:
        for e in a.effect:
            walk(e)
    return found


class _Static:
    """Marker for literals decided at grounding time."""


TRUE, FALSE = _Static(), _Static()


@dataclass
class _Grounder:
    domain: DomainAst
    objects: dict[str, str]
    static_facts: dict[str, set[tuple[str, ...]]]
    # static predicates whose extension differs between problems: atoms true
    # in some problem stay fluents, the rest are constant false
    partial_facts: dict[str, set[tuple[str, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        parents = self.domain.type_parents()
        self.objects_of: dict[str, list[str]] = {t: [] for t in parents}
        for o, t in self.objects.items():
            while t:
                self.objects_of[t].append(o)
                t = parents.get(t, "")
        self.objset = {t: set(v) for t, v in self.objects_of.items()}
        self.derived_names = {r.name for r in self.domain.derived}
        fluents: list[Name] = []
        for p in self.domain.predicates:
            if p.name in self.static_facts:
                continue
            for combo in product(*(self.objects_of[v.type] for v in p.params)):
                if p.name not in self.partial_facts or combo in self.partial_facts[p.name]:
                    fluents.append((p.name, *combo))
        for r in self.domain.derived:
            for combo in product(*(self.objects_of[v.type] for v in r.params)):
                fluents.append((r.name, *combo))
        self.fluents = tuple(fluents)
        self.index = {n: i for i, n in enumerate(fluents)}

    # -- literals -------------------------------------------------------
    def literal(self, lit: Lit, b: dict[str, str]):
        args = tuple(b[t] if t.startswith("?") else t for t in lit.atom.args)
        pred = lit.atom.predicate
        if pred == "=":
            val = args[0] == args[1]
        elif pred in self.static_facts:
            val = args in self.static_facts[pred]
        elif pred in self.partial_facts and args not in self.partial_facts[pred]:
            val = False
        else:
            fid = self.index.get((pred, *args))
            if fid is None:
                raise PDDLError(f"atom {(pred, *args)} is not a declared fluent")
            return fid, lit.positive
        return TRUE if val == lit.positive else FALSE

    def literal_set(self, lits: Sequence[Lit], b: dict[str, str]) -> LiteralSet | None:
        """Ground conjunction; None if statically false or contradictory."""
        pos = neg = 0
        for lit in lits:
            r = self.literal(lit, b)
            if r is TRUE:
                continue
            if r is FALSE:
                return None
            fid, positive = r
            if positive:
                pos |= 1 << fid
            else:
                neg |= 1 << fid
        if pos & neg:
            return None
        return LiteralSet(pos, neg)

    # -- bindings -------------------------------------------------------
    def bindings(self, params: Sequence[TypedVar], lits: Sequence[Lit], base: dict[str, str]) -> Iterator[dict[str, str]]:
        """Type-respecting bindings of ``params`` extending ``base``, joined
        against static facts of the positive static literals in ``lits``."""
        types = {v.name: v.type for v in params}
        names = [v.name for v in params]
        facts = {**self.partial_facts, **self.static_facts}
        static = [l.atom for l in lits if l.positive and l.atom.predicate in facts]

        def rec(k: int, b: dict[str, str]) -> Iterator[dict[str, str]]:
            if k == len(static):
                rest = [n for n in names if n not in b]
                for combo in product(*(self.objects_of[types[n]] for n in rest)):
                    nb = dict(b)
                    nb.update(zip(rest, combo))
                    yield nb
                return
            atom = static[k]
            for fact in facts[atom.predicate]:
                nb = b
                for term, obj in zip(atom.args, fact):
                    if term in nb:
                        if nb[term] != obj:
                            break
                    elif term in types:
                        if obj not in self.objset[types[term]]:
                            break
                        if nb is b:
                            nb = dict(b)
                        nb[term] = obj
                    else:
                        break
                else:
                    yield from rec(k + 1, nb)

        yield from rec(0, dict(base))

    # -- effects --------------------------------------------------------
    def effects(self, items: Sequence[Effect], b: dict[str, str], where: str) -> list[ConditionalEffect]:
        uncond: list[Lit] = []
        out: list[ConditionalEffect] = []
        self._effects(items, b, uncond, out, where)
        if uncond:
            eff = self._effect_set(uncond, b, where)
            out.insert(0, ConditionalEffect(EMPTY, eff))
        return out

    def _effect_set(self, lits: Sequence[Lit], b: dict[str, str], where: str) -> LiteralSet:
        pos = neg = 0
        for lit in lits:
            fid, positive = self.literal(lit, b)
            if positive:
                pos |= 1 << fid
            else:
                neg |= 1 << fid
        # an atom both deleted and added stays true (delete-then-add)
        return LiteralSet(pos, neg & ~pos)

    def _effects(self, items, b, uncond, out, where) -> None:
        for e in items:
            if isinstance(e, Lit):
                uncond.append(Lit(Atom(e.atom.predicate, tuple(b.get(t, t) for t in e.atom.args)), e.positive))
            elif isinstance(e, When):
                cond = self.literal_set(e.condition, b)
                if cond is None:
                    continue
                eff = self._effect_set(e.effects, b, where)
                if eff:
                    out.append(ConditionalEffect(cond, eff))
            else:
                join = e.body[0].condition if len(e.body) == 1 and isinstance(e.body[0], When) else ()
                for nb in self.bindings(e.params, join, b):
                    self._effects(e.body, nb, uncond, out, where)

    def actions(self) -> tuple[GroundAction, ...]:
        out = []
        for schema in self.domain.actions:
            for b in self.bindings(schema.params, schema.precondition, {}):
                pre = self.literal_set(schema.precondition, b)
                if pre is None:
                    continue
                name = (schema.name, *(b[v.name] for v in schema.params))
                effs = self.effects(schema.effect, b, "action " + " ".join(name))
                out.append(GroundAction(name, pre, tuple(effs)))
        return tuple(out)

    def derived(self) -> tuple[EqualityDerived, ...]:
        out = []
        for r in self.domain.derived:
            for combo in product(*(self.objects_of[v.type] for v in r.params)):
                b = {v.name: o for v, o in zip(r.params, combo)}
                fid = self.index[(r.name, *combo)]
                pairs = []
                if isinstance(r.body, ExistsPair):
                    for x in self.objects_of[r.body.var.type]:
                        bx = dict(b)
                        bx[r.body.var.name] = x
                        pairs.append(self._pair(r.body.first, r.body.second, bx))
                else:
                    for a1, a2 in r.body.pairs:
                        pairs.append(self._pair(a1, a2, b))
                out.append(EqualityDerived(fid, tuple(p for p in pairs if p is not None)))
        return tuple(out)

    def _pair(self, a1: Atom, a2: Atom, b: dict[str, str]):
        r1, r2 = self.literal(Lit(a1), b), self.literal(Lit(a2), b)
        if r1 is FALSE or r2 is FALSE or r1 is TRUE or r2 is TRUE:
            # static atoms inside derived rules are not supported
            raise PDDLError("derived rules must range over fluent atoms")
        return r1[0], r2[0]

    def state(self, atoms: Sequence[Atom]) -> int:
        s = 0
        for a in atoms:
            if a.predicate in self.static_facts:
                continue
            s |= 1 << self.index[(a.predicate, *a.args)]
        return s

    def goal(self, lits: Sequence[Lit]) -> LiteralSet:
        g = self.literal_set(lits, {})
        if g is None:
            raise PDDLError("goal is statically false")
        return g


def _objects(domain: DomainAst, problems: Sequence[ProblemAst]) -> dict[str, str]:
    objs: dict[str, str] = {}
    for p in problems:
        check_problem(domain, p)
        for o, t in p.objects:
            if objs.setdefault(o, t) != t:
                raise PDDLError(f"object {o!r} has different types across problems")
    return objs


def _static_facts(domain: DomainAst, problems: Sequence[ProblemAst],
                  prune_static: bool) -> tuple[dict[str, set], dict[str, set]]:
    """Extensions of predicates no action changes: those shared by every
    problem, and the unions of those that differ."""
    if not prune_static:
        return {}, {}
    dynamic = effect_predicates(domain)
    shared, partial = {}, {}
    for pred in domain.predicates:
        if pred.name in dynamic:
            continue
        exts = [{a.args for a in p.init if a.predicate == pred.name} for p in problems]
        if all(e == exts[0] for e in exts):
            shared[pred.name] = exts[0]
        else:
            partial[pred.name] = set().union(*exts)
    return shared, partial


def _grounder(domain: DomainAst, problems: Sequence[ProblemAst], prune_static: bool) -> _Grounder:
    shared, partial = _static_facts(domain, problems, prune_static)
    return _Grounder(domain, _objects(domain, problems), shared, partial)


def _static_names(g: _Grounder) -> tuple[frozenset, frozenset]:
    atoms = frozenset((p, *args) for p, facts in g.static_facts.items() for args in facts)
    return atoms, frozenset(g.static_facts) | {"="}


def ground(domain: DomainAst, problem: ProblemAst, *, prune_static: bool = True) -> Problem:
    """Ground one problem. Static predicates are evaluated away when
    ``prune_static``; equality is always evaluated."""
    g = _grounder(domain, [problem], prune_static)
    atoms, preds = _static_names(g)
    return Problem(g.fluents, g.actions(), g.state(problem.init), g.goal(problem.goal),
                   g.derived(), atoms, preds)


def ground_generalized(domain: DomainAst, problems: Sequence[ProblemAst], *,
                       prune_static: bool = True, assign_predicate: str = "assign") -> GeneralizedProblem:
    """Ground several problems over the union of their objects.

    A static predicate is evaluated away only if its extension is identical in
    every problem, so that all instances share one fluent and action table.
    Otherwise only its atoms true in some problem become fluents.
    """
    if not problems:
        raise ValueError("need at least one problem")
    g = _grounder(domain, problems, prune_static)
    atoms, preds = _static_names(g)
    instances = tuple(Instance(g.state(p.init), g.goal(p.goal)) for p in problems)
    variables: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    schema = domain.predicate(assign_predicate)
    if schema is not None and len(schema.params) == 2:
        variables = tuple(g.objects_of[schema.params[0].type])
        values = tuple(g.objects_of[schema.params[1].type])
    return GeneralizedProblem(g.fluents, g.actions(), instances, g.derived(), atoms, preds,
                              variables, values, assign_predicate)

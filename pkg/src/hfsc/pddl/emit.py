"""Text output: lifted ASTs and propositional (grounded) problems."""

from __future__ import annotations

import re
from typing import Sequence

from ..model import GroundAction, LiteralSet, Name, Problem, bits
from .ast import Atom, DomainAst, Effect, ExistsPair, Lit, ProblemAst, TypedVar, When

#: requirement flags declared by emitted propositional domains
EMIT_REQUIREMENTS = (":typing", ":negative-preconditions", ":conditional-effects", ":equality")

_BAD = re.compile(r"[^a-z0-9_\-]")


def _atom(a: Atom) -> str:
    return "(" + " ".join((a.predicate, *a.args)) + ")"


def _lit(l: Lit) -> str:
    return _atom(l.atom) if l.positive else f"(not {_atom(l.atom)})"


def _conj(lits: Sequence[Lit]) -> str:
    if len(lits) == 1:
        return _lit(lits[0])
    return "(and " + " ".join(_lit(l) for l in lits) + ")"


def _typed(vs: Sequence[TypedVar]) -> str:
    return " ".join(f"{v.name} - {v.type}" for v in vs)


def _effect(e: Effect) -> str:
    if isinstance(e, Lit):
        return _lit(e)
    if isinstance(e, When):
        return f"(when {_conj(e.condition) if e.condition else '(and)'} {_conj(e.effects) if e.effects else '(and)'})"
    body = e.body[0] if len(e.body) == 1 else None
    inner = _effect(body) if body is not None else "(and " + " ".join(_effect(x) for x in e.body) + ")"
    return f"(forall ({_typed(e.params)}) {inner})"


def domain_to_text(d: DomainAst) -> str:
    out = [f"(define (domain {d.name})"]
    if d.requirements:
        out.append("  (:requirements " + " ".join(d.requirements) + ")")
    if d.types:
        out.append("  (:types " + " ".join(f"{t} - {p}" for t, p in d.types) + ")")
    out.append("  (:predicates")
    for p in d.predicates:
        out.append(f"    ({' '.join([p.name, _typed(p.params)]).strip()})")
    out.append("  )")
    for r in d.derived:
        head = f"({' '.join([r.name, _typed(r.params)]).strip()})"
        if isinstance(r.body, ExistsPair):
            b = r.body
            body = f"(exists ({_typed([b.var])}) (and {_atom(b.first)} {_atom(b.second)}))"
        else:
            body = "(or " + " ".join(f"(and {_atom(x)} {_atom(y)})" for x, y in r.body.pairs) + ")"
        out.append(f"  (:derived {head}\n    {body})")
    for a in d.actions:
        out.append(f"  (:action {a.name}")
        out.append(f"    :parameters ({_typed(a.params)})")
        out.append(f"    :precondition (and {' '.join(_lit(l) for l in a.precondition)})")
        effects = "\n      ".join(_effect(e) for e in a.effect)
        out.append(f"    :effect (and\n      {effects}))")
    out.append(")")
    return "\n".join(out) + "\n"


def problem_to_text(p: ProblemAst) -> str:
    out = [f"(define (problem {p.name})", f"  (:domain {p.domain})"]
    out.append("  (:objects " + " ".join(f"{o} - {t}" for o, t in p.objects) + ")")
    out.append("  (:init")
    out.extend("    " + _atom(a) for a in p.init)
    out.append("  )")
    out.append("  (:goal (and " + " ".join(_lit(l) for l in p.goal) + "))")
    out.append(")")
    return "\n".join(out) + "\n"


# -- propositional emission ---------------------------------------------

def pddl_names(names: Sequence[Name]) -> list[str]:
    """Injective, deterministic mapping of structured names to identifiers."""
    out: list[str] = []
    used: set[str] = set()
    for n in names:
        base = _BAD.sub("_", "_".join(n).lower()) or "x"
        if not base[0].isalpha():
            base = "f_" + base
        cand, k = base, 2
        while cand in used:
            cand, k = f"{base}_{k}", k + 1
        used.add(cand)
        out.append(cand)
    return out


def _set(ls: LiteralSet, fn: list[str]) -> list[str]:
    lits = [(f, f"({fn[f]})") for f in bits(ls.pos)] + [(f, f"(not ({fn[f]}))") for f in bits(ls.neg)]
    return [s for _, s in sorted(lits, key=lambda x: (fn[x[0]], x[1]))]


def _and(parts: list[str]) -> str:
    return "(and " + " ".join(parts) + ")" if parts else "(and)"


def _action_text(a: GroundAction, name: str, fn: list[str]) -> str:
    effs = []
    for ce in a.effects:
        e = _set(ce.effect, fn)
        if not ce.condition:
            effs.extend(e)
        else:
            effs.append(f"(when {_and(_set(ce.condition, fn))} {_and(e)})")
    return (f"  (:action {name}\n    :parameters ()\n    :precondition {_and(_set(a.pre, fn))}\n"
            f"    :effect {_and(effs)})")


def emit(p: Problem, name: str = "hfsc") -> tuple[str, str]:
    """Propositional domain and problem text for ``p``; byte-deterministic."""
    fn = pddl_names(p.fluents)
    an = pddl_names([a.name for a in p.actions])
    derived_ids = {d.fluent for d in p.derived}
    reqs = EMIT_REQUIREMENTS + ((":derived-predicates",) if p.derived else ())
    dom = [f"(define (domain {name})", "  (:requirements " + " ".join(reqs) + ")", "  (:predicates"]
    dom.extend(f"    ({n})" for f, n in sorted(enumerate(fn), key=lambda x: x[1]) if f not in derived_ids)
    dom.append("  )")
    for d in sorted(p.derived, key=lambda d: fn[d.fluent]):
        pairs = " ".join(f"(and ({fn[a]}) ({fn[b]}))" for a, b in d.pairs)
        dom.append(f"  (:derived ({fn[d.fluent]}) (or {pairs}))")
    for i in sorted(range(len(p.actions)), key=lambda i: an[i]):
        dom.append(_action_text(p.actions[i], an[i], fn))
    dom.append(")")

    init = sorted(fn[f] for f in bits(p.init) if f not in derived_ids)
    goal = _set(p.goal, fn)
    prob = [f"(define (problem {name}-problem)", f"  (:domain {name})"]
    if not goal:
        # a single trivially-true conjunct keeps the goal clause non-empty
        prob.append("  (:objects hfsc-unit)")
        goal = ["(= hfsc-unit hfsc-unit)"]
    prob.append("  (:init")
    prob.extend(f"    ({n})" for n in init)
    prob.append("  )")
    prob.append(f"  (:goal {_and(goal)})")
    prob.append(")")
    return "\n".join(dom) + "\n", "\n".join(prob) + "\n"


def parse_plan(text: str) -> list[str]:
    """Action names from a plan file: one ``(name args...)`` per line, ``;`` comments."""
    steps = []
    for raw in text.splitlines():
        line = raw.split(";", 1)[0].strip()
        if not line:
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise ValueError(f"malformed plan line: {raw!r}")
        steps.append("_".join(line[1:-1].lower().split()))
    return steps


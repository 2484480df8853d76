"""Reader for a typed STRIPS dialect with negative preconditions and
conditional (optionally universally quantified) effects."""

from __future__ import annotations

import re

from .ast import (ActionSchema, Atom, DerivedRule, DomainAst, Effect, ExistsPair, Forall, Lit,
                  PairDisjunction, PredicateSchema, ProblemAst, TypedVar, When)

SUPPORTED_REQUIREMENTS = frozenset({
    ":strips", ":typing", ":negative-preconditions", ":conditional-effects", ":equality",
    ":derived-predicates",
})

_UNSUPPORTED_CONNECTIVES = {
    "or": ":disjunctive-preconditions",
    "imply": ":disjunctive-preconditions",
    "exists": ":existential-preconditions",
    "forall": ":universal-preconditions",
}


class PDDLError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(message + where)


class PDDLSyntaxError(PDDLError):
    pass


class UnsupportedRequirement(PDDLError):
    def __init__(self, flag: str, line: int | None = None, col: int | None = None):
        self.flag = flag
        super().__init__(f"unsupported requirement {flag}", line, col)


class Tok(str):
    line: int
    col: int


class SList(list):
    line: int
    col: int


_TOKEN = re.compile(r"(?P<ws>\s+)|(?P<comment>;[^\n]*)|(?P<open>\()|(?P<close>\))|(?P<atom>[^\s()]+)")


def read_sexp(text: str) -> SList:
    """Read exactly one top-level s-expression; atoms are lower-cased."""
    stack: list[SList] = []
    result: SList | None = None
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        col = m.start() - line_start + 1
        if kind in ("ws", "comment"):
            chunk = m.group()
            n = chunk.count("\n")
            if n:
                line += n
                line_start = m.start() + chunk.rindex("\n") + 1
            continue
        if result is not None:
            raise PDDLSyntaxError("trailing input after expression", line, col)
        if kind == "open":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif kind == "close":
            if not stack:
                raise PDDLSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                result = done
        else:
            tok = Tok(m.group().lower())
            tok.line, tok.col = line, col
            if not stack:
                raise PDDLSyntaxError(f"unexpected token {tok!r}", line, col)
            stack[-1].append(tok)
    if stack:
        raise PDDLSyntaxError("unexpected end of input (missing ')')", stack[-1].line, stack[-1].col)
    if result is None:
        raise PDDLSyntaxError("empty input", 1, 1)
    return result


def _pos(x) -> tuple[int | None, int | None]:
    return getattr(x, "line", None), getattr(x, "col", None)


def _err(msg: str, x) -> PDDLSyntaxError:
    return PDDLSyntaxError(msg, *_pos(x))


def _expect_list(x, what: str) -> SList:
    if not isinstance(x, list):
        raise _err(f"expected {what}", x)
    return x


def _expect_atom(x, what: str) -> Tok:
    if isinstance(x, list):
        raise _err(f"expected {what}", x)
    return x


def _typed_list(items, *, variables: bool) -> list[tuple[str, str, Tok]]:
    out: list[tuple[str, str, Tok]] = []
    pending: list[Tok] = []
    i = 0
    while i < len(items):
        tok = _expect_atom(items[i], "name")
        if tok == "-":
            if i + 1 >= len(items) or not pending:
                raise _err("dangling '-' in typed list", tok)
            t = _expect_atom(items[i + 1], "type name")
            out.extend((p, str(t), p) for p in pending)
            pending = []
            i += 2
            continue
        if variables and not tok.startswith("?"):
            raise _err(f"expected variable, got {tok!r}", tok)
        pending.append(tok)
        i += 1
    out.extend((p, "object", p) for p in pending)
    return out


def _atom(x, *, allow_eq: bool = True) -> Atom:
    lst = _expect_list(x, "atom")
    if not lst:
        raise _err("empty atom", lst)
    head = _expect_atom(lst[0], "predicate name")
    if head == "=" and not allow_eq:
        raise _err("equality not allowed here", head)
    return Atom(str(head), tuple(str(_expect_atom(a, "term")) for a in lst[1:]))


def _literal(x) -> Lit:
    lst = _expect_list(x, "literal")
    if lst and lst[0] == "not":
        if len(lst) != 2:
            raise _err("'not' takes one argument", lst)
        return Lit(_atom(lst[1]), False)
    if lst and lst[0] in _UNSUPPORTED_CONNECTIVES:
        raise UnsupportedRequirement(_UNSUPPORTED_CONNECTIVES[lst[0]], *_pos(lst))
    return Lit(_atom(lst), True)


def _conjunction(x) -> list[Lit]:
    lst = _expect_list(x, "formula")
    if not lst:
        return []
    if lst[0] == "and":
        out: list[Lit] = []
        for part in lst[1:]:
            out.extend(_conjunction(part))
        return out
    if lst[0] == "not" and len(lst) == 2 and isinstance(lst[1], list) and lst[1] and lst[1][0] in _UNSUPPORTED_CONNECTIVES:
        raise UnsupportedRequirement(_UNSUPPORTED_CONNECTIVES[lst[1][0]], *_pos(lst))
    return [_literal(lst)]


def _effect(x) -> list[Effect]:
    lst = _expect_list(x, "effect")
    if not lst:
        return []
    head = lst[0]
    if head == "and":
        out: list[Effect] = []
        for part in lst[1:]:
            out.extend(_effect(part))
        return out
    if head == "when":
        if len(lst) != 3:
            raise _err("'when' takes a condition and an effect", lst)
        effects = _conjunction(lst[2])
        if any(e.atom.predicate == "=" for e in effects):
            raise _err("equality cannot be an effect", lst)
        return [When(tuple(_conjunction(lst[1])), tuple(effects))]
    if head == "forall":
        if len(lst) != 3:
            raise _err("'forall' takes a variable list and an effect", lst)
        params = tuple(TypedVar(n, t) for n, t, _ in _typed_list(_expect_list(lst[1], "variable list"), variables=True))
        return [Forall(params, tuple(_effect(lst[2])))]
    lit = _literal(lst)
    if lit.atom.predicate == "=":
        raise _err("equality cannot be an effect", lst)
    return [lit]


def _sections(lst: SList, start: int) -> list[SList]:
    out = []
    for sec in lst[start:]:
        sec = _expect_list(sec, "section")
        if not sec or not isinstance(sec[0], str) or not sec[0].startswith(":"):
            raise _err("expected a ':section'", sec)
        out.append(sec)
    return out


def _header(top: SList, kind: str) -> str:
    if len(top) < 2 or top[0] != "define":
        raise _err("expected (define ...)", top)
    head = _expect_list(top[1], f"({kind} name)")
    if len(head) != 2 or head[0] != kind:
        raise _err(f"expected ({kind} name)", head)
    return str(_expect_atom(head[1], f"{kind} name"))


def _derived(sec: SList) -> DerivedRule:
    if len(sec) != 3:
        raise _err("(:derived head body) expected", sec)
    head = _expect_list(sec[1], "derived head")
    name = str(_expect_atom(head[0], "predicate name"))
    params = tuple(TypedVar(n, t) for n, t, _ in _typed_list(head[1:], variables=True))
    body = _expect_list(sec[2], "derived body")
    if body and body[0] == "exists":
        if len(body) != 3:
            raise _err("malformed exists", body)
        (var,) = [TypedVar(n, t) for n, t, _ in _typed_list(_expect_list(body[1], "variable list"), variables=True)] or [None]
        conj = _conjunction(body[2])
        if var is None or len(conj) != 2 or not all(c.positive for c in conj):
            raise UnsupportedRequirement(":derived-predicates (only equal-value rules)", *_pos(body))
        return DerivedRule(name, params, ExistsPair(var, conj[0].atom, conj[1].atom))
    if body and body[0] == "or":
        pairs = []
        for d in body[1:]:
            conj = _conjunction(d)
            if len(conj) != 2 or not all(c.positive for c in conj):
                raise UnsupportedRequirement(":derived-predicates (only pairwise disjunctions)", *_pos(d))
            pairs.append((conj[0].atom, conj[1].atom))
        return DerivedRule(name, params, PairDisjunction(tuple(pairs)))
    raise UnsupportedRequirement(":derived-predicates (only equal-value rules)", *_pos(body))


def parse_domain(text: str) -> DomainAst:
    top = read_sexp(text)
    name = _header(top, "domain")
    requirements: list[str] = []
    types: list[tuple[str, str]] = []
    predicates: list[PredicateSchema] = []
    derived: list[DerivedRule] = []
    actions: list[ActionSchema] = []
    for sec in _sections(top, 2):
        key = sec[0]
        if key == ":requirements":
            for flag in sec[1:]:
                flag = _expect_atom(flag, "requirement flag")
                if flag not in SUPPORTED_REQUIREMENTS:
                    raise UnsupportedRequirement(str(flag), *_pos(flag))
                requirements.append(str(flag))
        elif key == ":types":
            types.extend((n, t) for n, t, _ in _typed_list(sec[1:], variables=False))
        elif key == ":predicates":
            for p in sec[1:]:
                p = _expect_list(p, "predicate schema")
                pname = str(_expect_atom(p[0], "predicate name"))
                predicates.append(PredicateSchema(pname, tuple(TypedVar(n, t) for n, t, _ in _typed_list(p[1:], variables=True))))
        elif key == ":derived":
            derived.append(_derived(sec))
        elif key == ":action":
            actions.append(_action(sec))
        elif key == ":constants":
            raise UnsupportedRequirement(":constants", *_pos(sec))
        else:
            raise _err(f"unknown section {key}", sec)
    dom = DomainAst(name, tuple(requirements), tuple(types), tuple(predicates), tuple(derived), tuple(actions))
    _check_domain(dom)
    return dom


def _action(sec: SList) -> ActionSchema:
    if len(sec) < 2:
        raise _err("action needs a name", sec)
    name = str(_expect_atom(sec[1], "action name"))
    params: tuple[TypedVar, ...] = ()
    pre: list[Lit] = []
    eff: list[Effect] = []
    i = 2
    while i < len(sec):
        key = _expect_atom(sec[i], "action keyword")
        if i + 1 >= len(sec):
            raise _err(f"missing value for {key}", key)
        val = sec[i + 1]
        if key == ":parameters":
            params = tuple(TypedVar(n, t) for n, t, _ in _typed_list(_expect_list(val, "parameter list"), variables=True))
        elif key == ":precondition":
            pre = _conjunction(val)
        elif key == ":effect":
            eff = _effect(val)
        else:
            raise _err(f"unknown action keyword {key}", key)
        i += 2
    return ActionSchema(name, params, tuple(pre), tuple(eff))


def _check_domain(d: DomainAst) -> None:
    known_types = {"object"} | {t for t, _ in d.types}
    for t, parent in d.types:
        if parent not in known_types:
            raise PDDLError(f"type {t!r} has undeclared parent {parent!r}")
    parents = d.type_parents()
    for t in known_types:
        seen = set()
        while t:
            if t in seen:
                raise PDDLError(f"cyclic type hierarchy at {t!r}")
            seen.add(t)
            t = parents.get(t, "")
    arity: dict[str, tuple[TypedVar, ...]] = {}
    for p in list(d.predicates) + [PredicateSchema(r.name, r.params) for r in d.derived]:
        if p.name in arity:
            raise PDDLError(f"predicate {p.name!r} declared twice")
        for v in p.params:
            if v.type not in known_types:
                raise PDDLError(f"predicate {p.name!r} uses undeclared type {v.type!r}")
        arity[p.name] = p.params
    derived_names = {r.name for r in d.derived}

    def check_atom(a: Atom, bound: set[str], where: str, *, allow_derived: bool = False) -> None:
        if a.predicate == "=":
            if len(a.args) != 2:
                raise PDDLError(f"{where}: '=' takes two terms")
        elif a.predicate not in arity:
            raise PDDLError(f"{where}: undeclared predicate {a.predicate!r}")
        elif len(arity[a.predicate]) != len(a.args):
            raise PDDLError(f"{where}: {a.predicate!r} expects {len(arity[a.predicate])} arguments")
        elif a.predicate in derived_names and not allow_derived:
            raise PDDLError(f"{where}: derived predicate {a.predicate!r} may only be used as a condition fluent")
        for t in a.args:
            if t.startswith("?") and t not in bound:
                raise PDDLError(f"{where}: unbound variable {t}")
            if not t.startswith("?"):
                raise PDDLError(f"{where}: constants are not supported ({t})")

    def check_effect(e: Effect, bound: set[str], where: str) -> None:
        if isinstance(e, Lit):
            check_atom(e.atom, bound, where)
        elif isinstance(e, When):
            for c in e.condition:
                check_atom(c.atom, bound, where)
            for x in e.effects:
                check_atom(x.atom, bound, where)
        else:
            inner = set(bound)
            for v in e.params:
                if v.type not in known_types:
                    raise PDDLError(f"{where}: undeclared type {v.type!r}")
                inner.add(v.name)
            for x in e.body:
                check_effect(x, inner, where)

    for r in d.derived:
        bound = {v.name for v in r.params}
        where = f"derived {r.name}"
        if isinstance(r.body, ExistsPair):
            if r.body.var.type not in known_types:
                raise PDDLError(f"{where}: undeclared type {r.body.var.type!r}")
            inner = bound | {r.body.var.name}
            for a in (r.body.first, r.body.second):
                check_atom(a, inner, where)
        else:
            for a, b in r.body.pairs:
                check_atom(a, bound, where)
                check_atom(b, bound, where)
    for act in d.actions:
        bound = set()
        for v in act.params:
            if v.type not in known_types:
                raise PDDLError(f"action {act.name}: undeclared type {v.type!r}")
            bound.add(v.name)
        for lit in act.precondition:
            check_atom(lit.atom, bound, f"action {act.name}")
        for e in act.effect:
            check_effect(e, bound, f"action {act.name}")


def parse_problem(text: str, domain: DomainAst | None = None) -> ProblemAst:
    top = read_sexp(text)
    name = _header(top, "problem")
    dom_name = ""
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: list[Lit] = []
    for sec in _sections(top, 2):
        key = sec[0]
        if key == ":domain":
            dom_name = str(_expect_atom(sec[1], "domain name"))
        elif key == ":objects":
            for n, t, tok in _typed_list(sec[1:], variables=False):
                objects.append((n, t))
        elif key == ":init":
            for a in sec[1:]:
                atom = _atom(a, allow_eq=False)
                if any(x.startswith("?") for x in atom.args):
                    raise _err("init atoms must be ground", a)
                init.append(atom)
        elif key == ":goal":
            if len(sec) != 2:
                raise _err("(:goal formula) expected", sec)
            goal = _conjunction(sec[1])
        else:
            raise _err(f"unknown section {key}", sec)
    prob = ProblemAst(name, dom_name, tuple(objects), tuple(init), tuple(goal))
    if domain is not None:
        check_problem(domain, prob)
    return prob


def check_problem(d: DomainAst, p: ProblemAst) -> None:
    if p.domain and p.domain != d.name:
        raise PDDLError(f"problem refers to domain {p.domain!r}, not {d.name!r}")
    parents = d.type_parents()
    objs: dict[str, str] = {}
    for o, t in p.objects:
        if t not in parents:
            raise PDDLError(f"object {o!r} has undeclared type {t!r}")
        if o in objs and objs[o] != t:
            raise PDDLError(f"object {o!r} declared with two types")
        objs[o] = t

    def is_a(t: str, want: str) -> bool:
        while t:
            if t == want:
                return True
            t = parents.get(t, "")
        return False

    def check(a: Atom, where: str) -> None:
        for x in a.args:
            if x not in objs:
                raise PDDLError(f"{where}: undeclared object {x!r}")
        if a.predicate == "=":
            return
        schema = d.predicate(a.predicate)
        if schema is None:
            raise PDDLError(f"{where}: undeclared predicate {a.predicate!r}")
        if len(schema.params) != len(a.args):
            raise PDDLError(f"{where}: {a.predicate!r} expects {len(schema.params)} arguments")
        for x, v in zip(a.args, schema.params):
            if not is_a(objs[x], v.type):
                raise PDDLError(f"{where}: object {x!r} is not of type {v.type!r}")

    for a in p.init:
        check(a, "init")
    for lit in p.goal:
        check(lit.atom, "goal")

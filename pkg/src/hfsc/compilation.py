"""Compile generalized planning problems into classical problems whose plans
program a (hierarchical) controller and simulate it on every instance.

Fluent and action names are tuples whose first element is the role, e.g.
``("pcond", "q0", "c1", "l0", "at", "x")``. Flat compilations omit the
controller and level tokens.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Sequence

from .decode import DecodingKey, KeyEntry
from .fsc import Call, Controller, Hierarchy, HierarchyError, Primitive
from .model import (EMPTY, ConditionalEffect, EqualityDerived, GeneralizedProblem, GroundAction,
                    LiteralSet, Name, Plan, Problem, bits)
from .pddl.emit import pddl_names


class CompileError(ValueError):
    pass


class MissingAssignmentFluents(CompileError):
    pass


class PriorConflict(CompileError):
    pass


@dataclass(frozen=True)
class SynthesisParams:
    n: int
    m: int = 1
    ell: int = 0
    params: tuple[tuple[str, ...], ...] | None = None
    priors: Hierarchy | None = None
    # only offer branch conditions on fluents some action can change
    dynamic_conditions: bool = False

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.ell < 0:
            raise ValueError("need n >= 1, m >= 1 and stack bound >= 0")
        if self.params is None:
            object.__setattr__(self, "params", tuple(() for _ in range(self.m)))
        else:
            object.__setattr__(self, "params", tuple(tuple(p) for p in self.params))
        if len(self.params) != self.m:
            raise ValueError("one parameter list per controller is required")


@dataclass
class CompiledProblem:
    problem: Problem
    key: DecodingKey
    params: SynthesisParams
    no_fluent_mask: int = 0
    _by_name: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_name = {n: i for i, n in enumerate(self.key.action_names)}

    def plan_names(self, plan: Plan) -> list[str]:
        return [self.key.action_names[i] for i in plan.steps]

    def plan_from_names(self, names: Sequence[str]) -> Plan:
        try:
            return Plan(tuple(self._by_name[n] for n in names))
        except KeyError as e:
            raise CompileError(f"unknown compiled action {e.args[0]!r}") from None

    def names_to_actions(self, names: Sequence[str]) -> list[Name]:
        return [self.problem.actions[i].name for i in self.plan_from_names(names).steps]

    def role_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.key.entries.values():
            out[e.role] = out.get(e.role, 0) + 1
        return out


def _qt(q: int) -> str:
    return f"q{q}"


def _bt(b: int) -> str:
    return f"b{b}"


class _Compiler:
    def __init__(self, gp: GeneralizedProblem, n: int, m: int, ell: int,
                 params: Sequence[tuple[str, ...]], hierarchical: bool, dynamic_conditions: bool = False):
        if not gp.instances:
            raise CompileError("generalized problem has no instances")
        self.gp, self.n, self.m, self.ell, self.hier = gp, n, m, ell, hierarchical
        self.params = [tuple(p) for p in params]
        self.Q = range(n + 1)
        self.Qx = range(n)  # executable (non-terminal) states
        self.levels = range(ell + 1)
        self.ctrls = range(m)
        self.T = len(gp.instances)
        self.fluents: list[Name] = []
        self.index: dict[Name, int] = {}
        self.actions: list[GroundAction] = []
        self.entries: list[KeyEntry] = []
        self.no_mask = 0

        self.derived = {d.fluent: d for d in gp.derived}
        for d in gp.instances:
            for lit_mask in (d.goal.pos, d.goal.neg):
                if any(f in self.derived for f in bits(lit_mask)):
                    raise CompileError("goals over derived fluents are not supported")
        self.assign_ids = set()
        if hierarchical:
            for v in gp.variables:
                for x in gp.values:
                    if (gp.assign_predicate, v, x) not in self._orig_index:
                        raise MissingAssignmentFluents(f"missing {gp.assign_predicate}({v}, {x})")
            vs = set(gp.variables)
            self.assign_ids = {f for f, nm in enumerate(gp.fluents)
                               if len(nm) == 3 and nm[0] == gp.assign_predicate and nm[1] in vs}
            for i, ps in enumerate(self.params):
                for v in ps:
                    if v not in vs:
                        raise CompileError(f"parameter {v!r} of C{i + 1} is not a variable object")
        self._build_fluents()
        self.branchable = set(range(len(gp.fluents)))
        if dynamic_conditions:
            self.branchable = changing_fluents(gp) | set(self.derived)

    @property
    def _orig_index(self) -> dict[Name, int]:
        if not hasattr(self, "_oi"):
            self._oi = {nm: i for i, nm in enumerate(self.gp.fluents)}
        return self._oi

    # -- naming -----------------------------------------------------------
    def c(self, i: int) -> tuple[str, ...]:
        return (f"c{i + 1}",) if self.hier else ()

    def lv(self, l: int) -> tuple[str, ...]:
        return (f"l{l}",) if self.hier else ()

    def add_fluent(self, name: Name) -> int:
        if name in self.index:
            raise CompileError(f"duplicate compiled fluent {name}")
        self.index[name] = len(self.fluents)
        self.fluents.append(name)
        return self.index[name]

    def fid(self, *name: str) -> int:
        return self.index[tuple(name)]

    # -- fluents ----------------------------------------------------------
    def _build_fluents(self) -> None:
        gp = self.gp
        self.lmap: list[list[int | None]] = [[None] * len(gp.fluents) for _ in self.levels]
        for f, nm in enumerate(gp.fluents):
            if f in self.derived or f in self.assign_ids:
                continue
            fid = self.add_fluent(nm)
            for l in self.levels:
                self.lmap[l][f] = fid
        for l in self.levels:
            for f in sorted(self.assign_ids):
                self.lmap[l][f] = self.add_fluent((*gp.fluents[f], f"l{l}"))
        self.world_ids = [fid for fid in self.lmap[0] if fid is not None]

        no = []
        for i in self.ctrls:
            c = self.c(i)
            for q in self.Q:
                for f in gp.fluents:
                    self.add_fluent(("cond", *c, _qt(q), *f))
            for q in self.Q:
                for q2 in self.Q:
                    for b in (0, 1):
                        self.add_fluent(("succ", *c, _qt(q), _qt(q2), _bt(b)))
            for q in self.Q:
                for b in (0, 1):
                    for a in gp.actions:
                        self.add_fluent(("act", *c, _qt(q), _bt(b), *a.name))
            for q in self.Q:
                no.append(self.add_fluent(("nocond", *c, _qt(q))))
                for b in (0, 1):
                    no.append(self.add_fluent(("noact", *c, _qt(q), _bt(b))))
                    no.append(self.add_fluent(("nosucc", *c, _qt(q), _bt(b))))
        for l in self.levels:
            lv = self.lv(l)
            for q in self.Q:
                self.add_fluent(("cs", *lv, _qt(q)))
            for aux in ("evl", "app", "o0", "o1"):
                self.add_fluent((aux, *lv))
        if self.hier:
            for l in self.levels:
                self.add_fluent(("lvl", f"l{l}"))
            for i in self.ctrls:
                for l in self.levels:
                    self.add_fluent(("fsc", f"c{i + 1}", f"l{l}"))
            for i in self.ctrls:
                for q in self.Q:
                    for b in (0, 1):
                        for j, p in self.call_targets():
                            self.add_fluent(("call", f"c{i + 1}", _qt(q), _bt(b), f"c{j + 1}", *p))
        if self.T > 1:
            for t in range(self.T):
                self.add_fluent(("inst", f"t{t + 1}"))
        self.no_mask = sum(1 << f for f in no)

    def call_targets(self) -> list[tuple[int, tuple[str, ...]]]:
        out = []
        for j in self.ctrls:
            for p in product(self.gp.variables, repeat=len(self.params[j])):
                out.append((j, p))
        return out

    # -- literal helpers --------------------------------------------------
    def lits(self, pos: Sequence[int] = (), neg: Sequence[int] = ()) -> LiteralSet:
        return LiteralSet.of(pos, neg)

    def at_level(self, ls: LiteralSet, l: int) -> LiteralSet:
        m = self.lmap[l]
        pos = neg = 0
        for f in bits(ls.pos):
            pos |= 1 << m[f]
        for f in bits(ls.neg):
            neg |= 1 << m[f]
        return LiteralSet(pos, neg)

    def ctx(self, i: int, l: int, q: int) -> list[int]:
        """Common precondition fluents: current level, controller and state."""
        out = [self.fid("cs", *self.lv(l), _qt(q))]
        if self.hier:
            out += [self.fid("lvl", f"l{l}"), self.fid("fsc", f"c{i + 1}", f"l{l}")]
        return out

    def add_action(self, name: Name, pre: LiteralSet, effects: Sequence[ConditionalEffect], entry: KeyEntry) -> None:
        self.actions.append(GroundAction(name, pre, tuple(effects)))
        self.entries.append(entry)

    # -- actions ----------------------------------------------------------
    def build(self) -> None:
        for i in self.ctrls:
            for l in self.levels:
                self.controller_level(i, l)
        if self.hier:
            for i in self.ctrls:
                for l in self.levels:
                    if l > 0:
                        self.term(i, l)
        for t in range(self.T - 1):
            self.end(t)

    def controller_level(self, i: int, l: int) -> None:
        gp = self.gp
        c, lv, tag = self.c(i), self.lv(l), self.c(i) + self.lv(l)
        evl, app = self.fid("evl", *lv), self.fid("app", *lv)
        o = (self.fid("o0", *lv), self.fid("o1", *lv))
        for q in self.Q:
            qt = _qt(q)
            nocond = self.fid("nocond", *c, qt)
            for f, fname in enumerate(gp.fluents):
                cond = self.fid("cond", *c, qt, *fname)
                if f in self.branchable:
                    self.add_action(("pcond", qt, *tag, *fname),
                                    self.lits(self.ctx(i, l, q) + [nocond]),
                                    [ConditionalEffect(EMPTY, self.lits([cond], [nocond]))],
                                    KeyEntry("pcond", q=q, i=i, l=l, f=fname))
                if q in self.Qx:
                    self.add_action(("econd", qt, *tag, *fname),
                                    self.lits(self.ctx(i, l, q) + [cond], [evl]),
                                    self.evaluate(f, l, evl, o),
                                    KeyEntry("econd", q=q, i=i, l=l, f=fname))
            for b in (0, 1):
                bt = _bt(b)
                noact = self.fid("noact", *c, qt, bt)
                nosucc = self.fid("nosucc", *c, qt, bt)
                base = self.ctx(i, l, q) + [evl, o[b]]
                for a in gp.actions:
                    act = self.fid("act", *c, qt, bt, *a.name)
                    pre_a = self.at_level(a.pre, l)
                    self.add_action(("pact", qt, bt, *tag, *a.name),
                                    pre_a.union(self.lits(base + [noact])),
                                    [ConditionalEffect(EMPTY, self.lits([act], [noact]))],
                                    KeyEntry("pact", q=q, b=b, i=i, l=l, a=a.name))
                    if q in self.Qx:
                        self.add_action(("eact", qt, bt, *tag, *a.name),
                                        pre_a.union(self.lits(base + [act], [app])),
                                        self.apply_effects(a, l, app),
                                        KeyEntry("eact", q=q, b=b, i=i, l=l, a=a.name))
                for q2 in self.Q:
                    q2t = _qt(q2)
                    succ = self.fid("succ", *c, qt, q2t, bt)
                    self.add_action(("psucc", qt, q2t, bt, *tag),
                                    self.lits(base + [app, nosucc]),
                                    [ConditionalEffect(EMPTY, self.lits([succ], [nosucc]))],
                                    KeyEntry("psucc", q=q, b=b, q2=q2, i=i, l=l))
                    if q in self.Qx:
                        cs, cs2 = self.fid("cs", *lv, qt), self.fid("cs", *lv, q2t)
                        dels = [evl, o[b], app] + ([cs] if q2 != q else [])
                        self.add_action(("esucc", qt, q2t, bt, *tag),
                                        self.lits(base + [app, succ]),
                                        [ConditionalEffect(EMPTY, self.lits([cs2], dels))],
                                        KeyEntry("esucc", q=q, b=b, q2=q2, i=i, l=l))
                if self.hier and l < self.ell:
                    for j, p in self.call_targets():
                        call = self.fid("call", f"c{i + 1}", qt, bt, f"c{j + 1}", *p)
                        self.add_action(("pcall", qt, bt, f"c{j + 1}", *tag, *p),
                                        self.lits(base + [noact]),
                                        [ConditionalEffect(EMPTY, self.lits([call], [noact]))],
                                        KeyEntry("pcall", q=q, b=b, i=i, j=j, l=l, p=p))
                        if q in self.Qx:
                            self.add_action(("ecall", qt, bt, f"c{j + 1}", *tag, *p),
                                            self.lits(base + [call], [app]),
                                            self.call_effects(j, p, l, app),
                                            KeyEntry("ecall", q=q, b=b, i=i, j=j, l=l, p=p))

    def evaluate(self, f: int, l: int, evl: int, o: tuple[int, int]) -> list[ConditionalEffect]:
        effs = [ConditionalEffect(EMPTY, self.lits([evl]))]
        d = self.derived.get(f)
        if d is None:
            g = self.lmap[l][f]
            effs.append(ConditionalEffect(self.lits([], [g]), self.lits([o[0]])))
            effs.append(ConditionalEffect(self.lits([g]), self.lits([o[1]])))
            return effs
        effs.extend(self.evaluate_derived(d, l, o))
        return effs

    def evaluate_derived(self, d: EqualityDerived, l: int, o: tuple[int, int]) -> list[ConditionalEffect]:
        """Branch outcome of ``OR_k (a_k AND b_k)`` as conditional effects.

        When the first members are ``assign(v, x)`` for one variable ``v`` at
        most one of them holds, so one effect per pair plus an "unassigned"
        effect is exact. Otherwise every assignment of the involved fluents
        gets its own effect."""
        m = self.lmap[l]
        pairs = [(m[a], m[b]) for a, b in d.pairs]
        out = []
        if self._exclusive(d):
            for a, b in pairs:
                out.append(ConditionalEffect(self.lits([a, b]), self.lits([o[1]])))
                if a != b:
                    out.append(ConditionalEffect(self.lits([a], [b]), self.lits([o[0]])))
            out.append(ConditionalEffect(self.lits([], [a for a, _ in pairs]), self.lits([o[0]])))
            return out
        involved = sorted({f for pr in pairs for f in pr})
        if len(involved) > 12:
            raise CompileError("derived condition too large to expand")
        for combo in product((0, 1), repeat=len(involved)):
            val = dict(zip(involved, combo))
            on = [f for f in involved if val[f]]
            off = [f for f in involved if not val[f]]
            holds = any(val[a] and val[b] for a, b in pairs)
            out.append(ConditionalEffect(self.lits(on, off), self.lits([o[int(holds)]])))
        return out

    def _exclusive(self, d: EqualityDerived) -> bool:
        gp = self.gp
        firsts = [gp.fluents[a] for a, _ in d.pairs]
        return (all(len(nm) == 3 and nm[0] == gp.assign_predicate for nm in firsts)
                and len({nm[1] for nm in firsts}) == 1)

    def apply_effects(self, a: GroundAction, l: int, app: int) -> list[ConditionalEffect]:
        out = []
        merged = False
        for ce in a.effects:
            cond, eff = self.at_level(ce.condition, l), self.at_level(ce.effect, l)
            if not ce.condition and not merged:
                eff = eff.union(self.lits([app]))
                merged = True
            out.append(ConditionalEffect(cond, eff))
        if not merged:
            out.insert(0, ConditionalEffect(EMPTY, self.lits([app])))
        return out

    def call_effects(self, j: int, p: tuple[str, ...], l: int, app: int) -> list[ConditionalEffect]:
        gp = self.gp
        uncond = self.lits([self.fid("lvl", f"l{l + 1}"), self.fid("cs", f"l{l + 1}", _qt(0)),
                            self.fid("fsc", f"c{j + 1}", f"l{l + 1}"), app],
                           [self.fid("lvl", f"l{l}")])
        out = [ConditionalEffect(EMPTY, uncond)]
        oi = self._orig_index
        for arg, par in zip(p, self.params[j]):
            for x in gp.values:
                src = self.lmap[l][oi[(gp.assign_predicate, arg, x)]]
                dst = self.lmap[l + 1][oi[(gp.assign_predicate, par, x)]]
                out.append(ConditionalEffect(self.lits([src]), self.lits([dst])))
        return out

    def term(self, i: int, l: int) -> None:
        clear = [self.lmap[l][f] for f in sorted(self.assign_ids)]
        eff = self.lits([self.fid("lvl", f"l{l - 1}")],
                        [self.fid("lvl", f"l{l}"), self.fid("fsc", f"c{i + 1}", f"l{l}"),
                         self.fid("cs", f"l{l}", _qt(self.n))] + clear)
        self.add_action(("term", f"c{i + 1}", f"l{l}"),
                        self.lits(self.ctx(i, l, self.n)),
                        [ConditionalEffect(EMPTY, eff)],
                        KeyEntry("term", i=i, l=l))

    def end(self, t: int) -> None:
        gp = self.gp
        lv = self.lv(0)
        cur, nxt = gp.instances[t], gp.instances[t + 1]
        inst_t, inst_n = self.fid("inst", f"t{t + 1}"), self.fid("inst", f"t{t + 2}")
        cs_n, cs_0 = self.fid("cs", *lv, _qt(self.n)), self.fid("cs", *lv, _qt(0))
        pre = self.at_level(cur.goal, 0).union(self.lits([cs_n, inst_t]))
        world_init = self.world_state(nxt.init)
        pos = [f for f in self.world_ids if world_init >> f & 1] + [cs_0, inst_n]
        neg = [f for f in self.world_ids if not world_init >> f & 1] + [cs_n, inst_t]
        self.add_action(("end", f"t{t + 1}"), pre, [ConditionalEffect(EMPTY, self.lits(pos, neg))],
                        KeyEntry("end", t=t))

    def world_state(self, s: int) -> int:
        out = 0
        m = self.lmap[0]
        for f in bits(s):
            if m[f] is not None:
                out |= 1 << m[f]
        return out

    # -- assembly ---------------------------------------------------------
    def problem(self) -> Problem:
        gp = self.gp
        first, last = gp.instances[0], gp.instances[-1]
        lv = self.lv(0)
        init = self.world_state(first.init) | self.no_mask | 1 << self.fid("cs", *lv, _qt(0))
        if self.hier:
            init |= 1 << self.fid("lvl", "l0") | 1 << self.fid("fsc", "c1", "l0")
        goal = self.at_level(last.goal, 0).union(self.lits([self.fid("cs", *lv, _qt(self.n))]))
        if self.T > 1:
            init |= 1 << self.fid("inst", "t1")
            goal = goal.union(self.lits([self.fid("inst", f"t{self.T}")]))
        return Problem(tuple(self.fluents), tuple(self.actions), init, goal)


def _assemble(c: _Compiler, sp: SynthesisParams) -> CompiledProblem:
    c.build()
    p = c.problem()
    names = pddl_names([a.name for a in p.actions])
    gp = c.gp
    key = DecodingKey(n=c.n, m=c.m, ell=c.ell, hierarchical=c.hier, params=tuple(c.params),
                      variables=tuple(gp.variables), values=tuple(gp.values),
                      assign_predicate=gp.assign_predicate, instances=c.T,
                      entries=dict(zip(names, c.entries)), action_names=names)
    cp = CompiledProblem(p, key, sp, c.no_mask)
    if sp.priors is not None:
        cp = inject_priors(cp, sp.priors)
    return cp


def compile_flat(gp: GeneralizedProblem, n: int, dynamic_conditions: bool = False) -> CompiledProblem:
    """Single-controller compilation with states q0..qn (qn terminal)."""
    sp = SynthesisParams(n, dynamic_conditions=dynamic_conditions)
    return _assemble(_Compiler(gp, n, 1, 0, ((),), hierarchical=False, dynamic_conditions=dynamic_conditions), sp)


def compile_hier(gp: GeneralizedProblem, params: SynthesisParams) -> CompiledProblem:
    """Hierarchical compilation with ``params.m`` controllers and stack levels
    0..``params.ell``; ``params.priors`` are injected when given."""
    c = _Compiler(gp, params.n, params.m, params.ell, params.params, hierarchical=True,
                  dynamic_conditions=params.dynamic_conditions)
    return _assemble(c, params)


def changing_fluents(gp: GeneralizedProblem) -> set[int]:
    """Fluents added or deleted by some action effect. The rest keep their
    initial value in every instance, so branching on them can only tell
    instances apart."""
    touched = 0
    for a in gp.actions:
        for ce in a.effects:
            touched |= ce.effect.pos | ce.effect.neg
    return set(bits(touched))


def inject_priors(cp: CompiledProblem, priors: Hierarchy) -> CompiledProblem:
    """Fix the table entries of ``priors`` in the initial state, so the
    matching program actions can never fire."""
    key = cp.key
    if priors.num_states != key.n + 1:
        raise PriorConflict(f"priors have {priors.num_states} states, compilation has {key.n + 1}")
    if len(priors.controllers) > key.m:
        raise PriorConflict("priors define more controllers than the compilation allows")
    try:
        priors.validate()
    except HierarchyError as e:
        raise PriorConflict(f"malformed priors: {e}") from None

    merged = key.empty_hierarchy()
    p = cp.problem
    init = p.init
    c_tok = (lambda i: (f"c{i + 1}",)) if key.hierarchical else (lambda i: ())

    def set_on(name: Name, no: Name) -> None:
        nonlocal init
        if name not in p.fluent_index:
            raise PriorConflict(f"prior references unknown table entry {name}")
        init |= 1 << p.fluent_index[name]
        init &= ~(1 << p.fluent_index[no])

    for i, pc in enumerate(priors.controllers):
        if not pc.gamma and not pc.phi:
            continue
        mc = merged.controllers[i]
        if tuple(pc.params) != tuple(key.params[i]):
            raise PriorConflict(f"C{i + 1}: prior parameters {pc.params} differ from {key.params[i]}")
        c = c_tok(i)
        for q, f in pc.gamma.items():
            if mc.gamma.get(q, tuple(f)) != tuple(f):
                raise PriorConflict(f"C{i + 1}: condition of q{q} already fixed differently")
            if q not in mc.gamma:
                mc.gamma[q] = tuple(f)
                set_on(("cond", *c, _qt(q), *f), ("nocond", *c, _qt(q)))
        for (q, b), ins in pc.phi.items():
            nxt = pc.lam[q, b]
            if (q, b) in mc.phi and (mc.phi[q, b] != ins or mc.lam[q, b] != nxt):
                raise PriorConflict(f"C{i + 1}: slot ({q}, {b}) already fixed differently")
            if (q, b) in mc.phi:
                continue
            mc.phi[q, b], mc.lam[q, b] = ins, nxt
            qt, bt = _qt(q), _bt(b)
            if isinstance(ins, Primitive):
                set_on(("act", *c, qt, bt, *ins.action), ("noact", *c, qt, bt))
            else:
                if not key.hierarchical:
                    raise PriorConflict("calls cannot be injected into a flat compilation")
                set_on(("call", *c, qt, bt, f"c{ins.callee + 1}", *ins.args), ("noact", *c, qt, bt))
            set_on(("succ", *c, qt, _qt(nxt), bt), ("nosucc", *c, qt, bt))

    problem = replace(p, init=init)
    new_key = copy.copy(key)
    new_key.priors = merged
    return CompiledProblem(problem, new_key, cp.params, cp.no_fluent_mask)


# -- closed-form sizes (used as an independent check on the generators) -------

def flat_sizes(num_fluents: int, num_actions: int, n: int, instances: int = 1,
               num_derived: int = 0) -> tuple[int, int]:
    """(fluent count, action count) of ``compile_flat``. ``num_fluents``
    includes derived fluents, which become condition candidates only."""
    Q, Qx, F, A = n + 1, n, num_fluents, num_actions
    fl = (F - num_derived) + Q * F + 2 * Q * Q + 2 * Q * A + 5 * Q + Q + 4
    if instances > 1:
        fl += instances
    acts = Q * F + Qx * F + 2 * Q * A + 2 * Qx * A + 2 * Q * Q + 2 * Qx * Q + (instances - 1)
    return fl, acts


def hier_sizes(num_fluents: int, num_assign: int, num_actions: int, n: int, m: int, ell: int,
               num_variables: int, param_lengths: Sequence[int], instances: int = 1,
               num_derived: int = 0) -> tuple[int, int]:
    Q, Qx, F, A, L = n + 1, n, num_fluents, num_actions, ell + 1
    targets = sum(num_variables ** k for k in param_lengths)
    fl = (F - num_derived - num_assign) + L * num_assign
    fl += m * (Q * F + 2 * Q * Q + 2 * Q * A + 5 * Q)
    fl += L * (Q + 4) + L + m * L + m * Q * 2 * targets
    if instances > 1:
        fl += instances
    per = Q * F + Qx * F + 2 * Q * A + 2 * Qx * A + 2 * Q * Q + 2 * Qx * Q
    acts = m * L * per + m * ell * (2 * Q + 2 * Qx) * targets + m * ell + (instances - 1)
    return fl, acts

"""Grounded classical planning with conditional effects.

States are Python integers used as bit-vectors over dense fluent ids: bit ``f``
is set iff fluent ``f`` is true. Every state is therefore a total assignment.
Literal sets are pairs of masks (positive, negative).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Sequence

Name = tuple[str, ...]
State = int


class ConflictingEffects(ValueError):
    """Two triggered effects assign opposite values to one fluent."""


class NotApplicable(ValueError):
    """The precondition of an action does not hold."""


def bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(ids: Iterable[int]) -> int:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def name_str(name: Name) -> str:
    if len(name) == 1:
        return name[0]
    return f"{name[0]}({', '.join(name[1:])})"


@dataclass(frozen=True)
class Literal:
    fluent: int
    polarity: bool = True

    def holds(self, s: State) -> bool:
        return bool(s >> self.fluent & 1) == self.polarity


@dataclass(frozen=True)
class LiteralSet:
    """A conflict-free partial assignment, stored as two disjoint masks."""

    pos: int = 0
    neg: int = 0

    def __post_init__(self):
        if self.pos & self.neg:
            raise ValueError(f"conflicting literals on fluents {list(bits(self.pos & self.neg))}")

    @classmethod
    def of(cls, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> "LiteralSet":
        return cls(mask_of(pos), mask_of(neg))

    @classmethod
    def from_literals(cls, literals: Iterable[Literal]) -> "LiteralSet":
        pos = neg = 0
        for lit in literals:
            if lit.polarity:
                pos |= 1 << lit.fluent
            else:
                neg |= 1 << lit.fluent
        return cls(pos, neg)

    def holds(self, s: State) -> bool:
        return s & self.pos == self.pos and not s & self.neg

    def literals(self) -> list[Literal]:
        out = [Literal(f, True) for f in bits(self.pos)] + [Literal(f, False) for f in bits(self.neg)]
        out.sort(key=lambda lit: (lit.fluent, not lit.polarity))
        return out

    def union(self, other: "LiteralSet") -> "LiteralSet":
        return LiteralSet(self.pos | other.pos, self.neg | other.neg)

    def __len__(self) -> int:
        return self.pos.bit_count() + self.neg.bit_count()

    def __bool__(self) -> bool:
        return bool(self.pos or self.neg)


EMPTY = LiteralSet()


@dataclass(frozen=True)
class ConditionalEffect:
    condition: LiteralSet
    effect: LiteralSet


@dataclass(frozen=True)
class GroundAction:
    name: Name
    pre: LiteralSet = EMPTY
    effects: tuple[ConditionalEffect, ...] = ()

    def __str__(self) -> str:
        return name_str(self.name)


@dataclass(frozen=True)
class EqualityDerived:
    """Derived fluent ``fluent`` that holds iff some pair ``(a, b)`` in ``pairs``
    has both fluents true.

    Used for ``equals(v, w)``: one pair ``(assign(v, x), assign(w, x))`` per value x.
    """

    fluent: int
    pairs: tuple[tuple[int, int], ...]

    def evaluate(self, s: State) -> bool:
        return any(s >> a & 1 and s >> b & 1 for a, b in self.pairs)


def derive(s: State, derived: Sequence[EqualityDerived]) -> State:
    for d in derived:
        if d.evaluate(s):
            s |= 1 << d.fluent
        else:
            s &= ~(1 << d.fluent)
    return s


def applicable(s: State, a: GroundAction) -> bool:
    return a.pre.holds(s)


def triggered_effects(s: State, a: GroundAction, strict: bool = True) -> LiteralSet:
    """Union of the effects whose condition holds in ``s``.

    In strict mode opposite values raise ``ConflictingEffects``; otherwise the
    positive literal wins (delete-then-add).
    """
    add = dele = 0
    for ce in a.effects:
        c = ce.condition
        if s & c.pos == c.pos and not s & c.neg:
            add |= ce.effect.pos
            dele |= ce.effect.neg
    clash = add & dele
    if clash:
        if strict:
            raise ConflictingEffects(f"{a}: conflicting effects on fluents {list(bits(clash))}")
        dele &= ~clash
    return LiteralSet(add, dele)


def apply(s: State, a: GroundAction, *, strict: bool = True,
          derived: Sequence[EqualityDerived] = ()) -> State:
    if not a.pre.holds(s):
        raise NotApplicable(str(a))
    eff = triggered_effects(s, a, strict)
    s = (s & ~eff.neg) | eff.pos
    if derived:
        s = derive(s, derived)
    return s


@dataclass(frozen=True)
class Problem:
    """P = <F, A, I, G>, plus optional derived fluents and the static atoms that
    grounding evaluated away (kept so controllers may still test them)."""

    fluents: tuple[Name, ...]
    actions: tuple[GroundAction, ...]
    init: State
    goal: LiteralSet = EMPTY
    derived: tuple[EqualityDerived, ...] = ()
    static_atoms: frozenset[Name] = frozenset()
    static_predicates: frozenset[str] = frozenset()
    fluent_index: dict[Name, int] = field(init=False, repr=False, compare=False)
    action_index: dict[Name, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fi = {n: i for i, n in enumerate(self.fluents)}
        if len(fi) != len(self.fluents):
            raise ValueError("duplicate fluent names")
        object.__setattr__(self, "fluent_index", fi)
        object.__setattr__(self, "action_index", {a.name: i for i, a in enumerate(self.actions)})
        top = 1 << len(self.fluents)
        if self.init >= top or (self.goal.pos | self.goal.neg) >= top:
            raise ValueError("state or goal references undeclared fluents")
        if self.derived:
            object.__setattr__(self, "init", derive(self.init, self.derived))

    @property
    def num_fluents(self) -> int:
        return len(self.fluents)

    def fluent(self, name: Name | str) -> int:
        if isinstance(name, str):
            name = (name,)
        return self.fluent_index[tuple(name)]

    def action(self, name: Name | str) -> GroundAction:
        if isinstance(name, str):
            name = (name,)
        return self.actions[self.action_index[tuple(name)]]

    def successor(self, s: State, a: GroundAction, strict: bool = True) -> State:
        return apply(s, a, strict=strict, derived=self.derived)

    def is_goal(self, s: State) -> bool:
        return self.goal.holds(s)

    def true_names(self, s: State) -> list[Name]:
        return [self.fluents[f] for f in bits(s)]

    def state(self, true: Iterable[Name]) -> State:
        return derive(mask_of(self.fluent(n) for n in true), self.derived)


@dataclass(frozen=True)
class Instance:
    init: State
    goal: LiteralSet = EMPTY


@dataclass(frozen=True)
class GeneralizedProblem:
    """Instances sharing fluents and actions, differing in init and goal.

    ``variables``/``values`` declare the pointer objects behind the
    ``assign(v, x)`` fluents; both are empty for domains without them.
    """

    fluents: tuple[Name, ...]
    actions: tuple[GroundAction, ...]
    instances: tuple[Instance, ...]
    derived: tuple[EqualityDerived, ...] = ()
    static_atoms: frozenset[Name] = frozenset()
    static_predicates: frozenset[str] = frozenset()
    variables: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    assign_predicate: str = "assign"

    def __post_init__(self):
        if self.derived:
            fixed = tuple(Instance(derive(i.init, self.derived), i.goal) for i in self.instances)
            object.__setattr__(self, "instances", fixed)

    def __len__(self) -> int:
        return len(self.instances)

    def problem(self, t: int) -> Problem:
        inst = self.instances[t]
        return Problem(self.fluents, self.actions, inst.init, inst.goal, self.derived,
                       self.static_atoms, self.static_predicates)

    def problems(self) -> list[Problem]:
        return [self.problem(t) for t in range(len(self.instances))]

    def assign_fluents(self) -> dict[tuple[str, str], int]:
        """Map (variable, value) to the id of ``assign(variable, value)``."""
        index = {n: i for i, n in enumerate(self.fluents)}
        return {(v, x): index[(self.assign_predicate, v, x)]
                for v in self.variables for x in self.values
                if (self.assign_predicate, v, x) in index}

    @classmethod
    def single(cls, p: Problem, **kw) -> "GeneralizedProblem":
        return cls(p.fluents, p.actions, (Instance(p.init, p.goal),), p.derived,
                   p.static_atoms, p.static_predicates, **kw)


@dataclass(frozen=True)
class Plan:
    steps: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def names(self, p: Problem | GeneralizedProblem) -> list[Name]:
        return [p.actions[i].name for i in self.steps]

    @classmethod
    def from_names(cls, p: Problem, names: Iterable[Name]) -> "Plan":
        return cls(tuple(p.action_index[tuple(n)] for n in names))


class Verdict(str, Enum):
    SOLVES = "solves"
    GOAL_UNSATISFIED = "goal-unsatisfied"
    INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class PlanVerdict:
    kind: Verdict
    state: State
    step: int | None = None

    @property
    def solves(self) -> bool:
        return self.kind is Verdict.SOLVES


def simulate(p: Problem, plan: Plan, strict: bool = True) -> list[State]:
    """States s_0..s_n induced by ``plan``; raises NotApplicable on failure."""
    states = [p.init]
    s = p.init
    for i in plan.steps:
        s = p.successor(s, p.actions[i], strict)
        states.append(s)
    return states


def validate_plan(p: Problem, plan: Plan, strict: bool = True) -> PlanVerdict:
    s = p.init
    for k, i in enumerate(plan.steps):
        a = p.actions[i]
        if not a.pre.holds(s):
            return PlanVerdict(Verdict.INAPPLICABLE, s, k)
        s = p.successor(s, a, strict)
    if p.goal.holds(s):
        return PlanVerdict(Verdict.SOLVES, s)
    return PlanVerdict(Verdict.GOAL_UNSATISFIED, s)

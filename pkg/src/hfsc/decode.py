"""Read controllers and simulated executions back out of compiled plans."""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import fsc
from .fsc import Call, Controller, Hierarchy, Primitive, StepEvent
from .model import Name

KEY_FORMAT = "hfsc-key-v1"

PROGRAM_ROLES = ("pcond", "pact", "psucc", "pcall")
EXECUTE_ROLES = ("econd", "eact", "esucc", "ecall", "term")
ROLES = PROGRAM_ROLES + EXECUTE_ROLES + ("end",)


class DecodeError(ValueError):
    pass


class DuplicateProgram(DecodeError):
    pass


class MalformedPhase(DecodeError):
    pass


@dataclass(frozen=True)
class KeyEntry:
    role: str
    q: int | None = None
    b: int | None = None
    q2: int | None = None
    i: int = 0
    j: int | None = None
    l: int = 0
    t: int | None = None
    f: Name | None = None
    a: Name | None = None
    p: tuple[str, ...] | None = None


@dataclass
class DecodingKey:
    """Emitted action name -> role and indices, plus what is needed to rebuild
    the hierarchy (bounds, parameter lists, injected priors)."""

    n: int
    m: int = 1
    ell: int = 0
    hierarchical: bool = False
    params: tuple[tuple[str, ...], ...] = ((),)
    variables: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    assign_predicate: str = "assign"
    instances: int = 1
    entries: dict[str, KeyEntry] = field(default_factory=dict)
    action_names: list[str] = field(default_factory=list)
    priors: Hierarchy | None = None

    def empty_hierarchy(self) -> Hierarchy:
        if self.priors is not None:
            return copy.deepcopy(self.priors)
        return Hierarchy(self.n + 1, [Controller(tuple(ps)) for ps in self.params],
                         tuple(self.variables), tuple(self.values), self.assign_predicate)

    def entry(self, name: str) -> KeyEntry:
        try:
            return self.entries[name]
        except KeyError:
            raise DecodeError(f"action {name!r} is not in the decoding key") from None

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        entries = {}
        for name, e in sorted(self.entries.items()):
            entries[name] = {k: (list(v) if isinstance(v, tuple) else v)
                             for k, v in asdict(e).items() if v is not None}
        return {
            "format": KEY_FORMAT,
            "n": self.n, "m": self.m, "ell": self.ell, "hierarchical": self.hierarchical,
            "params": [list(p) for p in self.params],
            "variables": list(self.variables), "values": list(self.values),
            "assign_predicate": self.assign_predicate,
            "instances": self.instances,
            "priors": fsc.to_dict(self.priors) if self.priors is not None else None,
            "entries": entries,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DecodingKey":
        if not isinstance(d, dict) or d.get("format") != KEY_FORMAT:
            raise fsc.FormatError("$.format", f"expected {KEY_FORMAT!r}")
        entries = {}
        for name, e in d["entries"].items():
            kw = {k: (tuple(v) if isinstance(v, list) else v) for k, v in e.items()}
            if kw.get("role") not in ROLES:
                raise fsc.FormatError(f"$.entries.{name}.role", "unknown role")
            entries[name] = KeyEntry(**kw)
        return cls(
            n=d["n"], m=d["m"], ell=d["ell"], hierarchical=d["hierarchical"],
            params=tuple(tuple(p) for p in d["params"]),
            variables=tuple(d["variables"]), values=tuple(d["values"]),
            assign_predicate=d.get("assign_predicate", "assign"),
            instances=d["instances"], entries=entries,
            priors=fsc.from_dict(d["priors"]) if d.get("priors") else None,
        )

    @classmethod
    def loads(cls, text: str) -> "DecodingKey":
        return cls.from_dict(json.loads(text))


def decode(plan: Sequence[str], key: DecodingKey) -> Hierarchy:
    """Hierarchy programmed by the program actions of ``plan`` (on top of any
    priors). Unprogrammed slots stay undefined."""
    h = key.empty_hierarchy()
    for name in plan:
        e = key.entry(name)
        if e.role not in PROGRAM_ROLES or e.q == key.n:
            # the terminal state is never executed; programming it is inert
            continue
        c = h.controllers[e.i]
        if e.role == "pcond":
            if e.q in c.gamma:
                raise DuplicateProgram(f"condition of C{e.i + 1} q{e.q} programmed twice")
            c.gamma[e.q] = tuple(e.f)
        elif e.role == "psucc":
            if (e.q, e.b) in c.lam:
                raise DuplicateProgram(f"successor of C{e.i + 1} ({e.q}, {e.b}) programmed twice")
            c.lam[e.q, e.b] = e.q2
        else:
            if (e.q, e.b) in c.phi:
                raise DuplicateProgram(f"instruction of C{e.i + 1} ({e.q}, {e.b}) programmed twice")
            c.phi[e.q, e.b] = Primitive(tuple(e.a)) if e.role == "pact" else Call(e.j, tuple(e.p))
    return h.validate()


@dataclass
class _Level:
    controller: int
    q: int = 0
    phase: str = "idle"  # idle -> evaluated -> applied (-> waiting for a call)
    branch: int | None = None


def decode_trace(plan: Sequence[str], key: DecodingKey) -> list[list[StepEvent]]:
    """Per-instance execution steps simulated by the execute actions of ``plan``."""
    traces: list[list[StepEvent]] = [[]]
    stack = [_Level(0)]

    def bad(msg: str, k: int) -> MalformedPhase:
        return MalformedPhase(f"step {k} ({plan[k]}): {msg}")

    for k, name in enumerate(plan):
        e = key.entry(name)
        if e.role in PROGRAM_ROLES:
            continue
        if e.role == "end":
            if len(stack) != 1 or stack[0].q != key.n or stack[0].phase != "idle":
                raise bad("instance ended outside the terminal state", k)
            traces.append([])
            stack = [_Level(0)]
            continue
        if e.l != len(stack) - 1:
            raise bad(f"acts on level {e.l} while the stack has level {len(stack) - 1}", k)
        top = stack[-1]
        if e.i != top.controller or (e.q is not None and e.q != top.q and e.role != "term"):
            raise bad("controller or state does not match the simulated execution", k)
        if e.role == "econd":
            if top.phase != "idle":
                raise bad("condition evaluated twice", k)
            top.phase = "evaluated"
        elif e.role in ("eact", "ecall"):
            if top.phase != "evaluated":
                raise bad("instruction applied before its condition was evaluated", k)
            top.branch = e.b
            if e.role == "eact":
                top.phase = "applied"
                traces[-1].append(StepEvent("primitive", e.l, e.i, e.q, e.b, Primitive(tuple(e.a))))
            else:
                top.phase = "calling"
                traces[-1].append(StepEvent("call", e.l, e.i, e.q, e.b, Call(e.j, tuple(e.p))))
                stack.append(_Level(e.j))
        elif e.role == "term":
            if len(stack) < 2 or top.q != key.n or top.phase != "idle":
                raise bad("termination outside a called terminal state", k)
            traces[-1].append(StepEvent("return", e.l, e.i, key.n))
            stack.pop()
            stack[-1].phase = "applied"
        elif e.role == "esucc":
            if top.phase != "applied" or e.b != top.branch:
                raise bad("successor taken before the instruction completed", k)
            top.q, top.phase, top.branch = e.q2, "idle", None
    return traces


def check_solution(cp, plan_names: Sequence[str]) -> None:
    """Invariants every compiled solution must satisfy: program fluents are
    consumed at most once and never restored, and execution phases follow
    condition -> instruction -> successor on every level."""
    from .model import Plan, bits

    p = cp.problem
    no_mask = cp.no_fluent_mask
    plan = Plan(tuple(p.action_index[n] for n in cp.names_to_actions(plan_names)))
    s = p.init
    consumed = 0
    for i in plan.steps:
        s2 = p.successor(s, p.actions[i])
        restored = (s2 & ~s) & no_mask
        if restored:
            raise MalformedPhase(f"program fluents {list(bits(restored))} restored by {p.actions[i]}")
        gone = (s & ~s2) & no_mask
        if gone & consumed:
            raise MalformedPhase("program fluent consumed twice")
        consumed |= gone
        s = s2
    decode_trace(plan_names, cp.key)

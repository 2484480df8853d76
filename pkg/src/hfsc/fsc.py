"""Controllers, hierarchies and their call-stack executor.

A controller state ``q`` branches on one fluent (``gamma[q]``); the outcome
``b`` selects an instruction ``phi[q, b]`` and a successor ``lam[q, b]``.
All controllers of a hierarchy share states ``0..n`` with ``n`` terminal.
Instructions name actions and fluents, so one hierarchy runs on any problem of
the same domain regardless of instance size.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence, Union

from .model import GeneralizedProblem, Name, Problem, State, derive, name_str, triggered_effects


@dataclass(frozen=True)
class Primitive:
    action: Name

    def __str__(self) -> str:
        return name_str(self.action)


@dataclass(frozen=True)
class Call:
    callee: int
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"call C{self.callee + 1}[{', '.join(self.args)}]"


Instruction = Union[Primitive, Call]


class HierarchyError(ValueError):
    pass


@dataclass
class Controller:
    params: tuple[str, ...] = ()
    gamma: dict[int, Name] = field(default_factory=dict)
    lam: dict[tuple[int, int], int] = field(default_factory=dict)
    phi: dict[tuple[int, int], Instruction] = field(default_factory=dict)

    def slots(self) -> list[tuple[int, int]]:
        return sorted(self.phi)

    def used_states(self) -> set[int]:
        return {q for q, _ in self.phi}


@dataclass
class Hierarchy:
    """``controllers[0]`` is the root. ``num_states`` counts q_0..q_n."""

    num_states: int
    controllers: list[Controller]
    variables: tuple[str, ...] = ()
    values: tuple[str, ...] = ()
    assign_predicate: str = "assign"

    @property
    def terminal(self) -> int:
        return self.num_states - 1

    @property
    def root(self) -> Controller:
        return self.controllers[0]

    def validate(self) -> "Hierarchy":
        if self.num_states < 1:
            raise HierarchyError("need at least one controller state")
        if not self.controllers:
            raise HierarchyError("hierarchy has no controllers")
        for i, c in enumerate(self.controllers):
            where = f"C{i + 1}"
            for v in c.params:
                if self.variables and v not in self.variables:
                    raise HierarchyError(f"{where}: parameter {v!r} is not a variable object")
            if set(c.lam) != set(c.phi):
                raise HierarchyError(f"{where}: successor and instruction tables disagree")
            for q, b in c.phi:
                if not 0 <= q < self.terminal or b not in (0, 1):
                    raise HierarchyError(f"{where}: bad slot ({q}, {b})")
                if q not in c.gamma:
                    raise HierarchyError(f"{where}: slot ({q}, {b}) has no condition")
                if not 0 <= c.lam[q, b] <= self.terminal:
                    raise HierarchyError(f"{where}: successor of ({q}, {b}) out of range")
                ins = c.phi[q, b]
                if isinstance(ins, Call):
                    if not 0 <= ins.callee < len(self.controllers):
                        raise HierarchyError(f"{where}: call to missing controller {ins.callee + 1}")
                    if len(ins.args) != len(self.controllers[ins.callee].params):
                        raise HierarchyError(f"{where}: call arity mismatch at ({q}, {b})")
                    for a in ins.args:
                        if self.variables and a not in self.variables:
                            raise HierarchyError(f"{where}: call argument {a!r} is not a variable object")
            if self.terminal in c.gamma:
                raise HierarchyError(f"{where}: terminal state has a condition")
        return self

    def is_recursive(self) -> bool:
        return any(isinstance(ins, Call) and ins.callee == i
                   for i, c in enumerate(self.controllers) for ins in c.phi.values())


# -- execution --------------------------------------------------------------

class Outcome(str, Enum):
    SOLVED = "solved"
    GOAL_UNSATISFIED = "goal-unsatisfied"
    REVISITED = "revisited-configuration"
    STACK_OVERFLOW = "stack-overflow"
    BUDGET_EXHAUSTED = "step-budget-exhausted"
    UNDEFINED_TRANSITION = "undefined-transition"
    INAPPLICABLE_ACTION = "inapplicable-action"


class ExecutionError(Exception):
    outcome: Outcome


class UndefinedTransition(ExecutionError):
    outcome = Outcome.UNDEFINED_TRANSITION


class InapplicableAction(ExecutionError):
    outcome = Outcome.INAPPLICABLE_ACTION


class StackOverflow(ExecutionError):
    outcome = Outcome.STACK_OVERFLOW


@dataclass(frozen=True)
class Limits:
    max_stack: int = 64
    step_budget: int = 1_000_000


@dataclass(frozen=True)
class Frame:
    """``saved``/``pending`` are set while this frame waits on a call: the
    caller's assignment bits and the state to resume in."""

    controller: int
    q: int
    saved: int | None = None
    pending: int | None = None


@dataclass(frozen=True)
class Configuration:
    level: int
    controller: int
    q: int
    state: State


@dataclass(frozen=True)
class StepEvent:
    kind: str  # "primitive", "call" or "return"
    level: int
    controller: int
    q: int
    branch: int | None = None
    instruction: Instruction | None = None


@dataclass
class ExecutionTrace:
    configurations: list[Configuration]
    events: list[StepEvent]
    outcome: Outcome
    detail: str = ""

    @property
    def solved(self) -> bool:
        return self.outcome is Outcome.SOLVED

    @property
    def final_state(self) -> State:
        return self.configurations[-1].state


class _Bound:
    """A hierarchy resolved against one problem's fluent and action tables."""

    def __init__(self, h: Hierarchy, p: Problem):
        self.h, self.p = h, p
        amask = 0
        by_var: dict[str, dict[str, int]] = {}
        for fid, n in enumerate(p.fluents):
            if n[0] == h.assign_predicate and len(n) == 3:
                amask |= 1 << fid
                by_var.setdefault(n[1], {})[n[2]] = fid
        self.amask = amask
        self.by_var = by_var
        self.predicates = {n[0] for n in p.fluents}
        self.gamma: list[dict[int, int | bool]] = []
        self.phi: list[dict[tuple[int, int], int | Call]] = []
        for i, c in enumerate(h.controllers):
            g: dict[int, int | bool] = {}
            for q, name in c.gamma.items():
                g[q] = self._condition(tuple(name), i)
            self.gamma.append(g)
            ph: dict[tuple[int, int], int | Call] = {}
            for slot, ins in c.phi.items():
                if isinstance(ins, Primitive):
                    idx = p.action_index.get(tuple(ins.action))
                    if idx is None:
                        raise HierarchyError(f"C{i + 1}: unknown action {name_str(ins.action)}")
                    ph[slot] = idx
                else:
                    ph[slot] = ins
            self.phi.append(ph)

    def _condition(self, name: Name, i: int) -> int | bool:
        fid = self.p.fluent_index.get(name)
        if fid is not None:
            return fid
        if name[0] in self.p.static_predicates:
            # evaluated away at grounding time: constant truth value
            if name[0] == "=":
                return len(name) == 3 and name[1] == name[2]
            return name in self.p.static_atoms
        if name[0] in self.predicates:
            # an atom over objects this instance lacks is simply false
            return False
        raise HierarchyError(f"C{i + 1}: unknown condition fluent {name_str(name)}")

    def copy_in(self, s: State, call: Call) -> State:
        out = s & ~self.amask
        params = self.h.controllers[call.callee].params
        for arg, par in zip(call.args, params):
            dst = self.by_var.get(par, {})
            for x, fid in self.by_var.get(arg, {}).items():
                if s >> fid & 1 and x in dst:
                    out |= 1 << dst[x]
        return derive(out, self.p.derived)


def step(bound: _Bound, frames: tuple[Frame, ...], s: State, max_stack: int):
    """One transition from ``(frames, s)``; returns ``(frames', s', event)``."""
    h, p = bound.h, bound.p
    top = frames[-1]
    level = len(frames) - 1
    if top.q == h.terminal:
        if level == 0:
            raise ValueError("execution already terminated")
        caller = frames[-2]
        s2 = derive((s & ~bound.amask) | caller.saved, p.derived)
        ev = StepEvent("return", level, top.controller, top.q)
        return frames[:-2] + (Frame(caller.controller, caller.pending),), s2, ev
    cond = bound.gamma[top.controller].get(top.q)
    if cond is None:
        raise UndefinedTransition(f"C{top.controller + 1}: no condition at q{top.q}")
    b = int(cond) if isinstance(cond, bool) else s >> cond & 1
    slot = (top.q, b)
    ctrl = h.controllers[top.controller]
    ins = bound.phi[top.controller].get(slot)
    nxt = ctrl.lam.get(slot)
    if ins is None or nxt is None:
        raise UndefinedTransition(f"C{top.controller + 1}: no transition at q{top.q}, branch {b}")
    if isinstance(ins, int):
        a = p.actions[ins]
        if not a.pre.holds(s):
            raise InapplicableAction(f"C{top.controller + 1}: {a} at q{top.q}")
        eff = triggered_effects(s, a)
        s2 = (s & ~eff.neg) | eff.pos
        if p.derived:
            s2 = derive(s2, p.derived)
        ev = StepEvent("primitive", level, top.controller, top.q, b, ctrl.phi[slot])
        return frames[:-1] + (Frame(top.controller, nxt),), s2, ev
    if level >= max_stack:
        raise StackOverflow(f"call at level {level} exceeds stack bound {max_stack}")
    s2 = bound.copy_in(s, ins)
    waiting = Frame(top.controller, top.q, s & bound.amask, nxt)
    ev = StepEvent("call", level, top.controller, top.q, b, ins)
    return frames[:-1] + (waiting, Frame(ins.callee, 0)), s2, ev


def execute(h: Hierarchy, p: Problem, limits: Limits = Limits()) -> ExecutionTrace:
    bound = _Bound(h, p)
    frames: tuple[Frame, ...] = (Frame(0, 0),)
    s = p.init
    configs = [Configuration(0, 0, 0, s)]
    events: list[StepEvent] = []
    seen = {(frames, s)}
    steps = 0
    while True:
        if len(frames) == 1 and frames[0].q == h.terminal:
            outcome = Outcome.SOLVED if p.goal.holds(s) else Outcome.GOAL_UNSATISFIED
            return ExecutionTrace(configs, events, outcome)
        if steps >= limits.step_budget:
            return ExecutionTrace(configs, events, Outcome.BUDGET_EXHAUSTED)
        try:
            frames, s, ev = step(bound, frames, s, limits.max_stack)
        except ExecutionError as e:
            return ExecutionTrace(configs, events, e.outcome, str(e))
        steps += 1
        events.append(ev)
        top = frames[-1]
        configs.append(Configuration(len(frames) - 1, top.controller, top.q, s))
        key = (frames, s)
        if key in seen:
            return ExecutionTrace(configs, events, Outcome.REVISITED)
        seen.add(key)


def solves(h: Hierarchy, gp: GeneralizedProblem | Sequence[Problem],
           limits: Limits = Limits()) -> list[Outcome]:
    problems = gp.problems() if isinstance(gp, GeneralizedProblem) else list(gp)
    return [execute(h, p, limits).outcome for p in problems]


# -- rendering ----------------------------------------------------------------

def _q(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(h: Hierarchy) -> str:
    """Graphviz text: one cluster per controller, edges ``cond/branch: instruction``."""
    lines = ["digraph hierarchy {", "  rankdir=LR;", "  node [shape=circle];"]
    for i, c in enumerate(h.controllers):
        cid = f"C{i + 1}"
        params = ", ".join(c.params)
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f"    label={_q(f'{cid}[{params}]')};")
        for q in range(h.num_states):
            shape = ' shape=doublecircle' if q == h.terminal else ""
            lines.append(f"    {_q(f'{cid}_q{q}')} [label={_q(f'Q{q}')}{shape}];")
        for q, b in c.slots():
            label = f"{name_str(c.gamma[q])}/{b}: {c.phi[q, b]}"
            lines.append(f"    {_q(f'{cid}_q{q}')} -> {_q(f'{cid}_q{c.lam[q, b]}')} [label={_q(label)}];")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- serialization ------------------------------------------------------------

FORMAT = "hfsc-v1"


class FormatError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def to_dict(h: Hierarchy) -> dict:
    ctrls = []
    for c in h.controllers:
        transitions = []
        for q, b in c.slots():
            ins = c.phi[q, b]
            t = {"q": q, "b": b, "next": c.lam[q, b]}
            if isinstance(ins, Primitive):
                t["action"] = list(ins.action)
            else:
                t["call"] = {"controller": ins.callee, "args": list(ins.args)}
            transitions.append(t)
        ctrls.append({
            "params": list(c.params),
            "gamma": {str(q): list(n) for q, n in sorted(c.gamma.items())},
            "transitions": transitions,
        })
    return {
        "format": FORMAT,
        "num_states": h.num_states,
        "variables": list(h.variables),
        "values": list(h.values),
        "assign_predicate": h.assign_predicate,
        "controllers": ctrls,
    }


def save(h: Hierarchy) -> str:
    return json.dumps(to_dict(h), indent=1, sort_keys=True) + "\n"


def _get(d: dict, key: str, typ, path: str):
    if not isinstance(d, dict) or key not in d:
        raise FormatError(path, f"missing field {key!r}")
    v = d[key]
    if not isinstance(v, typ) or (typ is int and isinstance(v, bool)):
        raise FormatError(f"{path}.{key}", f"expected {getattr(typ, '__name__', typ)}")
    return v


def _strs(v, path: str) -> tuple[str, ...]:
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise FormatError(path, "expected a list of strings")
    return tuple(v)


def from_dict(d: dict) -> Hierarchy:
    if not isinstance(d, dict):
        raise FormatError("$", "expected an object")
    if d.get("format") != FORMAT:
        raise FormatError("$.format", f"expected {FORMAT!r}")
    n = _get(d, "num_states", int, "$")
    ctrls_raw = _get(d, "controllers", list, "$")
    if not ctrls_raw:
        raise FormatError("$.controllers", "at least one controller is required")
    controllers = []
    for i, c in enumerate(ctrls_raw):
        path = f"$.controllers[{i}]"
        params = _strs(_get(c, "params", list, path), f"{path}.params")
        gamma_raw = _get(c, "gamma", dict, path)
        gamma = {}
        for k, v in gamma_raw.items():
            if not k.isdigit():
                raise FormatError(f"{path}.gamma", f"state key {k!r} is not an integer")
            gamma[int(k)] = _strs(v, f"{path}.gamma.{k}")
        ctrl = Controller(params, gamma)
        for j, t in enumerate(_get(c, "transitions", list, path)):
            tp = f"{path}.transitions[{j}]"
            q, b, nxt = (_get(t, k, int, tp) for k in ("q", "b", "next"))
            if (q, b) in ctrl.phi:
                raise FormatError(tp, f"duplicate slot ({q}, {b})")
            if "action" in t:
                ins: Instruction = Primitive(_strs(t["action"], f"{tp}.action"))
            elif "call" in t:
                callee = _get(t["call"], "controller", int, f"{tp}.call")
                args = _strs(_get(t["call"], "args", list, f"{tp}.call"), f"{tp}.call.args")
                ins = Call(callee, args)
            else:
                raise FormatError(tp, "transition needs 'action' or 'call'")
            ctrl.phi[q, b] = ins
            ctrl.lam[q, b] = nxt
        controllers.append(ctrl)
    h = Hierarchy(n, controllers,
                  _strs(d.get("variables", []), "$.variables"),
                  _strs(d.get("values", []), "$.values"),
                  d.get("assign_predicate", "assign"))
    try:
        h.validate()
    except HierarchyError as e:
        raise FormatError("$.controllers", str(e)) from None
    return h


def load(text: str) -> Hierarchy:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError("$", f"invalid JSON: {e}") from None
    return from_dict(d)


def equal(a: Hierarchy, b: Hierarchy) -> bool:
    return to_dict(a) == to_dict(b)


def controller_sizes(h: Hierarchy) -> list[int]:
    """Number of non-terminal states each controller actually uses."""
    return [len(c.used_states()) for c in h.controllers]


def instructions(h: Hierarchy) -> Iterable[Instruction]:
    for c in h.controllers:
        yield from c.phi.values()

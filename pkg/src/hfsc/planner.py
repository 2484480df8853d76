"""Forward state-space search for grounded problems with conditional effects."""

from __future__ import annotations

import heapq
import itertools
import time
from collections import Counter, deque
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import sparse

from .model import Plan, Problem, State, bits, triggered_effects, validate_plan

INF = float("inf")


class Strategy(str, Enum):
    GBFS = "greedy-best-first"
    WASTAR = "weighted-a-star"
    BFS = "breadth-first"


class Heuristic(str, Enum):
    HADD = "additive-relaxation"
    FF = "relaxed-plan"
    GOAL_COUNT = "goal-count"
    BLIND = "blind"


class Status(str, Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class SearchConfig:
    strategy: Strategy = Strategy.GBFS
    heuristic: Heuristic = Heuristic.HADD
    max_expansions: int | None = 2_000_000
    max_seconds: float | None = None
    weight: float = 2.0
    # GBFS only: follow states with a single applicable action without queueing
    collapse_corridors: bool = True
    # additive heuristic only: second open list for successors reached by
    # actions on the relaxed plan, alternated with the main one
    preferred_operators: bool = True
    # GBFS only: queue successors under the parent's value and evaluate them
    # when popped
    lazy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "heuristic", Heuristic(self.heuristic))
        if self.max_expansions is not None and self.max_expansions <= 0:
            raise ValueError("max_expansions must be positive")
        if self.max_seconds is not None and self.max_seconds <= 0:
            raise ValueError("max_seconds must be positive")


@dataclass
class SearchResult:
    status: Status
    plan: Plan | None = None
    expansions: int = 0
    generated: int = 0
    seconds: float = 0.0

    @property
    def solved(self) -> bool:
        return self.status is Status.SOLVED


class PlanValidationError(AssertionError):
    pass


# -- successor generation -------------------------------------------------

class SuccessorGenerator:
    """Decision tree over precondition literals.

    Each inner node tests one fluent and has three children: actions that need
    it true, need it false, or do not mention it. Leaves hold actions whose
    whole precondition was tested on the way down.
    """

    def __init__(self, p: Problem):
        self.p = p
        pres = [(set(bits(a.pre.pos)), set(bits(a.pre.neg))) for a in p.actions]
        self.root = self._build(list(range(len(p.actions))), pres)

    def _build(self, ids: list[int], pres):
        counts: Counter = Counter()
        for i in ids:
            pos, neg = pres[i]
            counts.update(pos)
            counts.update(neg)
        if not counts:
            return (None, ids)
        f = max(counts, key=lambda k: (counts[k], -k))
        yes, no, rest = [], [], []
        for i in ids:
            pos, neg = pres[i]
            if f in pos:
                pos.discard(f)
                yes.append(i)
            elif f in neg:
                neg.discard(f)
                no.append(i)
            else:
                rest.append(i)
        return (f, self._build(yes, pres) if yes else None,
                self._build(no, pres) if no else None,
                self._build(rest, pres) if rest else None)

    def applicable(self, s: State) -> list[int]:
        out: list[int] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node[0] is None:
                out.extend(node[1])
                continue
            f, yes, no, rest = node
            if rest is not None:
                stack.append(rest)
            child = yes if s >> f & 1 else no
            if child is not None:
                stack.append(child)
        out.sort()
        return out


# -- heuristics -----------------------------------------------------------

class AdditiveHeuristic:
    """Additive delete-relaxation cost. Each conditional effect C>E of an
    action a is a unit-cost relaxed action with precondition pre(a) + C adding
    the positive literals of E. Negative literals are ignored."""

    def __init__(self, p: Problem):
        self.p = p
        rows, cols, erows, ecols, owner = [], [], [], [], []
        k = 0
        for ai, a in enumerate(p.actions):
            for ce in a.effects:
                adds = list(bits(ce.effect.pos))
                if not adds:
                    continue
                needs = set(bits(a.pre.pos)) | set(bits(ce.condition.pos))
                rows.extend([k] * len(needs))
                cols.extend(needs)
                erows.extend([k] * len(adds))
                ecols.extend(adds)
                owner.append(ai)
                k += 1
        nf = p.num_fluents
        self.num_sub = k
        self.pre = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(k, nf))
        self.eff_rows = np.asarray(erows, dtype=np.int64)
        self.eff_cols = np.asarray(ecols, dtype=np.int64)
        self.goal = np.fromiter(bits(p.goal.pos), dtype=np.int64)
        self.nf = nf
        self.owner = np.asarray(owner, dtype=np.int64)
        self.needs = self.pre.tolil().rows
        adders = sparse.csr_matrix((np.ones(len(erows)), (ecols, erows)), shape=(nf, k))
        self.adders = [np.asarray(r, dtype=np.int64) for r in adders.tolil().rows]

    def costs(self, s: State) -> np.ndarray:
        c = np.full(self.nf, INF)
        true = np.fromiter(bits(s), dtype=np.int64)
        c[true] = 0.0
        if self.num_sub == 0:
            return c
        while True:
            sub = self.pre @ c + 1.0
            new = c.copy()
            np.minimum.at(new, self.eff_cols, sub[self.eff_rows])
            if np.array_equal(new, c):
                return c
            c = new

    def helpful(self, s: State) -> set[int]:
        """Actions with a relaxed sub-action that starts a relaxed plan from
        ``s``, found by walking best supporters back from the goal."""
        return self.evaluate(s)[1]

    def evaluate(self, s: State) -> tuple[float, set[int]]:
        """Heuristic value and helpful actions from one cost computation."""
        h, _, helpful = self._relaxed_plan(s)
        return h, helpful

    def _relaxed_plan(self, s: State) -> tuple[float, set[int], set[int]]:
        """h_add, the best-supporter relaxed plan (sub-action ids) and the
        actions owning its first-layer sub-actions."""
        if not self.goal.size or all(s >> int(g) & 1 for g in self.goal):
            return 0.0, set(), set()
        c = self.costs(s)
        if np.isinf(c[self.goal]).any():
            return INF, set(), set()
        sub = self.pre @ c + 1.0
        plan: set[int] = set()
        out: set[int] = set()
        done: set[int] = set()
        todo = [int(g) for g in self.goal if c[g] > 0]
        while todo:
            f = todo.pop()
            if f in done:
                continue
            done.add(f)
            cands = self.adders[f]
            best = int(cands[np.argmin(sub[cands])])
            plan.add(best)
            if sub[best] == 1.0:
                out.add(int(self.owner[best]))
            todo.extend(g for g in self.needs[best] if c[g] > 0)
        return float(c[self.goal].sum()), plan, out

    def __call__(self, s: State) -> float:
        if not self.goal.size:
            return 0.0
        if all(s >> int(g) & 1 for g in self.goal):
            return 0.0
        return float(self.costs(s)[self.goal].sum())


class RelaxedPlanHeuristic(AdditiveHeuristic):
    """Size of the relaxed plan read off h_add's best supporters. Goals that
    share supporters are counted once, unlike h_add."""

    def evaluate(self, s: State) -> tuple[float, set[int]]:
        h, plan, helpful = self._relaxed_plan(s)
        return (h if h == INF else float(len(plan))), helpful

    def __call__(self, s: State) -> float:
        return self.evaluate(s)[0]


def relaxed_heuristic(s: State, p: Problem) -> float:
    return AdditiveHeuristic(p)(s)


def goal_count(p: Problem):
    def h(s: State) -> float:
        return float((p.goal.pos & ~s).bit_count() + (p.goal.neg & s).bit_count())
    return h


def _heuristic(p: Problem, kind: Heuristic):
    if kind is Heuristic.HADD:
        return AdditiveHeuristic(p)
    if kind is Heuristic.FF:
        return RelaxedPlanHeuristic(p)
    if kind is Heuristic.GOAL_COUNT:
        return goal_count(p)
    return lambda s: 0.0


# -- search -----------------------------------------------------------------

class _Budget:
    def __init__(self, cfg: SearchConfig):
        self.max_exp = cfg.max_expansions
        self.deadline = None if cfg.max_seconds is None else time.monotonic() + cfg.max_seconds
        self.expansions = 0

    def spent(self) -> bool:
        if self.max_exp is not None and self.expansions >= self.max_exp:
            return True
        return self.deadline is not None and self.expansions % 64 == 0 and time.monotonic() > self.deadline


def _successor(p: Problem, s: State, i: int) -> State:
    eff = triggered_effects(s, p.actions[i])
    s2 = (s & ~eff.neg) | eff.pos
    if p.derived:
        s2 = p.successor(s, p.actions[i])
    return s2


def _extract(parents: dict, s: State) -> Plan:
    steps = []
    while True:
        prev, a = parents[s]
        if prev is None:
            break
        steps.extend(reversed(a))
        s = prev
    steps.reverse()
    return Plan(tuple(steps))


def solve(p: Problem, cfg: SearchConfig = SearchConfig()) -> SearchResult:
    """Search for a plan. Returned plans are validated before they are returned."""
    t0 = time.monotonic()
    gen = SuccessorGenerator(p)
    if cfg.strategy is Strategy.BFS:
        res = _bfs(p, gen, cfg)
    elif cfg.lazy and cfg.strategy is Strategy.GBFS:
        res = _lazy_greedy(p, gen, cfg)
    else:
        res = _best_first(p, gen, cfg)
    res.seconds = time.monotonic() - t0
    if res.plan is not None:
        v = validate_plan(p, res.plan)
        if not v.solves:
            raise PlanValidationError(f"search returned an invalid plan ({v.kind.value} at step {v.step})")
    return res


def _bfs(p: Problem, gen: SuccessorGenerator, cfg: SearchConfig) -> SearchResult:
    budget = _Budget(cfg)
    parents: dict[State, tuple] = {p.init: (None, ())}
    if p.is_goal(p.init):
        return SearchResult(Status.SOLVED, Plan(()))
    frontier = deque([p.init])
    generated = 0
    while frontier:
        if budget.spent():
            return SearchResult(Status.EXHAUSTED, None, budget.expansions, generated)
        s = frontier.popleft()
        budget.expansions += 1
        for i in gen.applicable(s):
            s2 = _successor(p, s, i)
            generated += 1
            if s2 in parents:
                continue
            parents[s2] = (s, (i,))
            if p.is_goal(s2):
                return SearchResult(Status.SOLVED, _extract(parents, s2), budget.expansions, generated)
            frontier.append(s2)
    return SearchResult(Status.UNSOLVABLE, None, budget.expansions, generated)


def _best_first(p: Problem, gen: SuccessorGenerator, cfg: SearchConfig) -> SearchResult:
    h = _heuristic(p, cfg.heuristic)
    budget = _Budget(cfg)
    greedy = cfg.strategy is Strategy.GBFS
    prefer = cfg.preferred_operators and isinstance(h, AdditiveHeuristic)
    w = cfg.weight
    counter = itertools.count()  # FIFO among equal priorities
    h0 = h(p.init)
    if h0 == INF:
        return SearchResult(Status.UNSOLVABLE)
    parents: dict[State, tuple] = {p.init: (None, ())}
    g_of: dict[State, int] = {p.init: 0}
    queues: list[list] = [[(h0 if greedy else w * h0, next(counter), p.init)], []]
    # which queue to pop next; boosts favour the preferred queue after progress
    turn, boost, best_h = 0, 0, h0
    closed: set[State] = set()
    generated = 0
    while queues[0] or queues[1]:
        if budget.spent():
            return SearchResult(Status.EXHAUSTED, None, budget.expansions, generated)
        if boost > 0 and queues[1]:
            k = 1
            boost -= 1
        else:
            k = turn if queues[turn] else 1 - turn
            turn = 1 - turn if prefer else 0
        _, _, s = heapq.heappop(queues[k])
        if s in closed:
            continue
        closed.add(s)
        if p.is_goal(s):
            return SearchResult(Status.SOLVED, _extract(parents, s), budget.expansions, generated)
        budget.expansions += 1
        g = g_of[s]
        helpful = h.helpful(s) if prefer else ()
        for i in gen.applicable(s):
            s2 = _successor(p, s, i)
            path = (i,)
            g2 = g + 1
            if greedy and cfg.collapse_corridors:
                # walk down single-successor corridors without queueing
                seen = {s, s2}
                while not p.is_goal(s2):
                    nxt = gen.applicable(s2)
                    if len(nxt) != 1:
                        break
                    s3 = _successor(p, s2, nxt[0])
                    if s3 in seen:
                        break
                    seen.add(s3)
                    path += (nxt[0],)
                    s2 = s3
                    g2 += 1
            generated += 1
            if s2 in closed:
                continue
            if s2 in g_of and g_of[s2] <= g2:
                continue
            hv = h(s2)
            if hv == INF:
                continue
            g_of[s2] = g2
            parents[s2] = (s, path)
            entry = (hv if greedy else g2 + w * hv, next(counter), s2)
            heapq.heappush(queues[0], entry)
            if i in helpful:
                heapq.heappush(queues[1], entry)
            if prefer and hv < best_h:
                best_h = hv
                boost += 1000
    return SearchResult(Status.UNSOLVABLE, None, budget.expansions, generated)


def _lazy_greedy(p: Problem, gen: SuccessorGenerator, cfg: SearchConfig) -> SearchResult:
    """Greedy best-first with deferred evaluation: a state is queued under its
    parent's value and evaluated only when popped. Successors by helpful
    actions also go to a preferred queue, which gets extra turns after each
    improvement of the best value seen."""
    h = _heuristic(p, cfg.heuristic)
    prefer = cfg.preferred_operators and isinstance(h, AdditiveHeuristic)

    def evaluate(s: State) -> tuple[float, set[int]]:
        if prefer:
            return h.evaluate(s)
        return h(s), set()

    budget = _Budget(cfg)
    counter = itertools.count()
    parents: dict[State, tuple] = {p.init: (None, ())}
    queues: list[list] = [[(0.0, next(counter), p.init)], []]
    turn, boost, best_h = 0, 0, INF
    closed: set[State] = set()
    generated = 0
    while queues[0] or queues[1]:
        if budget.spent():
            return SearchResult(Status.EXHAUSTED, None, budget.expansions, generated)
        if boost > 0 and queues[1]:
            k = 1
            boost -= 1
        else:
            k = turn if queues[turn] else 1 - turn
            turn = 1 - turn if prefer else 0
        _, _, s = heapq.heappop(queues[k])
        if s in closed:
            continue
        closed.add(s)
        if p.is_goal(s):
            return SearchResult(Status.SOLVED, _extract(parents, s), budget.expansions, generated)
        hv, helpful = evaluate(s)
        if hv == INF:
            continue
        if hv < best_h:
            if best_h < INF and prefer:
                boost += 1000
            best_h = hv
        budget.expansions += 1
        for i in gen.applicable(s):
            s2 = _successor(p, s, i)
            path = (i,)
            if cfg.collapse_corridors:
                seen = {s, s2}
                while not p.is_goal(s2):
                    nxt = gen.applicable(s2)
                    if len(nxt) != 1:
                        break
                    s3 = _successor(p, s2, nxt[0])
                    if s3 in seen:
                        break
                    seen.add(s3)
                    path += (nxt[0],)
                    s2 = s3
            generated += 1
            if s2 in parents:
                continue
            parents[s2] = (s, path)
            entry = (hv, next(counter), s2)
            if i in helpful:
                heapq.heappush(queues[1], entry)
            heapq.heappush(queues[0], entry)
    return SearchResult(Status.UNSOLVABLE, None, budget.expansions, generated)


def synthesis_search(p: Problem, max_expansions: int | None = 2_000_000,
                     max_seconds: float | None = None, bfs_expansions: int = 10_000) -> SearchResult:
    """Default search for compiled problems: breadth-first while it is cheap,
    then greedy best-first with the additive heuristic."""
    t0 = time.monotonic()
    first = solve(p, SearchConfig(Strategy.BFS, Heuristic.BLIND,
                                  max_expansions=bfs_expansions, max_seconds=max_seconds))
    if first.status is not Status.EXHAUSTED:
        return first
    left = None if max_seconds is None else max(max_seconds - (time.monotonic() - t0), 1e-3)
    res = solve(p, SearchConfig(Strategy.GBFS, Heuristic.HADD, max_expansions=max_expansions, max_seconds=left))
    res.expansions += first.expansions
    res.seconds = time.monotonic() - t0
    return res

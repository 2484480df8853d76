from collections import deque

import pytest

from hfsc.domains import DomainSpec, generate
from hfsc.model import ConditionalEffect, GroundAction, LiteralSet, Problem, validate_plan
from hfsc.planner import (INF, AdditiveHeuristic, Heuristic, RelaxedPlanHeuristic, SearchConfig, Status, Strategy,
                          solve, synthesis_search)

from micro import all_states, as_set, oracle_apply, oracle_distance, random_gp


def reachable_distance(p: Problem) -> int | None:
    """BFS over reachable set-states; fine for problems with many fluents."""
    n = p.num_fluents
    gpos, gneg = as_set(p.goal.pos, n), as_set(p.goal.neg, n)
    start = as_set(p.init, n)
    dist = {start: 0}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        if gpos <= s and not gneg & s:
            return dist[s]
        for a in p.actions:
            t = oracle_apply(s, a)
            if t is not None and t not in dist:
                dist[t] = dist[s] + 1
                queue.append(t)
    return None


def chain(k: int) -> Problem:
    fluents = tuple((f"f{i}",) for i in range(k))
    actions = tuple(GroundAction((f"step{i}",), LiteralSet.of([i]),
                                 (ConditionalEffect(LiteralSet(), LiteralSet.of([i + 1])),))
                    for i in range(k - 1))
    return Problem(fluents, actions, 1, LiteralSet.of([k - 1]))


def micro_problems(count: int):
    seed = 0
    while count:
        gp = random_gp(seed)
        seed += 1
        for p in gp.problems():
            yield p
        count -= 1


BFS = SearchConfig(Strategy.BFS, Heuristic.BLIND)


def test_goal_in_initial_state_gives_empty_plan():
    p = Problem((("f",),), (), 1, LiteralSet.of([0]))
    for cfg in (BFS, SearchConfig()):
        r = solve(p, cfg)
        assert r.status is Status.SOLVED and len(r.plan) == 0


def test_three_block_tower_is_optimal_under_bfs():
    gen = generate(DomainSpec("blocks", (3,), seed=4))
    p = gen.problem(0)
    r = solve(p, BFS)
    assert r.solved
    assert len(r.plan) == reachable_distance(p)


def test_unreachable_goal_is_unsolvable():
    p = Problem((("f",), ("g",)), chain(2).actions, 0, LiteralSet.of([1]))
    for cfg in (BFS, SearchConfig(), SearchConfig(Strategy.WASTAR)):
        assert solve(p, cfg).status is Status.UNSOLVABLE


def test_expansion_budget_reports_exhaustion():
    p = chain(6)
    r = solve(p, SearchConfig(Strategy.BFS, Heuristic.BLIND, max_expansions=2))
    assert r.status is Status.EXHAUSTED and r.plan is None


def test_additive_heuristic_values():
    p = chain(5)
    h = AdditiveHeuristic(p)
    assert h(p.init) == 4
    assert h(1 << 4) == 0
    assert h(0) == INF


def test_additive_heuristic_sums_goal_costs():
    fl = (("a",), ("b",), ("c",))
    acts = (GroundAction(("mk_b",), LiteralSet.of([0]), (ConditionalEffect(LiteralSet(), LiteralSet.of([1])),)),
            GroundAction(("mk_c",), LiteralSet.of([1]), (ConditionalEffect(LiteralSet(), LiteralSet.of([2])),)))
    p = Problem(fl, acts, 1, LiteralSet.of([1, 2]))
    assert AdditiveHeuristic(p)(p.init) == 1 + 2
    # the relaxed plan mk_b, mk_c supports both goals
    assert RelaxedPlanHeuristic(p)(p.init) == 2


def test_relaxed_plan_heuristic_on_chain():
    p = chain(5)
    h = RelaxedPlanHeuristic(p)
    assert h(p.init) == 4 and h(1 << 4) == 0 and h(0) == INF
    value, helpful = h.evaluate(p.init)
    assert value == 4 and helpful == {0}


@pytest.mark.criterion(8)
def test_infinite_estimate_only_on_dead_ends():
    checked = 0
    for p in micro_problems(40):
        h = AdditiveHeuristic(p)
        for s in all_states(p.num_fluents):
            q = Problem(p.fluents, p.actions, s, p.goal)
            d = oracle_distance(q)
            if h(s) == INF:
                assert d is None
                checked += 1
            if d == 0:
                assert h(s) == 0
    assert checked > 0


@pytest.mark.criterion(8)
def test_bfs_matches_exhaustive_oracle():
    compared = 0
    for p in micro_problems(20):
        want = oracle_distance(p)
        r = solve(p, BFS)
        if want is None:
            assert r.status is Status.UNSOLVABLE
        else:
            assert r.solved and len(r.plan) == want
        compared += 1
    assert compared >= 20


@pytest.mark.criterion(8)
@pytest.mark.parametrize("cfg", [SearchConfig(), SearchConfig(Strategy.WASTAR),
                                 SearchConfig(heuristic=Heuristic.GOAL_COUNT),
                                 SearchConfig(heuristic=Heuristic.FF),
                                 SearchConfig(heuristic=Heuristic.FF, lazy=True),
                                 SearchConfig(collapse_corridors=False)],
                         ids=["gbfs", "wastar", "goal-count", "ff", "lazy-ff", "no-corridors"])
def test_heuristic_search_plans_validate(cfg):
    for p in micro_problems(30):
        r = solve(p, cfg)
        assert (r.status is Status.SOLVED) == (oracle_distance(p) is not None)
        if r.solved:
            assert validate_plan(p, r.plan).solves


def test_heuristic_search_on_domains():
    for name in ("gripper", "summatory", "list"):
        p = generate(DomainSpec(name, (3,), seed=2)).problem(0)
        r = synthesis_search(p)
        assert r.solved and validate_plan(p, r.plan).solves


def test_bad_budget_values():
    with pytest.raises(ValueError):
        SearchConfig(max_expansions=0)
    with pytest.raises(ValueError):
        SearchConfig(max_seconds=-1)

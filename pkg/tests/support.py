"""Synthesis wrapper that checks every solution plan it sees."""

from __future__ import annotations

from dataclasses import dataclass

from hfsc import fsc
from hfsc.compilation import CompiledProblem
from hfsc.decode import check_solution, decode, decode_trace
from hfsc.model import GeneralizedProblem, validate_plan
from hfsc.planner import SearchResult, Status, synthesis_search


@dataclass
class Synthesis:
    result: SearchResult
    names: list[str] | None = None
    hierarchy: fsc.Hierarchy | None = None

    @property
    def solved(self) -> bool:
        return self.hierarchy is not None


def synthesize(cp: CompiledProblem, gp: GeneralizedProblem, max_expansions: int | None = 200_000,
               max_seconds: float | None = None) -> Synthesis:
    """Search, then hold every solution plan to the invariants: it validates,
    programs each slot at most once, keeps phase order, and its simulated
    execution matches the decoded controller run instance by instance."""
    res = synthesis_search(cp.problem, max_expansions, max_seconds)
    if res.status is not Status.SOLVED:
        return Synthesis(res)
    assert validate_plan(cp.problem, res.plan).solves
    names = cp.plan_names(res.plan)
    check_solution(cp, names)
    h = decode(names, cp.key)
    assert fsc.equal(h, decode(names, cp.key))
    limits = fsc.Limits(max_stack=cp.params.ell)
    simulated = decode_trace(names, cp.key)
    problems = gp.problems()
    assert len(simulated) == len(problems)
    for events, p in zip(simulated, problems):
        assert events == fsc.execute(h, p, limits).events
    return Synthesis(res, names, h)

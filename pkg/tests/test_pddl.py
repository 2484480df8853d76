import itertools

import pytest

from hfsc.compilation import compile_flat
from hfsc.domains import DOMAINS, DomainSpec, generate, pointer
from hfsc.model import ConditionalEffect, GeneralizedProblem, GroundAction, Instance, LiteralSet, Problem, bits
from hfsc.pddl import (PDDLError, PDDLSyntaxError, UnsupportedRequirement, domain_to_text, emit, ground,
                       ground_generalized, parse_domain, parse_plan, parse_problem, pddl_names, problem_to_text)

MINIMAL = """(define (domain tiny)
  (:requirements :strips)
  (:predicates (on))
  (:action flip :parameters () :precondition (and) :effect (and (on))))
"""

SPECS = [DomainSpec(name, (2, 3), seed=1) for name in DOMAINS]


def _remap(ls: LiteralSet, m: list[int]) -> tuple[frozenset, frozenset]:
    return frozenset(m[f] for f in bits(ls.pos)), frozenset(m[f] for f in bits(ls.neg))


def _action_sig(a: GroundAction, m: list[int]):
    effects = frozenset((_remap(ce.condition, m), _remap(ce.effect, m)) for ce in a.effects)
    return _remap(a.pre, m), effects


def assert_isomorphic(p: Problem, q: Problem) -> None:
    """Same model up to the emitted naming of fluents and actions."""
    fn = pddl_names(p.fluents)
    an = pddl_names([a.name for a in p.actions])
    q_f = {n[0]: i for i, n in enumerate(q.fluents)}
    m = [q_f[x] for x in fn]
    assert len(p.fluents) == len(q.fluents)
    assert len(p.actions) == len(q.actions)
    for a, name in zip(p.actions, an):
        assert _action_sig(a, m) == _action_sig(q.action((name,)), list(range(len(q.fluents))))
    assert {m[f] for f in bits(p.init)} == set(bits(q.init))
    assert _remap(p.goal, m) == _remap(q.goal, list(range(len(q.fluents))))


def reparse(p: Problem) -> Problem:
    d_text, p_text = emit(p, "rt")
    dom = parse_domain(d_text)
    return ground(dom, parse_problem(p_text, dom), prune_static=False)


def test_minimal_domain():
    d = parse_domain(MINIMAL)
    assert d.name == "tiny" and len(d.actions) == 1 and d.actions[0].name == "flip"


def test_disjunctive_precondition_is_rejected():
    text = MINIMAL.replace(":precondition (and)", ":precondition (or (on) (not (on)))")
    with pytest.raises(UnsupportedRequirement):
        parse_domain(text)
    with pytest.raises(UnsupportedRequirement):
        parse_domain(MINIMAL.replace(":strips", ":strips :fluents"))


def test_syntax_error_reports_position():
    with pytest.raises(PDDLSyntaxError) as e:
        parse_domain("(define (domain x)\n  (:predicates (p)\n")
    assert e.value.line is not None


def test_empty_problem():
    d = parse_domain(MINIMAL)
    p = parse_problem("(define (problem e) (:domain tiny) (:init) (:goal (and)))", d)
    assert p.init == () and p.goal == ()
    assert ground(d, p).goal == LiteralSet()


def test_undeclared_object_type():
    d = parse_domain(pointer.LIST_DOMAIN)
    with pytest.raises(PDDLError):
        parse_problem("(define (problem e) (:domain list) (:objects a - widget) (:init) (:goal (and)))", d)


def test_seven_node_tree_problem():
    tree = pointer.balanced_tree(7)
    d = parse_domain(pointer.TREE_DOMAIN)
    p = parse_problem(pointer.tree_problem(tree), d)
    nodes = [o for o, t in p.objects if t == "node"]
    assert nodes == [f"t{i}" for i in range(1, 8)]
    arcs = {(a.predicate, a.args) for a in p.init if a.predicate in ("left", "right")}
    assert arcs == {("left", (f"t{i}", f"t{2 * i}")) for i in (1, 2, 3)} | \
                   {("right", (f"t{i}", f"t{2 * i + 1}")) for i in (1, 2, 3)}


def test_zero_ary_predicate_grounds_to_one_fluent():
    d = parse_domain(MINIMAL)
    p = ground(d, parse_problem("(define (problem e) (:domain tiny) (:objects a) (:init) (:goal (and (on))))", d))
    assert p.fluents == (("on",),)


def test_unary_predicate_counts_follow_declared_type():
    d = parse_domain(pointer.TREE_DOMAIN)
    p = ground(d, parse_problem(pointer.tree_problem(pointer.balanced_tree(7)), d))
    visited = [f for f in p.fluents if f[0] == "visited"]
    assert len(visited) == 7
    assign = [f for f in p.fluents if f[0] == "assign"]
    assert len(assign) == 2 * 7


def test_binary_schema_instantiation_count():
    text = """(define (domain pairs)
  (:requirements :strips :typing)
  (:types a b)
  (:predicates (r ?x - a ?y - b))
  (:action link :parameters (?x - a ?y - b) :precondition (and) :effect (and (r ?x ?y))))"""
    d = parse_domain(text)
    objs = {"a": ["a1", "a2", "a3"], "b": ["b1", "b2"]}
    prob = ("(define (problem p) (:domain pairs) (:objects a1 a2 a3 - a b1 b2 - b) "
            "(:init) (:goal (and (r a1 b2))))")
    g = ground(d, parse_problem(prob, d))
    expected = {("link", x, y) for x, y in itertools.product(objs["a"], objs["b"])}
    assert {a.name for a in g.actions} == expected
    assert all(g.fluent(("r", *a.name[1:])) in bits(a.effects[0].effect.pos) for a in g.actions)


def test_statically_false_preconditions_dropped():
    text = """(define (domain eq)
  (:requirements :strips :typing :equality)
  (:types o)
  (:predicates (mark ?x - o))
  (:action m :parameters (?x ?y - o) :precondition (and (not (= ?x ?y))) :effect (and (mark ?x))))"""
    d = parse_domain(text)
    g = ground(d, parse_problem("(define (problem p) (:domain eq) (:objects u v w - o) (:init) (:goal (and)))", d))
    assert len(g.actions) == 6
    assert all(a.name[1] != a.name[2] for a in g.actions)


@pytest.mark.criterion(7)
@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.name)
def test_generator_texts_round_trip(spec):
    gen = generate(spec)
    assert parse_domain(domain_to_text(gen.domain)) == gen.domain
    for text, ast in zip(gen.problem_texts, gen.problems):
        assert parse_problem(problem_to_text(ast), gen.domain) == ast
        p = ground(gen.domain, ast)
        assert_isomorphic(p, reparse(p))


@pytest.mark.criterion(7)
def test_compiled_problem_round_trips():
    gp = generate(DomainSpec("list", (2, 3))).gp
    cp = compile_flat(gp, 2)
    assert_isomorphic(cp.problem, reparse(cp.problem))


def test_emission_is_deterministic():
    gp = generate(DomainSpec("summatory", (1, 2))).gp
    assert emit(compile_flat(gp, 2).problem) == emit(compile_flat(gp, 2).problem)


def test_one_pcond_per_state_and_fluent():
    fl = (("f",),)
    act = GroundAction(("a",), effects=(ConditionalEffect(LiteralSet(), LiteralSet.of([0])),))
    gp = GeneralizedProblem(fl, (act,), (Instance(0, LiteralSet.of([0])),))
    d_text, _ = emit(compile_flat(gp, 2).problem)
    pconds = [line for line in d_text.splitlines() if line.strip().startswith("(:action pcond")]
    assert len(pconds) == 3 * 1


def test_empty_goal_emits_trivial_conjunct():
    p = Problem((("f",),), (), 0)
    _, p_text = emit(p)
    assert "(:goal (and (= hfsc-unit hfsc-unit)))" in p_text
    assert reparse(p).is_goal(0)


def test_grounding_soundness_on_generators():
    for spec in SPECS:
        gp = generate(spec).gp
        n = len(gp.fluents)
        for a in gp.actions:
            masks = [a.pre.pos, a.pre.neg] + [x for ce in a.effects for x in
                                              (ce.condition.pos, ce.condition.neg, ce.effect.pos, ce.effect.neg)]
            assert all(x < 1 << n for x in masks)


def test_ground_generalized_shares_tables():
    gen = generate(DomainSpec("list", (2, 4)))
    gp = ground_generalized(gen.domain, gen.problems)
    assert len(gp) == 2
    assert {f for f in gp.fluents if f[0] == "visited"} == {("visited", f"x{i}") for i in range(1, 5)}


def test_parse_plan():
    text = "; found by some planner\n(pcond q0 f)\n\n(END T1) ; trailing\n"
    assert parse_plan(text) == ["pcond_q0_f", "end_t1"]
    with pytest.raises(ValueError):
        parse_plan("pcond q0\n")

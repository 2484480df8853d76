import json

import pytest

from hfsc import fsc
from hfsc.compilation import SynthesisParams, compile_flat, compile_hier
from hfsc.decode import DecodeError, DecodingKey, DuplicateProgram, MalformedPhase, decode, decode_trace
from hfsc.domains import DomainSpec, generate, pointer, tree_dfs_controller
from hfsc.fsc import Primitive
from hfsc.model import ConditionalEffect, GeneralizedProblem, GroundAction, Instance, LiteralSet

from support import synthesize


def names_of(cp):
    return dict(zip((a.name for a in cp.problem.actions), cp.key.action_names))


def two_fluent_cp():
    fl = (("f0",), ("f1",))
    act = GroundAction(("a",), effects=(ConditionalEffect(LiteralSet(), LiteralSet.of([0])),))
    gp = GeneralizedProblem(fl, (act,), (Instance(0, LiteralSet.of([0])),))
    return compile_flat(gp, 2)


def test_program_actions_fill_the_tables():
    cp = two_fluent_cp()
    nm = names_of(cp)
    plan = [nm["pcond", "q0", "f1"], nm["pact", "q0", "b1", "a"], nm["psucc", "q0", "q1", "b1"]]
    h = decode(plan, cp.key)
    c = h.root
    assert c.gamma == {0: ("f1",)}
    assert c.phi == {(0, 1): Primitive(("a",))}
    assert c.lam == {(0, 1): 1}


def test_second_programming_of_a_slot_is_rejected():
    cp = two_fluent_cp()
    nm = names_of(cp)
    with pytest.raises(DuplicateProgram):
        decode([nm["pcond", "q0", "f1"], nm["pcond", "q0", "f0"]], cp.key)


def test_unknown_action_name():
    cp = two_fluent_cp()
    with pytest.raises(DecodeError):
        decode(["nonsense_q0"], cp.key)


def test_key_round_trip():
    gp = generate(DomainSpec("tree-dfs", (3,))).gp
    cp = compile_hier(gp, SynthesisParams(2, 1, 1, (("n",),), priors=None))
    text = cp.key.dumps()
    assert json.loads(text)["format"] == "hfsc-key-v1"
    again = DecodingKey.loads(text)
    assert again.to_dict() == cp.key.to_dict()
    assert set(again.entries) == set(cp.key.action_names)
    with pytest.raises(fsc.FormatError):
        DecodingKey.loads(json.dumps({"format": "other"}))


def test_list_round_trip_and_idempotence():
    gp = generate(DomainSpec("list", (2, 3, 4))).gp
    cp = compile_flat(gp, 2)
    syn = synthesize(cp, gp)
    assert syn.solved
    assert fsc.solves(syn.hierarchy, gp) == [fsc.Outcome.SOLVED] * 3
    assert fsc.equal(decode(syn.names, cp.key), decode(syn.names, cp.key))
    assert fsc.equal(decode(syn.names, DecodingKey.loads(cp.key.dumps())), syn.hierarchy)


def test_empty_tail_ends_at_terminal():
    gp = generate(DomainSpec("list", (2,))).gp
    cp = compile_flat(gp, 2)
    syn = synthesize(cp, gp)
    trace = decode_trace(syn.names, cp.key)
    last_esucc = max(i for i, x in enumerate(syn.names) if cp.key.entry(x).role == "esucc")
    assert last_esucc == len(syn.names) - 1
    assert cp.key.entry(syn.names[-1]).q2 == cp.key.n
    assert len(trace) == 1 and len(trace[0]) == len(fsc.execute(syn.hierarchy, gp.problem(0)).events)


def test_blocks_trace_matches_execution():
    gp = generate(DomainSpec("blocks", (2, 3), seed=1)).gp
    cp = compile_flat(gp, 3)
    syn = synthesize(cp, gp)
    assert syn.solved
    traces = decode_trace(syn.names, cp.key)
    for events, p in zip(traces, gp.problems()):
        assert events == fsc.execute(syn.hierarchy, p).events


def tree_with_fixture(k: int):
    tree = pointer.balanced_tree(k)
    spec = DomainSpec("tree-dfs", (k,), balanced_trees=True)
    gp = generate(spec).gp
    cp = compile_hier(gp, SynthesisParams(4, 1, tree.depth() + 1, (("n",),), priors=tree_dfs_controller()))
    return gp, cp


def test_hierarchical_calls_and_returns_align_with_execution():
    gp, cp = tree_with_fixture(3)
    syn = synthesize(cp, gp)
    assert syn.solved
    assert not any(cp.key.entry(x).role.startswith("p") for x in syn.names)
    roles = [cp.key.entry(x).role for x in syn.names]
    (events,) = decode_trace(syn.names, cp.key)
    ex = fsc.execute(syn.hierarchy, gp.problem(0), fsc.Limits(max_stack=cp.params.ell))
    assert events == ex.events
    kinds = [e.kind for e in events]
    assert kinds.count("call") == roles.count("ecall") > 0
    assert kinds.count("return") == roles.count("term") == kinds.count("call")


def test_reordered_phases_are_malformed():
    gp = generate(DomainSpec("list", (2,))).gp
    cp = compile_flat(gp, 2)
    syn = synthesize(cp, gp)
    names = list(syn.names)
    roles = [cp.key.entry(x).role for x in names]
    c, k = roles.index("econd"), roles.index("eact")
    swapped = list(names)
    swapped[c], swapped[k] = names[k], names[c]
    with pytest.raises(MalformedPhase):
        decode_trace(swapped, cp.key)
    s = roles.index("esucc")
    with pytest.raises(MalformedPhase):
        decode_trace(names[:s] + names[s + 1:], cp.key)


def test_zero_program_plan_returns_the_priors():
    gp, cp = tree_with_fixture(7)
    syn = synthesize(cp, gp)
    assert syn.hierarchy.controllers == tree_dfs_controller().controllers

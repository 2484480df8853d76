import random
from collections import Counter

import pytest

from hfsc import fsc
from hfsc.compilation import (CompileError, MissingAssignmentFluents, PriorConflict, SynthesisParams, changing_fluents,
                              compile_flat, compile_hier, flat_sizes, hier_sizes, inject_priors)
from hfsc.domains import DomainSpec, generate, visitall_priors
from hfsc.fsc import Call, Controller, Hierarchy, Primitive
from hfsc.model import (ConditionalEffect, GeneralizedProblem, GroundAction, Instance, LiteralSet, bits)

from micro import random_action, random_gp
from support import synthesize


def one_action_gp(num_fluents: int = 2, instances: int = 1) -> GeneralizedProblem:
    fl = tuple((f"f{i}",) for i in range(num_fluents))
    act = GroundAction(("a",), effects=(ConditionalEffect(LiteralSet(), LiteralSet.of([0])),))
    return GeneralizedProblem(fl, (act,), tuple(Instance(0, LiteralSet.of([0])) for _ in range(instances)))


def test_fluent_count_for_two_fluents_one_action_two_states():
    cp = compile_flat(one_action_gp(), 2)
    roles = Counter(n[0] for n in cp.problem.fluents)
    table = roles["cond"] + roles["succ"] + roles["act"] + roles["nocond"] + roles["noact"] + roles["nosucc"]
    aux = roles["cs"] + roles["evl"] + roles["app"] + roles["o0"] + roles["o1"]
    original = roles["f0"] + roles["f1"]
    # Q = 3: cond 3*2, succ 3*3*2, act 3*2*1, nocond 3, noact 6, nosucc 6
    assert (original, table, aux) == (2, 6 + 18 + 6 + 3 + 6 + 6, 3 + 4)
    assert len(cp.problem.fluents) == 54


def test_initial_state_holds_every_program_flag_and_q0():
    cp = compile_flat(one_action_gp(), 2)
    p = cp.problem
    init = set(p.true_names(p.init))
    for q in range(3):
        assert ("nocond", f"q{q}") in init
        for b in (0, 1):
            assert ("noact", f"q{q}", f"b{b}") in init and ("nosucc", f"q{q}", f"b{b}") in init
    assert ("cs", "q0") in init and ("cs", "q2") not in init
    assert p.goal.pos >> p.fluent(("cs", "q2")) & 1


def test_end_actions_chain_instances():
    assert compile_flat(one_action_gp(), 2).role_counts().get("end", 0) == 0
    cp = compile_flat(one_action_gp(instances=3), 2)
    assert cp.role_counts()["end"] == 2
    end1 = cp.problem.action(("end", "t1"))
    assert end1.pre.pos >> cp.problem.fluent(("inst", "t1")) & 1


def test_flat_action_preconditions():
    cp = compile_flat(one_action_gp(), 2)
    p = cp.problem

    def pre(name):
        a = p.action(name)
        return ({p.fluents[f] for f in bits(a.pre.pos)}, {p.fluents[f] for f in bits(a.pre.neg)})

    assert pre(("pcond", "q0", "f1")) == ({("cs", "q0"), ("nocond", "q0")}, set())
    assert pre(("econd", "q0", "f1")) == ({("cs", "q0"), ("cond", "q0", "f1")}, {("evl",)})
    assert pre(("pact", "q1", "b1", "a")) == ({("cs", "q1"), ("evl",), ("o1",), ("noact", "q1", "b1")}, set())
    assert pre(("eact", "q1", "b0", "a")) == ({("cs", "q1"), ("evl",), ("o0",), ("act", "q1", "b0", "a")},
                                              {("app",)})
    assert pre(("psucc", "q0", "q1", "b0")) == ({("cs", "q0"), ("evl",), ("o0",), ("app",),
                                                ("nosucc", "q0", "b0")}, set())
    esucc = p.action(("esucc", "q0", "q1", "b0"))
    eff = esucc.effects[0].effect
    assert {p.fluents[f] for f in bits(eff.pos)} == {("cs", "q1")}
    assert {p.fluents[f] for f in bits(eff.neg)} == {("cs", "q0"), ("evl",), ("o0",), ("app",)}


def test_action_precondition_is_carried_into_pact_and_eact():
    fl = (("f0",), ("f1",))
    act = GroundAction(("a",), LiteralSet.of([1]), (ConditionalEffect(LiteralSet(), LiteralSet.of([0])),))
    gp = GeneralizedProblem(fl, (act,), (Instance(0b10, LiteralSet.of([0])),))
    p = compile_flat(gp, 1).problem
    for name in (("pact", "q0", "b1", "a"), ("eact", "q0", "b1", "a")):
        assert p.action(name).pre.pos >> p.fluent(("f1",)) & 1


def strip_tags(name):
    return tuple(x for x in name if x not in ("c1", "l0"))


def test_single_controller_without_stack_matches_flat():
    gp = generate(DomainSpec("list", (2, 3))).gp
    flat = compile_flat(gp, 2)
    hier = compile_hier(gp, SynthesisParams(2))
    counts = hier.role_counts()
    assert counts.get("pcall", 0) == counts.get("ecall", 0) == counts.get("term", 0) == 0
    assert sorted(flat.key.entries.values(), key=repr) == sorted(hier.key.entries.values(), key=repr)
    fp, hp = flat.problem, hier.problem
    # level/controller markers, and call tables no action can reach without a stack
    extra = {hp.fluent(("lvl", "l0")), hp.fluent(("fsc", "c1", "l0"))}
    extra |= {f for f, n in enumerate(hp.fluents) if n[0] == "call"}
    fmap = {}
    for f, n in enumerate(hp.fluents):
        if f not in extra:
            fmap[f] = fp.fluent(strip_tags(n))
    assert len(fmap) == len(fp.fluents)

    def remap(ls: LiteralSet):
        return (frozenset(fmap[f] for f in bits(ls.pos) if f not in extra),
                frozenset(fmap[f] for f in bits(ls.neg) if f not in extra))

    def own(ls: LiteralSet):
        return frozenset(bits(ls.pos)), frozenset(bits(ls.neg))

    assert len(fp.actions) == len(hp.actions)
    for a in hp.actions:
        b = fp.action(strip_tags(a.name))
        assert remap(a.pre) == own(b.pre)
        assert {(remap(c.condition), remap(c.effect)) for c in a.effects} == \
               {(own(c.condition), own(c.effect)) for c in b.effects}
    assert remap(LiteralSet(hp.init & ~sum(1 << f for f in extra))) == own(LiteralSet(fp.init))


def test_self_calls_are_generated():
    gp = generate(DomainSpec("tree-dfs", (3,))).gp
    cp = compile_hier(gp, SynthesisParams(2, 1, 1, (("n",),)))
    assert ("pcall", "q0", "b1", "c1", "c1", "l0", "child") in cp.problem.action_index
    assert ("ecall", "q0", "b1", "c1", "c1", "l0", "child") in cp.problem.action_index
    # none from the top level
    assert not any(a.name[0] == "pcall" and "l1" in a.name for a in cp.problem.actions)


def test_ecall_copies_argument_to_callee_level():
    gp = generate(DomainSpec("tree-dfs", (3,))).gp
    cp = compile_hier(gp, SynthesisParams(2, 1, 1, (("n",),)))
    p = cp.problem
    a = p.action(("ecall", "q0", "b1", "c1", "c1", "l0", "child"))
    copies = {(p.fluents[next(bits(ce.condition.pos))], p.fluents[next(bits(ce.effect.pos))])
              for ce in a.effects if ce.condition}
    assert copies == {(("assign", "child", f"t{k}", "l0"), ("assign", "n", f"t{k}", "l1")) for k in (1, 2, 3)}
    uncond = next(ce.effect for ce in a.effects if not ce.condition)
    assert {p.fluents[f] for f in bits(uncond.pos)} == {("lvl", "l1"), ("cs", "l1", "q0"), ("fsc", "c1", "l1"),
                                                       ("app", "l0")}
    assert {p.fluents[f] for f in bits(uncond.neg)} == {("lvl", "l0")}
    term = p.action(("term", "c1", "l1"))
    cleared = {p.fluents[f] for f in bits(term.effects[0].effect.neg)}
    assert {("assign", v, f"t{k}", "l1") for v in ("n", "child") for k in (1, 2, 3)} <= cleared


def test_missing_assignment_fluents():
    gp = generate(DomainSpec("list", (2,))).gp
    broken = GeneralizedProblem(gp.fluents, gp.actions, gp.instances, gp.derived, gp.static_atoms,
                                gp.static_predicates, gp.variables + ("ghost",), gp.values)
    with pytest.raises(MissingAssignmentFluents):
        compile_hier(broken, SynthesisParams(2))


def test_bad_parameters():
    gp = generate(DomainSpec("list", (2,))).gp
    with pytest.raises(CompileError):
        compile_hier(gp, SynthesisParams(2, 1, 1, (("nope",),)))
    with pytest.raises(ValueError):
        SynthesisParams(0)
    with pytest.raises(ValueError):
        SynthesisParams(2, 2, 0, (("n",),))


def test_empty_gp_is_rejected():
    with pytest.raises(CompileError):
        compile_flat(GeneralizedProblem((("f",),), (), ()), 1)


# -- closed-form sizes ------------------------------------------------------------

def schema_sizes(F, Fa, Fd, A, n, m, ell, V, param_lengths, T):
    """Count each schema family separately: world fluents, per-controller tables,
    per-level bookkeeping, call tables; actions per controller and level."""
    Q, Qx, L = n + 1, n, ell + 1
    calls = sum(V ** k for k in param_lengths)
    world = (F - Fa - Fd) + L * Fa
    tables = m * (Q * F + Q * Q * 2 + Q * 2 * A + Q + 2 * Q + 2 * Q)
    levels = L * (Q + 4) + L + m * L
    call_tables = m * Q * 2 * calls
    fluents = world + tables + levels + call_tables + (T if T > 1 else 0)
    per_ctrl_level = (Q * F + Qx * F) + (Q * 2 * A + Qx * 2 * A) + (Q * Q * 2 + Qx * Q * 2)
    calling_levels = ell
    actions = (m * L * per_ctrl_level + m * calling_levels * (Q * 2 + Qx * 2) * calls
               + m * ell + (T - 1))
    return fluents, actions


def gp_with_assignments(rng: random.Random, nf: int, na: int, nv: int, nx: int, T: int) -> GeneralizedProblem:
    variables = tuple(f"v{i}" for i in range(nv))
    values = tuple(f"x{i}" for i in range(nx))
    fluents = tuple((f"f{i}",) for i in range(nf)) + tuple(("assign", v, x) for v in variables for x in values)
    total = len(fluents)
    actions = tuple(random_action(rng, f"a{j}", total) for j in range(na))
    inst = tuple(Instance(rng.getrandbits(total), LiteralSet.of([0])) for _ in range(T))
    return GeneralizedProblem(fluents, actions, inst, variables=variables, values=values)


@pytest.mark.criterion(7)
def test_size_formulas_on_random_shapes():
    rng = random.Random(11)
    for _ in range(20):
        nf, na = rng.randint(1, 5), rng.randint(1, 4)
        nv, nx = rng.randint(0, 2), rng.randint(1, 3)
        n, m, ell, T = rng.randint(1, 3), rng.randint(1, 3), rng.randint(0, 2), rng.randint(1, 3)
        gp = gp_with_assignments(rng, nf, na, nv, nx, T)
        params = tuple(tuple(rng.sample(gp.variables, rng.randint(0, nv))) for _ in range(m))
        cp = compile_hier(gp, SynthesisParams(n, m, ell, params))
        F, Fa = len(gp.fluents), nv * nx
        expected = schema_sizes(F, Fa, 0, na, n, m, ell, nv, [len(p) for p in params], T)
        assert (len(cp.problem.fluents), len(cp.problem.actions)) == expected
        assert hier_sizes(F, Fa, na, n, m, ell, nv, [len(p) for p in params], T) == expected
        flat = compile_flat(gp, n)
        flat_expected = schema_sizes(F, 0, 0, na, n, 1, 0, 0, [], T)
        flat_expected = (flat_expected[0] - 2, flat_expected[1])  # no lvl/fsc fluents when flat
        assert (len(flat.problem.fluents), len(flat.problem.actions)) == flat_expected
        assert flat_sizes(F, na, n, T) == flat_expected


def test_size_formula_counts_derived_fluents_as_conditions_only():
    gp = generate(DomainSpec("list", (2, 3, 4, 5))).gp
    cp = compile_flat(gp, 2)
    nd = len(gp.derived)
    assert nd > 0
    expected = schema_sizes(len(gp.fluents), 0, nd, len(gp.actions), 2, 1, 0, 0, [], len(gp))
    assert (len(cp.problem.fluents), len(cp.problem.actions)) == (expected[0] - 2, expected[1])


# -- priors ---------------------------------------------------------------------

def list_controller() -> Hierarchy:
    c = Controller(gamma={0: ("equals", "n", "n"), 1: ("equals", "n", "n")})
    c.phi = {(0, 1): Primitive(("visit", "n")), (0, 0): Primitive(("visit", "n")),
             (1, 1): Primitive(("copynext", "n", "n")), (1, 0): Primitive(("visit", "n"))}
    c.lam = {(0, 1): 1, (0, 0): 2, (1, 1): 0, (1, 0): 2}
    return Hierarchy(3, [c]).validate()


def test_empty_priors_leave_problem_unchanged():
    gp = generate(DomainSpec("list", (2,))).gp
    cp = compile_flat(gp, 2)
    injected = inject_priors(cp, Hierarchy(3, [Controller()]))
    assert injected.problem.init == cp.problem.init


def test_full_prior_needs_no_program_actions():
    gp = generate(DomainSpec("list", (2, 3))).gp
    cp = inject_priors(compile_flat(gp, 2), list_controller())
    p = cp.problem
    init = set(p.true_names(p.init))
    assert ("cond", "q0", "equals", "n", "n") in init and ("nocond", "q0") not in init
    assert ("act", "q1", "b1", "copynext", "n", "n") in init and ("noact", "q1", "b1") not in init
    syn = synthesize(cp, gp)
    assert syn.solved
    assert not any(cp.key.entry(x).role.startswith("p") for x in syn.names)
    assert syn.hierarchy.controllers == list_controller().controllers


def test_conflicting_priors():
    gp = generate(DomainSpec("list", (2,))).gp
    cp = inject_priors(compile_flat(gp, 2), list_controller())
    other = list_controller()
    other.root.phi[0, 1] = Primitive(("copynext", "n", "n"))
    with pytest.raises(PriorConflict):
        inject_priors(cp, other)
    other = list_controller()
    other.root.gamma[1] = ("visited", "x1")
    with pytest.raises(PriorConflict):
        inject_priors(cp, other)
    # re-injecting identical entries is harmless
    assert inject_priors(cp, list_controller()).problem.init == cp.problem.init
    with pytest.raises(PriorConflict):
        inject_priors(compile_flat(gp, 3), list_controller())


def test_calls_need_the_hierarchical_encoding():
    gp = generate(DomainSpec("list", (2,))).gp
    c = Controller(gamma={0: ("equals", "n", "n")}, phi={(0, 1): Call(0)}, lam={(0, 1): 1})
    with pytest.raises(PriorConflict):
        inject_priors(compile_flat(gp, 1), Hierarchy(2, [c]).validate())


def test_visitall_priors_leave_only_the_root_open():
    gp = generate(DomainSpec("visitall", (2,))).gp
    cp = compile_hier(gp, SynthesisParams(2, 3, 1, priors=visitall_priors(2)))
    p = cp.problem
    init = set(p.true_names(p.init))
    assert ("nocond", "c1", "q0") in init
    assert ("nocond", "c2", "q0") not in init and ("nocond", "c3", "q0") not in init
    assert ("call", "c2", "q0", "b0", "c2") not in init
    assert fsc.equal(cp.key.empty_hierarchy(), visitall_priors(2))


def test_random_micro_compilations_solve_when_planner_succeeds():
    solved = 0
    for seed in range(15):
        gp = random_gp(seed)
        cp = compile_flat(gp, 2)
        syn = synthesize(cp, gp, max_expansions=20_000)
        if syn.solved:
            solved += 1
            assert all(o is fsc.Outcome.SOLVED for o in fsc.solves(syn.hierarchy, gp))
    assert solved >= 5


def test_dynamic_conditions_drop_branches_on_unchanging_fluents():
    gp = generate(DomainSpec("visitall", (2, 2), seed=1, shuffle_names=True)).gp
    full = compile_hier(gp, SynthesisParams(2, 3, 1, priors=visitall_priors(2)))
    dyn = compile_hier(gp, SynthesisParams(2, 3, 1, priors=visitall_priors(2), dynamic_conditions=True))
    assert dyn.problem.fluents == full.problem.fluents
    conds = {a.name[4:] for a in dyn.problem.actions if a.name[0] == "pcond"}
    assert conds == {("at-south-edge",), ("at-east-edge",), ("at-west-edge",)} | {
        f for f in gp.fluents if f[0] in ("at", "visited")}
    assert {a.name for a in dyn.problem.actions if a.name[0] != "pcond"} == \
        {a.name for a in full.problem.actions if a.name[0] != "pcond"}


def test_dynamic_conditions_keep_flat_branches_that_change():
    gp = generate(DomainSpec("list", (2, 3))).gp
    cp = compile_flat(gp, 2, dynamic_conditions=True)
    # derived fluents stay branchable even though no action touches them
    changed = {gp.fluents[f] for f in changing_fluents(gp)} | {gp.fluents[d.fluent] for d in gp.derived}
    assert len(changed) < len(gp.fluents)
    assert {a.name[2:] for a in cp.problem.actions if a.name[0] == "pcond"} == changed
    syn = synthesize(cp, gp)
    assert syn.solved and all(o is fsc.Outcome.SOLVED for o in fsc.solves(syn.hierarchy, gp))

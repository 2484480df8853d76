"""Generators, reference solvers and hand-written controllers for the
benchmark domains."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property

from ..fsc import Call, Controller, Hierarchy, Primitive
from ..model import GeneralizedProblem, Plan, Problem
from ..pddl import DomainAst, ProblemAst, ground, ground_generalized, parse_domain, parse_problem
from . import classic, pointer

DOMAINS = ("blocks", "gripper", "list", "reverse", "summatory", "tree-dfs", "visitall")

_TEXT = {
    "blocks": classic.BLOCKS_DOMAIN,
    "gripper": classic.GRIPPER_DOMAIN,
    "list": pointer.LIST_DOMAIN,
    "reverse": pointer.REVERSE_DOMAIN,
    "summatory": pointer.SUMMATORY_DOMAIN,
    "tree-dfs": pointer.TREE_DOMAIN,
    "visitall": classic.VISITALL_DOMAIN,
}

_MIN_SIZE = {"blocks": 2}


@dataclass(frozen=True)
class DomainSpec:
    """One instance per entry of ``sizes``. What a size means depends on the
    domain: list length, tower height, ball count, summatory input, tree node
    count, grid side."""

    name: str
    sizes: tuple[int, ...] = (3,)
    seed: int = 0
    balanced_trees: bool = False
    # blocks/gripper/visitall: permute object names per instance
    shuffle_names: bool = False
    # visitall: number of cells visited up front (random when None)
    previsited: int | None = None

    def __post_init__(self):
        if self.name not in DOMAINS:
            raise ValueError(f"unknown domain {self.name!r}; expected one of {', '.join(DOMAINS)}")
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if not self.sizes:
            raise ValueError("need at least one instance size")
        lo = _MIN_SIZE.get(self.name, 1)
        if any(k < lo for k in self.sizes):
            raise ValueError(f"{self.name} sizes must be >= {lo}")

    def rng(self, t: int) -> random.Random:
        return random.Random(f"{self.name}:{self.seed}:{t}")

    def tree(self, t: int) -> pointer.Tree:
        k = self.sizes[t]
        if self.balanced_trees:
            return pointer.balanced_tree(k)
        return pointer.random_tree(k, self.rng(t).randrange(2**31))

    def green(self, t: int) -> int:
        return self.rng(t).randint(2, self.sizes[t])


@dataclass
class Generated:
    spec: DomainSpec
    domain_text: str
    problem_texts: list[str]
    domain: DomainAst = field(repr=False)
    problems: list[ProblemAst] = field(repr=False)

    @cached_property
    def gp(self) -> GeneralizedProblem:
        return ground_generalized(self.domain, self.problems)

    def problem(self, t: int) -> Problem:
        """Instance ``t`` grounded on its own (cheaper than the shared table)."""
        return ground(self.domain, self.problems[t])


def _problem_text(spec: DomainSpec, t: int, top: int | None) -> str:
    k = spec.sizes[t]
    name = f"{spec.name}-{t + 1}"
    if spec.name == "list":
        return pointer.list_problem(k, name)
    if spec.name == "tree-dfs":
        return pointer.tree_problem(spec.tree(t), name)
    if spec.name == "reverse":
        return pointer.reverse_problem(k, name)
    if spec.name == "summatory":
        return pointer.summatory_problem(k, top, name)
    if spec.name == "blocks":
        names_seed = random.Random(f"names:{spec.seed}:{t}").randrange(2**31) if spec.shuffle_names else None
        return classic.blocks_problem(k, spec.green(t), name, names_seed)
    if spec.name == "gripper":
        return classic.gripper_problem(k, name, spec.rng(t).randrange(2**31) if spec.shuffle_names else None)
    return classic.visitall_problem(k, spec.rng(t).randrange(2**31), spec.previsited, name=name,
                                    shuffle_names=spec.shuffle_names)


def generate(spec: DomainSpec) -> Generated:
    """Domain text, one problem text per size, and their parses. Summatory
    instances share one value range so that its arithmetic stays static."""
    top = max(max(pointer.triangular(k), k) for k in spec.sizes) if spec.name == "summatory" else None
    dom_text = _TEXT[spec.name]
    texts = [_problem_text(spec, t, top) for t in range(len(spec.sizes))]
    dom = parse_domain(dom_text)
    return Generated(spec, dom_text, texts, dom, [parse_problem(x, dom) for x in texts])


@dataclass
class OracleSolution:
    problem: Problem
    plan: Plan
    visit_order: list[str] = field(default_factory=list)


def oracle_solve(spec: DomainSpec, t: int = 0) -> OracleSolution:
    """Hand-rolled solution of instance ``t``.

    Tree-dfs plans need one pointer per depth to stay stack-free, so that
    instance is re-generated with depth variables and the returned problem is
    that variant.
    """
    k = spec.sizes[t]
    if spec.name == "tree-dfs":
        tree = spec.tree(t)
        dom = parse_domain(pointer.TREE_DOMAIN)
        text = pointer.tree_problem(tree, variables=pointer.tree_scratch_variables(tree))
        p = ground(dom, parse_problem(text, dom))
        return OracleSolution(p, Plan.from_names(p, pointer.tree_oracle(tree)),
                              [f"t{x}" for x in tree.preorder()])
    dom = parse_domain(_TEXT[spec.name])
    p = ground(dom, parse_problem(_problem_text(spec, t, None), dom))
    steps = {
        "list": lambda: pointer.list_oracle(k),
        "reverse": lambda: pointer.reverse_oracle(k),
        "summatory": lambda: pointer.summatory_oracle(k),
        "blocks": lambda: classic.blocks_oracle(k, spec.green(t)),
        "gripper": lambda: classic.gripper_oracle(k),
        "visitall": lambda: classic.visitall_oracle(k),
    }[spec.name]()
    return OracleSolution(p, Plan.from_names(p, steps))


# -- hand-written controllers -------------------------------------------------

def tree_dfs_controller() -> Hierarchy:
    """Recursive DFS: visit n, recurse on its left child, then continue with
    its right child in the same frame."""
    nn = ("equals", "n", "n")
    c = Controller(("n",))
    c.gamma = {0: nn, 1: nn, 2: nn, 3: nn}
    c.phi = {
        (0, 1): Primitive(("visit", "n")),
        (0, 0): Primitive(("visit", "child")),
        (1, 1): Primitive(("copyl", "n", "child")),
        (2, 1): Call(0, ("child",)),
        (3, 1): Primitive(("copyr", "n", "n")),
    }
    c.lam = {(0, 1): 1, (0, 0): 4, (1, 1): 2, (2, 1): 3, (3, 1): 0}
    return Hierarchy(5, [c], pointer.TREE_VARIABLES, (), "assign").validate()


def visitall_priors(n: int = 2) -> Hierarchy:
    """Root left empty; C2 sweeps a row eastwards, C3 returns west and steps
    south. Controllers share states q0..q<n>."""
    if n < 2:
        raise ValueError("the row sweep needs two states")
    row = Controller()
    row.gamma = {0: ("at-east-edge",), 1: ("at-east-edge",)}
    row.phi = {(0, 0): Primitive(("visit",)), (0, 1): Primitive(("visit",)),
               (1, 0): Primitive(("move-east",)), (1, 1): Primitive(("visit",))}
    row.lam = {(0, 0): 1, (0, 1): 1, (1, 0): 0, (1, 1): n}
    col = Controller()
    col.gamma = {0: ("at-west-edge",)}
    col.phi = {(0, 0): Primitive(("move-west",)), (0, 1): Primitive(("move-south",))}
    col.lam = {(0, 0): 0, (0, 1): n}
    return Hierarchy(n + 1, [Controller(), row, col]).validate()


def visitall_hierarchy(n: int = 2) -> Hierarchy:
    """Priors plus a root that alternates row sweeps and column returns."""
    h = visitall_priors(n)
    root = h.controllers[0]
    root.gamma = {0: ("at-south-edge",), 1: ("at-south-edge",)}
    root.phi = {(0, 0): Call(1), (0, 1): Call(1), (1, 0): Call(2), (1, 1): Call(2)}
    root.lam = {(0, 0): 1, (0, 1): n, (1, 0): 0, (1, 1): 0}
    return h.validate()

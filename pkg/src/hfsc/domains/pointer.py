"""Pointer-style domains: variables hold node values through ``assign(v, x)``.

Null is the empty assignment; ``equals(v, v)`` holds iff ``v`` is not null.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .text import EQUALS, REQUIREMENTS, atom, copy_action, problem


# -- list -----------------------------------------------------------------

LIST_DOMAIN = f"""(define (domain list)
  {REQUIREMENTS}
  (:types var node)
  (:predicates (assign ?v - var ?x - node) (next ?x ?y - node) (visited ?x - node))
{EQUALS.format(t="node")}
  (:action visit
    :parameters (?v - var)
    :precondition (and)
    :effect (forall (?x - node) (when (assign ?v ?x) (visited ?x))))
{copy_action("copynext", "next", "node")}
)
"""


def list_problem(k: int, name: str = "") -> str:
    nodes = [f"x{i}" for i in range(1, k + 1)]
    init = [atom("assign", "n", nodes[0])] + [atom("next", a, b) for a, b in zip(nodes, nodes[1:])]
    goal = [atom("visited", x) for x in nodes]
    return problem(name or f"list-{k}", "list", [(["n"], "var"), (nodes, "node")], init, goal)


def list_oracle(k: int) -> list[tuple[str, ...]]:
    plan = []
    for _ in range(k):
        plan += [("visit", "n"), ("copynext", "n", "n")]
    return plan


# -- binary trees ---------------------------------------------------------

@dataclass(frozen=True)
class Tree:
    """Nodes are ``t1..tk`` with ``t1`` the root."""

    size: int
    left: dict[int, int]
    right: dict[int, int]

    def children(self, x: int) -> list[int]:
        return [c for c in (self.left.get(x), self.right.get(x)) if c is not None]

    def depth(self) -> int:
        def d(x: int) -> int:
            return 1 + max((d(c) for c in self.children(x)), default=0)
        return d(1)

    def preorder(self) -> list[int]:
        out, stack = [], [1]
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(reversed(self.children(x)))
        return out


def balanced_tree(k: int) -> Tree:
    """Heap-shaped tree; ``k = 7`` is the complete tree of depth 3."""
    left = {i: 2 * i for i in range(1, k + 1) if 2 * i <= k}
    right = {i: 2 * i + 1 for i in range(1, k + 1) if 2 * i + 1 <= k}
    return Tree(k, left, right)


def random_tree(k: int, seed: int) -> Tree:
    rng = random.Random(seed)
    left: dict[int, int] = {}
    right: dict[int, int] = {}
    free = [(1, "l"), (1, "r")]
    for x in range(2, k + 1):
        parent, side = free.pop(rng.randrange(len(free)))
        (left if side == "l" else right)[parent] = x
        free += [(x, "l"), (x, "r")]
    return Tree(k, left, right)


TREE_DOMAIN = f"""(define (domain tree-dfs)
  {REQUIREMENTS}
  (:types var node)
  (:predicates (assign ?v - var ?x - node) (left ?x ?y - node) (right ?x ?y - node) (visited ?x - node))
{EQUALS.format(t="node")}
  (:action visit
    :parameters (?v - var)
    :precondition (and)
    :effect (forall (?x - node) (when (assign ?v ?x) (visited ?x))))
{copy_action("copyl", "left", "node")}
{copy_action("copyr", "right", "node")}
)
"""

TREE_VARIABLES = ("n", "child")


def tree_problem(tree: Tree, name: str = "", variables: tuple[str, ...] = TREE_VARIABLES) -> str:
    nodes = [f"t{i}" for i in range(1, tree.size + 1)]
    init = [atom("assign", variables[0], "t1")]
    init += [atom("left", f"t{a}", f"t{b}") for a, b in sorted(tree.left.items())]
    init += [atom("right", f"t{a}", f"t{b}") for a, b in sorted(tree.right.items())]
    goal = [atom("visited", x) for x in nodes]
    return problem(name or f"tree-{tree.size}", "tree-dfs", [(list(variables), "var"), (nodes, "node")], init, goal)


def tree_scratch_variables(tree: Tree) -> tuple[str, ...]:
    """One variable per depth: enough for a stack-free ground plan."""
    return tuple(f"d{i}" for i in range(tree.depth()))


def tree_oracle(tree: Tree) -> list[tuple[str, ...]]:
    """Recursive DFS over the depth variables of ``tree_scratch_variables``."""
    plan: list[tuple[str, ...]] = []

    def rec(x: int, d: int) -> None:
        plan.append(("visit", f"d{d}"))
        if x in tree.left:
            plan.append(("copyl", f"d{d}", f"d{d + 1}"))
            rec(tree.left[x], d + 1)
        if x in tree.right:
            plan.append(("copyr", f"d{d}", f"d{d + 1}"))
            rec(tree.right[x], d + 1)

    rec(1, 0)
    return plan


# -- reverse --------------------------------------------------------------

REVERSE_DOMAIN = f"""(define (domain reverse)
  {REQUIREMENTS}
  (:types var pos elem)
  (:predicates (assign ?v - var ?x - pos) (next ?x ?y - pos) (val ?x - pos ?e - elem))
{EQUALS.format(t="pos")}
  (:action swap
    :parameters (?v ?w - var)
    :precondition (and)
    :effect (forall (?x ?y - pos ?a ?b - elem)
      (when (and (assign ?v ?x) (assign ?w ?y) (val ?x ?a) (val ?y ?b) (not (= ?x ?y)))
        (and (not (val ?x ?a)) (not (val ?y ?b)) (val ?x ?b) (val ?y ?a)))))
{copy_action("copynext", "next", "pos")}
{copy_action("copyprev", "next", "pos", reverse=True)}
)
"""


def reverse_problem(k: int, name: str = "") -> str:
    ps = [f"p{i}" for i in range(1, k + 1)]
    es = [f"e{i}" for i in range(1, k + 1)]
    init = [atom("assign", "i", ps[0]), atom("assign", "j", ps[-1])]
    init += [atom("next", a, b) for a, b in zip(ps, ps[1:])]
    init += [atom("val", p, e) for p, e in zip(ps, es)]
    goal = [atom("val", p, e) for p, e in zip(ps, reversed(es))]
    return problem(name or f"reverse-{k}", "reverse", [(["i", "j"], "var"), (ps, "pos"), (es, "elem")], init, goal)


def reverse_oracle(k: int) -> list[tuple[str, ...]]:
    plan = []
    lo, hi = 1, k
    while lo < hi:
        plan += [("swap", "i", "j"), ("copynext", "i", "i"), ("copyprev", "j", "j")]
        lo, hi = lo + 1, hi - 1
    return plan


# -- summatory ------------------------------------------------------------

SUMMATORY_DOMAIN = f"""(define (domain summatory)
  {REQUIREMENTS}
  (:types var num)
  (:predicates (assign ?v - var ?x - num) (sum ?x ?y ?z - num) (succ ?x ?y - num))
{EQUALS.format(t="num")}
  (:action add
    :parameters (?d ?s - var)
    :precondition (and)
    :effect (forall (?x ?y ?z - num)
      (when (and (sum ?x ?y ?z) (assign ?d ?x) (assign ?s ?y))
        (and (not (assign ?d ?x)) (assign ?d ?z)))))
  (:action dec
    :parameters (?v - var)
    :precondition (and)
    :effect (forall (?x ?y - num)
      (when (and (succ ?y ?x) (assign ?v ?x))
        (and (not (assign ?v ?x)) (assign ?v ?y)))))
)
"""


def triangular(k: int) -> int:
    return k * (k + 1) // 2


def summatory_problem(k: int, top: int | None = None, name: str = "") -> str:
    """Compute ``1 + ... + k`` into ``s``; values are ``v0..v<top>``."""
    top = max(triangular(k), k) if top is None else top
    vs = [f"v{i}" for i in range(top + 1)]
    init = [atom("assign", "a", f"v{k}"), atom("assign", "s", "v0")]
    init += [atom("succ", f"v{i}", f"v{i + 1}") for i in range(top)]
    # y >= 1 only: adding zero leaves the accumulator alone
    init += [atom("sum", f"v{x}", f"v{y}", f"v{x + y}")
             for x in range(top + 1) for y in range(1, top + 1 - x)]
    goal = [atom("assign", "s", f"v{triangular(k)}")]
    return problem(name or f"summatory-{k}", "summatory", [(["a", "s"], "var"), (vs, "num")], init, goal)


def summatory_oracle(k: int) -> list[tuple[str, ...]]:
    plan = []
    for _ in range(k):
        plan += [("add", "s", "a"), ("dec", "a")]
    return plan

"""Blocks (single tower), Gripper and Visitall with size-independent actions."""

from __future__ import annotations

import random

from .text import atom, problem

_REQ = "(:requirements :strips :typing :negative-preconditions :conditional-effects)"

# -- blocks ---------------------------------------------------------------

BLOCKS_DOMAIN = f"""(define (domain blocks)
  {_REQ}
  (:types var block)
  (:predicates (assign ?v - var ?x - block) (on ?x ?y - block) (ontable ?x - block)
               (green ?x - block) (holding ?x - block) (handempty) (topgreen))
  (:action unstack
    :parameters (?v - var)
    :precondition (and (handempty))
    :effect (and
      (forall (?x ?y - block) (when (and (assign ?v ?x) (on ?x ?y))
        (and (not (on ?x ?y)) (holding ?x) (not (assign ?v ?x)) (assign ?v ?y) (not (handempty)))))
      (forall (?x ?y - block) (when (and (assign ?v ?x) (on ?x ?y) (green ?y)) (topgreen)))
      (forall (?x ?y - block) (when (and (assign ?v ?x) (on ?x ?y) (not (green ?y))) (not (topgreen))))
      (forall (?x - block) (when (and (assign ?v ?x) (ontable ?x))
        (and (not (ontable ?x)) (holding ?x) (not (assign ?v ?x)) (not (handempty)) (not (topgreen)))))))
  (:action putdown
    :parameters ()
    :precondition (and (not (handempty)))
    :effect (and (handempty)
      (forall (?x - block) (when (holding ?x) (and (not (holding ?x)) (ontable ?x))))))
)
"""


def blocks_problem(k: int, green: int, name: str = "", seed: int | None = None) -> str:
    """A single tower of ``k`` blocks whose ``green``-th block from the top
    (green >= 2) is green. Blocks are ``b1`` (top) .. ``bk`` unless ``seed``
    shuffles the names."""
    if not 2 <= green <= k:
        raise ValueError("the green block must lie strictly below the top")
    bs = [f"b{i}" for i in range(1, k + 1)]
    if seed is not None:
        random.Random(seed).shuffle(bs)
    init = [atom("assign", "top", bs[0]), atom("handempty"), atom("ontable", bs[-1]), atom("green", bs[green - 1])]
    init += [atom("on", a, b) for a, b in zip(bs, bs[1:])]
    return problem(name or f"blocks-{k}-{green}", "blocks", [(["top"], "var"), (bs, "block")], init,
                   [atom("topgreen"), atom("handempty")])


def blocks_oracle(k: int, green: int) -> list[tuple[str, ...]]:
    return [("unstack", "top"), ("putdown",)] * (green - 1)


# -- gripper --------------------------------------------------------------

GRIPPER_DOMAIN = f"""(define (domain gripper)
  {_REQ}
  (:types ball)
  (:predicates (at-a ?x - ball) (at-b ?x - ball) (carry ?x - ball) (first ?x - ball)
               (next ?x ?y - ball) (last ?x - ball) (robby-at-a) (handfree) (empty-a))
  (:action pick
    :parameters ()
    :precondition (and (robby-at-a) (handfree) (not (empty-a)))
    :effect (and (not (handfree))
      (forall (?x - ball) (when (first ?x) (and (carry ?x) (not (at-a ?x)) (not (first ?x)))))
      (forall (?x ?y - ball) (when (and (first ?x) (next ?x ?y)) (first ?y)))
      (forall (?x - ball) (when (and (first ?x) (last ?x)) (empty-a)))))
  (:action move
    :parameters ()
    :precondition (and)
    :effect (and (when (robby-at-a) (not (robby-at-a))) (when (not (robby-at-a)) (robby-at-a))))
  (:action drop
    :parameters ()
    :precondition (and (not (robby-at-a)) (not (handfree)))
    :effect (and (handfree)
      (forall (?x - ball) (when (carry ?x) (and (not (carry ?x)) (at-b ?x))))))
)
"""


def gripper_problem(k: int, name: str = "", seed: int | None = None) -> str:
    """Balls are queued in room A; with ``seed`` their names are shuffled."""
    bs = [f"ball{i}" for i in range(1, k + 1)]
    if seed is not None:
        random.Random(seed).shuffle(bs)
    init = [atom("robby-at-a"), atom("handfree"), atom("first", bs[0]), atom("last", bs[-1])]
    init += [atom("at-a", b) for b in bs] + [atom("next", a, b) for a, b in zip(bs, bs[1:])]
    return problem(name or f"gripper-{k}", "gripper", [(bs, "ball")], init, [atom("at-b", b) for b in bs])


def gripper_oracle(k: int) -> list[tuple[str, ...]]:
    plan: list[tuple[str, ...]] = []
    for i in range(k):
        plan += [("pick",), ("move",), ("drop",)]
        if i < k - 1:
            plan.append(("move",))
    return plan


# -- visitall -------------------------------------------------------------

VISITALL_DOMAIN = f"""(define (domain visitall)
  {_REQ}
  (:types cell)
  (:predicates (at ?x - cell) (visited ?x - cell) (east ?x ?y - cell) (south ?x ?y - cell)
               (eastcol ?x - cell) (westcol ?x - cell) (southrow ?x - cell)
               (at-east-edge) (at-west-edge) (at-south-edge))
  (:action visit
    :parameters ()
    :precondition (and)
    :effect (forall (?x - cell) (when (at ?x) (visited ?x))))
  (:action move-east
    :parameters ()
    :precondition (and)
    :effect (and
      (forall (?x ?y - cell) (when (and (east ?x ?y) (at ?x)) (and (not (at ?x)) (at ?y))))
      (forall (?x ?y - cell) (when (and (east ?x ?y) (at ?x) (eastcol ?y)) (at-east-edge)))
      (forall (?x ?y - cell) (when (and (east ?x ?y) (at ?x) (not (westcol ?y))) (not (at-west-edge))))))
  (:action move-west
    :parameters ()
    :precondition (and)
    :effect (and
      (forall (?x ?y - cell) (when (and (east ?y ?x) (at ?x)) (and (not (at ?x)) (at ?y))))
      (forall (?x ?y - cell) (when (and (east ?y ?x) (at ?x) (westcol ?y)) (at-west-edge)))
      (forall (?x ?y - cell) (when (and (east ?y ?x) (at ?x) (not (eastcol ?y))) (not (at-east-edge))))))
  (:action move-south
    :parameters ()
    :precondition (and)
    :effect (and
      (forall (?x ?y - cell) (when (and (south ?x ?y) (at ?x)) (and (not (at ?x)) (at ?y))))
      (forall (?x ?y - cell) (when (and (south ?x ?y) (at ?x) (southrow ?y)) (at-south-edge)))))
)
"""


def _cell_namer(side: int, shuffle: random.Random | None):
    if shuffle is None:
        return lambda r, c: f"c{r}-{c}"
    ids = list(range(side * side))
    shuffle.shuffle(ids)
    return lambda r, c: f"c{ids[(r - 1) * side + c - 1]}"


def visitall_problem(side: int, seed: int = 0, previsited: int | None = None, name: str = "",
                     shuffle_names: bool = False) -> str:
    """``side x side`` grid, agent in the north-west corner; a random subset of
    cells (never the start) is already visited. Shuffled names keep position
    tests like ``at(c2-1)`` from meaning the same cell in every instance."""
    rng = random.Random(seed)
    cell = _cell_namer(side, random.Random(rng.random()) if shuffle_names else None)
    cells = [cell(r, c) for r in range(1, side + 1) for c in range(1, side + 1)]
    k = rng.randrange(side * side // 2 + 1) if previsited is None else previsited
    pre = rng.sample(cells[1:], min(k, len(cells) - 1))
    init = [atom("at", cell(1, 1)), atom("at-west-edge")]
    if side == 1:
        init += [atom("at-east-edge"), atom("at-south-edge")]
    for r in range(1, side + 1):
        for c in range(1, side + 1):
            if c < side:
                init.append(atom("east", cell(r, c), cell(r, c + 1)))
            if r < side:
                init.append(atom("south", cell(r, c), cell(r + 1, c)))
            if c == side:
                init.append(atom("eastcol", cell(r, c)))
            if c == 1:
                init.append(atom("westcol", cell(r, c)))
            if r == side:
                init.append(atom("southrow", cell(r, c)))
    init += [atom("visited", x) for x in sorted(pre)]
    return problem(name or f"visitall-{side}-{seed}", "visitall", [(cells, "cell")], init,
                   [atom("visited", x) for x in cells])


def visitall_oracle(side: int) -> list[tuple[str, ...]]:
    plan: list[tuple[str, ...]] = []
    for r in range(side):
        for c in range(side):
            plan.append(("visit",))
            if c < side - 1:
                plan.append(("move-east",))
        if r < side - 1:
            plan += [("move-west",)] * (side - 1) + [("move-south",)]
    return plan

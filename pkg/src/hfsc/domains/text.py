"""Small helpers for writing PDDL problem text."""

from __future__ import annotations

from typing import Iterable, Sequence

REQUIREMENTS = "(:requirements :strips :typing :negative-preconditions :conditional-effects :equality :derived-predicates)"

EQUALS = """  (:derived (equals ?v ?w - var)
    (exists (?x - {t}) (and (assign ?v ?x) (assign ?w ?x))))"""


def copy_action(name: str, rel: str, value_type: str, reverse: bool = False) -> str:
    """``w := rel(v)``; ``w`` ends up unassigned when ``v`` has no successor."""
    r1 = f"({rel} ?y ?x)" if reverse else f"({rel} ?x ?y)"
    r2 = f"({rel} ?z ?x)" if reverse else f"({rel} ?x ?z)"
    t = value_type
    return f"""  (:action {name}
    :parameters (?v ?w - var)
    :precondition (and)
    :effect (and
      (forall (?x ?y - {t}) (when (and (assign ?v ?x) {r1}) (assign ?w ?y)))
      (forall (?x ?z - {t}) (when (and (assign ?v ?x) (assign ?w ?z) (not {r2})) (not (assign ?w ?z))))))"""


def atom(*parts: str) -> str:
    return "(" + " ".join(parts) + ")"


def problem(name: str, domain: str, objects: Sequence[tuple[Iterable[str], str]],
            init: Iterable[str], goal: Iterable[str]) -> str:
    objs = " ".join(" ".join(names) + f" - {t}" for names, t in objects if list(names))
    init_s = "\n    ".join(init)
    goal_s = " ".join(goal)
    return (f"(define (problem {name})\n  (:domain {domain})\n  (:objects {objs})\n"
            f"  (:init\n    {init_s})\n  (:goal (and {goal_s})))\n")

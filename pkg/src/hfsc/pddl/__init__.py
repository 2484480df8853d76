"""Typed STRIPS reader, grounder and writer."""

from .ast import ActionSchema, Atom, DomainAst, Forall, Lit, PredicateSchema, ProblemAst, TypedVar, When
from .emit import EMIT_REQUIREMENTS, domain_to_text, emit, parse_plan, pddl_names, problem_to_text
from .ground import ground, ground_generalized
from .parser import PDDLError, PDDLSyntaxError, UnsupportedRequirement, parse_domain, parse_problem

__all__ = [
    "ActionSchema", "Atom", "DomainAst", "Forall", "Lit", "PredicateSchema", "ProblemAst", "TypedVar", "When",
    "EMIT_REQUIREMENTS", "domain_to_text", "emit", "parse_plan", "pddl_names", "problem_to_text",
    "ground", "ground_generalized",
    "PDDLError", "PDDLSyntaxError", "UnsupportedRequirement", "parse_domain", "parse_problem",
]

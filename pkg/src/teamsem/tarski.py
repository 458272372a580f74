"""Reference Tarskian evaluator over finite structures.

This is the trusted kernel: plain recursive evaluation with no indexing
or caching, optimized for auditability.  It backs literal evaluation in
the team evaluator, first-order-defined dependencies, DED / U-sentence
checks, and every brute-force oracle.
"""

from __future__ import annotations

from typing import Mapping

from .errors import DomainError
from .structures import Element, Structure
from .syntax import (And, Eq, Exists, Forall, Formula, GlobalOr, Hook,
                     Implies, Not, Or, RelAtom, Term, Var,
                     has_dependency_atoms)


def resolve_term(structure: Structure, assignment: Mapping[str, Element],
                 term: Term) -> Element:
    if isinstance(term, Var):
        try:
            return assignment[term.name]
        except KeyError:
            raise DomainError(f"unbound variable {term.name!r}") from None
    return structure.constant(term.name)


def tarski_eval(structure: Structure, assignment: Mapping[str, Element],
                phi: Formula) -> bool:
    """Standard inductive first-order satisfaction at a single assignment.

    Quantifiers range over the structure's domain.  Global disjunction
    collapses to classical disjunction and the hook to classical
    implication; both are team-neutral at a single assignment.  Dependency
    atoms are rejected.
    """
    if isinstance(phi, RelAtom):
        rel = structure.relation(phi.name)
        if len(phi.terms) != rel.arity:
            raise DomainError(f"relation {phi.name} has arity {rel.arity}, "
                              f"applied to {len(phi.terms)} terms")
        t = tuple(resolve_term(structure, assignment, x) for x in phi.terms)
        return (t in rel.tuples) == phi.positive
    if isinstance(phi, Eq):
        same = (resolve_term(structure, assignment, phi.left)
                == resolve_term(structure, assignment, phi.right))
        return same == phi.positive
    if isinstance(phi, And):
        return (tarski_eval(structure, assignment, phi.left)
                and tarski_eval(structure, assignment, phi.right))
    if isinstance(phi, (Or, GlobalOr)):
        return (tarski_eval(structure, assignment, phi.left)
                or tarski_eval(structure, assignment, phi.right))
    if isinstance(phi, Not):
        return not tarski_eval(structure, assignment, phi.body)
    if isinstance(phi, Implies):
        return (not tarski_eval(structure, assignment, phi.left)
                or tarski_eval(structure, assignment, phi.right))
    if isinstance(phi, Hook):
        return (not tarski_eval(structure, assignment, phi.guard)
                or tarski_eval(structure, assignment, phi.body))
    if isinstance(phi, Exists):
        local = dict(assignment)
        for m in structure.domain:
            local[phi.var] = m
            if tarski_eval(structure, local, phi.body):
                return True
        return False
    if isinstance(phi, Forall):
        local = dict(assignment)
        for m in structure.domain:
            local[phi.var] = m
            if not tarski_eval(structure, local, phi.body):
                return False
        return True
    if has_dependency_atoms(phi):
        raise TypeError("the Tarskian evaluator takes dependency-free formulas")
    raise TypeError(f"not a formula: {phi!r}")


def tarski_sentence(structure: Structure, phi: Formula) -> bool:
    """Satisfaction of a sentence; the assignment is irrelevant."""
    return tarski_eval(structure, {}, phi)

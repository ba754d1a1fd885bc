"""Finite-model truth evaluation for FOL formulas and constraint ASTs.

Two deliberately separate evaluators: one walks the FOL surface AST, the
other walks the compiled constraint AST.  Agreement between them over
exhaustively enumerated small models is the correctness oracle for the
FOL compiler.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import chain, combinations, product

from . import core, fol


@dataclass(frozen=True)
class Interpretation:
    """A finite model: a universe of objects plus concept/role extensions."""

    universe: tuple[int, ...]
    concept_ext: dict[str, frozenset[int]] = field(default_factory=dict)
    role_ext: dict[str, frozenset[tuple[int, int]]] = field(default_factory=dict)

    def holds(self, name: str, args: tuple[int, ...]) -> bool:
        if len(args) == 1:
            return args[0] in self.concept_ext.get(name, frozenset())
        if len(args) == 2:
            return (args[0], args[1]) in self.role_ext.get(name, frozenset())
        raise ValueError(f"predicate {name!r} with unsupported arity {len(args)}")


def eval_fol(node: fol.FNode, interp: Interpretation, env: dict[str, int] | None = None) -> bool:
    env = env or {}

    def term_value(t: fol.Term) -> int:
        if t.args is not None:
            raise ValueError(f"function symbol {t.name!r} has no finite-model semantics here")
        return env[t.name]

    if isinstance(node, fol.FAtom):
        return interp.holds(node.name, tuple(term_value(t) for t in node.args))
    if isinstance(node, fol.FEq):
        return term_value(node.lhs) == term_value(node.rhs)
    if isinstance(node, fol.FNot):
        return not eval_fol(node.child, interp, env)
    if isinstance(node, fol.FAnd):
        return all(eval_fol(c, interp, env) for c in node.children)
    if isinstance(node, fol.FOr):
        return any(eval_fol(c, interp, env) for c in node.children)
    if isinstance(node, fol.FImplies):
        return (not eval_fol(node.lhs, interp, env)) or eval_fol(node.rhs, interp, env)
    if isinstance(node, fol.FIff):
        return eval_fol(node.lhs, interp, env) == eval_fol(node.rhs, interp, env)
    if isinstance(node, fol.FCount):
        hits = sum(eval_fol(c, interp, env) for c in node.children)
        if node.mode == "exactly":
            return hits == node.k
        if node.mode == "at_most":
            return hits <= node.k
        return hits >= node.k
    if isinstance(node, fol.FQuant):
        domain = (interp.concept_ext.get(node.domain, frozenset())
                  if node.domain is not None else interp.universe)
        results = (eval_fol(node.body, interp, {**env, node.var: obj}) for obj in domain)
        return all(results) if node.quantifier == "forall" else any(results)
    raise TypeError(f"unhandled FOL node {type(node).__name__}")


def eval_constraint(node: core.CNode, interp: Interpretation,
                    env: dict[str, int] | None = None) -> bool:
    env = env or {}
    if isinstance(node, core.Predicate):
        return interp.holds(node.name, tuple(env[v] for v in node.args))
    if isinstance(node, core.Not):
        return not eval_constraint(node.child, interp, env)
    if isinstance(node, core.And):
        return all(eval_constraint(c, interp, env) for c in node.children)
    if isinstance(node, core.Or):
        return any(eval_constraint(c, interp, env) for c in node.children)
    if isinstance(node, core.Implies):
        return (not eval_constraint(node.lhs, interp, env)) or eval_constraint(node.rhs, interp, env)
    if isinstance(node, core.Iff):
        return eval_constraint(node.lhs, interp, env) == eval_constraint(node.rhs, interp, env)
    if isinstance(node, core.ExactlyK):
        return sum(eval_constraint(c, interp, env) for c in node.children) == node.k
    if isinstance(node, core.AtMostK):
        return sum(eval_constraint(c, interp, env) for c in node.children) <= node.k
    if isinstance(node, core.AtLeastK):
        return sum(eval_constraint(c, interp, env) for c in node.children) >= node.k
    if isinstance(node, (core.ForAll, core.Exists)):
        domain = interp.concept_ext.get(node.domain, frozenset())
        results = (eval_constraint(node.body, interp, {**env, node.var: obj}) for obj in domain)
        return all(results) if isinstance(node, core.ForAll) else any(results)
    raise TypeError(f"unhandled constraint node {type(node).__name__}")


def _powerset(items: tuple[int, ...]):
    return chain.from_iterable(combinations(items, r) for r in range(len(items) + 1))


def enumerate_interpretations(concepts: list[str], n_objects: int,
                              roles: list[str] | None = None):
    """All models over `n_objects` objects: every concept extension varies over
    the full powerset; role extensions (when any) vary over all pair subsets.

    Exponential by design; callers keep concepts/objects small.
    """
    universe = tuple(range(n_objects))
    concept_choices = [list(_powerset(universe)) for _ in concepts]
    pairs = tuple(product(universe, universe))
    role_choices = [list(_powerset(pairs)) for _ in (roles or [])]
    for concept_ext in product(*concept_choices):
        base = {c: frozenset(ext) for c, ext in zip(concepts, concept_ext)}
        if not roles:
            yield Interpretation(universe, base)
            continue
        for role_ext in product(*role_choices):
            yield Interpretation(universe, base,
                                 {r: frozenset(ext) for r, ext in zip(roles, role_ext)})

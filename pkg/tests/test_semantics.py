"""Finite-model evaluation: both evaluators on known models, the compiler
equivalence oracle, and cardinality identities."""

import pytest

from dkg import core, fol
from dkg.semantics import (Interpretation, enumerate_interpretations,
                           eval_constraint, eval_fol)

from fol_cases import CASE_GRAPH, EQUIVALENCE_CASES


def parse(text):
    ast, diags = fol.parse_fol(text)
    assert diags == []
    return ast


def lower(text):
    node, diags = fol.lower_fol(parse(text))
    assert node is not None, diags
    return node


MODEL = Interpretation(
    universe=(0, 1, 2),
    concept_ext={"item": frozenset({0, 1}), "a": frozenset({0}),
                 "b": frozenset({1})},
    role_ext={"left": frozenset({(0, 2)})},
)


def test_interpretation_holds():
    assert MODEL.holds("a", (0,))
    assert not MODEL.holds("a", (1,))
    assert MODEL.holds("left", (0, 2))
    assert not MODEL.holds("left", (2, 0))
    with pytest.raises(ValueError):
        MODEL.holds("a", (0, 1, 2))


def test_eval_fol_on_known_model():
    assert eval_fol(parse("forall x in item: a(x) or b(x)"), MODEL)
    assert not eval_fol(parse("forall x in item: a(x)"), MODEL)
    assert eval_fol(parse("exists x in item: a(x)"), MODEL)
    assert eval_fol(parse("forall x in item: exactly_one(a(x), b(x))"), MODEL)
    assert eval_fol(parse("exists x in item: exists y in item: left(x, x) or a(y)"),
                    MODEL)


def test_eval_fol_domainless_quantifier_ranges_over_universe():
    # object 2 is outside item, so an unguarded forall sees it
    assert not eval_fol(parse("forall x: a(x) or b(x)"), MODEL)
    assert eval_fol(parse("exists x: not item(x)"), MODEL)


def test_eval_fol_equality_and_env():
    assert eval_fol(parse("exists x in item: exists y in item: x = x and a(y)"),
                    MODEL)
    assert not eval_fol(parse("forall x in item: forall y in item: x = y"), MODEL)


def test_eval_constraint_on_known_model():
    assert eval_constraint(lower("forall x in item: a(x) or b(x)"), MODEL)
    assert not eval_constraint(lower("exists x in item: left(x, x)"), MODEL)
    assert eval_constraint(lower("forall x in item: at_most(1, a(x), b(x))"), MODEL)


def test_eval_constraint_quantifier_ranges_over_concept_extension():
    node = core.ForAll("x", "item", core.Predicate("item", ("x",)))
    assert eval_constraint(node, MODEL)  # vacuously over the extension


def test_enumerate_interpretations_counts():
    models = list(enumerate_interpretations(["a", "b"], 2))
    assert len(models) == (2 ** 2) ** 2
    with_roles = list(enumerate_interpretations(["a"], 2, roles=["r"]))
    assert len(with_roles) == (2 ** 2) * (2 ** 4)


def test_enumerate_covers_empty_and_full_extensions():
    models = list(enumerate_interpretations(["a"], 2))
    extents = {m.concept_ext["a"] for m in models}
    assert frozenset() in extents and frozenset({0, 1}) in extents


@pytest.mark.parametrize("formula, concepts, roles, n", EQUIVALENCE_CASES)
def test_compiled_constraints_preserve_truth(formula, concepts, roles, n):
    ast = parse(formula)
    constraint, diags = fol.compile_fol(ast, CASE_GRAPH)
    assert constraint is not None, [str(d) for d in diags]
    for interp in enumerate_interpretations(concepts, n, roles=roles or None):
        assert eval_fol(ast, interp) == eval_constraint(constraint.node, interp), \
            (formula, interp)


def test_exactly_one_equals_at_least_and_at_most():
    exactly = parse("forall x in item: exactly_one(a(x), b(x), c(x))")
    split = parse("forall x in item: at_least(1, a(x), b(x), c(x)) "
                  "and at_most(1, a(x), b(x), c(x))")
    for interp in enumerate_interpretations(["item", "a", "b", "c"], 2):
        assert eval_fol(exactly, interp) == eval_fol(split, interp)


def test_function_symbols_have_no_model_semantics():
    ast = parse("forall x in item: a(f(x))")
    with pytest.raises(ValueError):
        eval_fol(ast, MODEL)

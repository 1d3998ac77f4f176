"""Derivation checking, elaboration, and stepping of typed terms."""

import random

import pytest

from addlam.corpus import BASE_CTX, generate_corpus
from addlam.derivation import (
    AAbs,
    AApp,
    AVar,
    AppWitness,
    RuleViolation,
    arr_e,
    arr_i,
    ax,
    ax0,
    check_add,
    elaborate,
    equiv,
    erase,
    forall_e,
    forall_i,
    generation_analyze,
    is_valid_add,
    plus_i,
    step_derivation,
    subst_derivation,
    weaken,
)
from addlam.reduction import enumerate_redexes
from addlam.syntax import Var, show_term
from addlam.typesys import Context, TArrow, TForall, TSum, TVar, TZero, type_equiv

X, Y = TVar("X"), TVar("Y")


def _ident(ctx, u=X, var="x"):
    return arr_i(ax(ctx.extend(var, u), var), var)


def test_axiom_requires_a_hypothesis():
    ctx = Context((("a", X),))
    assert ax(ctx, "a").ty == X
    with pytest.raises(RuleViolation):
        ax(ctx, "missing")


def test_sum_introduction_collects_types():
    ctx = Context((("a", X), ("c", Y)))
    d = plus_i(ax(ctx, "a"), ax(ctx, "c"))
    assert type_equiv(d.ty, TSum((X, Y)))
    check_add(d)


def test_generalisation_rejects_sum_types():
    ctx = Context((("a", X), ("b", X)))
    d = plus_i(ax(ctx, "a"), ax(ctx, "b"))
    with pytest.raises(RuleViolation):
        forall_i(d, "Z")


def test_generalisation_rejects_captured_variables():
    ctx = Context((("a", X),))
    with pytest.raises(RuleViolation):
        forall_i(ax(ctx, "a"), "X")


def test_instantiation_of_the_polymorphic_identity():
    ctx = Context()
    poly = forall_i(_ident(ctx, TVar("Z")), "Z")
    d = forall_e(poly, TArrow(Y, Y))
    assert type_equiv(d.ty, TArrow(TArrow(Y, Y), TArrow(Y, Y)))
    check_add(d)


def test_combined_elimination_distributes_witnesses():
    ctx = Context((("a", X), ("b", Y)))
    poly = forall_i(_ident(ctx, TVar("Z")), "Z")
    arg = plus_i(ax(ctx, "a"), ax(ctx, "b"))
    d = arr_e(poly, arg, u=TVar("Z"), ts=(TVar("Z"),), vs=((X,), (Y,)), xs=("Z",))
    assert type_equiv(d.ty, TSum((X, Y)))
    check_add(d)


def test_elimination_rejects_a_mismatched_argument():
    ctx = Context((("a", X),))
    with pytest.raises(RuleViolation):
        arr_e(_ident(ctx, Y), ax(ctx, "a"), u=Y, ts=(Y,), vs=((),))


def test_equivalence_nodes_are_fused_into_canonical_types():
    ctx = Context((("a", X),))
    d = plus_i(ax(ctx, "a"), ax0(ctx))
    assert d.ty == X  # the zero summand vanishes from the canonical type
    assert equiv(d, TSum((X, TZero))) is d


def test_checker_rejects_a_forged_type():
    ctx = Context((("a", X),))
    good = ax(ctx, "a")
    forged = type(good)(good.rule, good.ctx, good.term, Y)
    assert not is_valid_add(forged)


def test_elaboration_of_an_annotated_application():
    a = AApp(AAbs("x", X, AVar("x")), AVar("a"))
    d = elaborate(a, Context((("a", X),)))
    check_add(d)
    assert type_equiv(d.ty, X)
    from addlam.syntax import canonicalize
    assert canonicalize(erase(a)) == d.term


def test_elaboration_requires_a_witness_for_sums():
    ctx = Context((("a", X), ("b", X)))
    from addlam.derivation import ASum, ElaborationError
    bad = AApp(AAbs("x", X, AVar("x")), ASum((AVar("a"), AVar("b"))))
    with pytest.raises(ElaborationError):
        elaborate(bad, ctx)
    good = AApp(
        AAbs("x", X, AVar("x")), ASum((AVar("a"), AVar("b"))),
        AppWitness(X, (X,), ((), ())),
    )
    check_add(elaborate(good, ctx))


def test_generation_analysis_recovers_elimination_witnesses():
    ctx = Context((("a", X), ("b", Y)))
    poly = forall_i(_ident(ctx, TVar("Z")), "Z")
    arg = plus_i(ax(ctx, "a"), ax(ctx, "b"))
    d = arr_e(poly, arg, u=TVar("Z"), ts=(TVar("Z"),), vs=((X,), (Y,)), xs=("Z",))
    rep = generation_analyze(d)
    assert rep.head == "app"
    assert (rep.alpha, rep.beta) == (1, 2)


def test_weakening_adds_an_unused_hypothesis():
    ctx = Context((("a", X),))
    d = _ident(ctx)
    w = weaken(d, "b", Y)
    check_add(w)
    assert w.ctx.get("b") == Y
    assert w.term == d.term


def test_substitution_of_a_value_for_a_hypothesis():
    ctx = Context((("a", X),))
    body = ax(ctx.extend("x", X), "x")
    sub = subst_derivation(body, "x", ax(ctx, "a"))
    check_add(sub)
    assert sub.term == Var("a")
    assert type_equiv(sub.ty, X)


def test_stepping_preserves_types_across_the_corpus():
    corpus = generate_corpus(4, count=80)
    for d in corpus.derivations:
        for r in sorted(enumerate_redexes(d.term), key=repr):
            d2 = step_derivation(d, r)
            check_add(d2)
            assert type_equiv(d2.ty, d.ty), f"{show_term(d.term)} via {r.rule}"

"""Canonical forms and alpha-equivalence for source terms."""

import random

from addlam.corpus import random_term
from addlam.suites import _rename_binders, _shuffle_sums
from addlam.syntax import (
    Abs,
    App,
    Sum,
    Var,
    Zero,
    alpha_eq,
    canonicalize,
    free_vars,
    is_value,
    show_term,
    substitute,
    summands,
    transfer_path,
)


def test_canonical_flattens_and_sorts_sums():
    t = Sum((Var("b"), Sum((Var("a"), Zero))))
    c = canonicalize(t)
    assert isinstance(c, Sum)
    assert len(c.parts) == 3
    assert Zero in c.parts  # the empty computation stays a summand


def test_canonical_is_idempotent():
    rng = random.Random(7)
    for _ in range(200):
        t = random_term(rng)
        c = canonicalize(t)
        assert canonicalize(c) == c


def test_sum_order_is_irrelevant():
    a, b = App(Var("f"), Var("x")), Abs("y", Var("y"))
    assert canonicalize(Sum((a, b))) == canonicalize(Sum((b, a)))


def test_alpha_equivalent_terms_share_a_canonical_form():
    t1 = Abs("x", App(Var("x"), Var("z")))
    t2 = Abs("w", App(Var("w"), Var("z")))
    assert alpha_eq(t1, t2)
    assert canonicalize(t1) == canonicalize(t2)


def test_alpha_respects_free_variables():
    assert not alpha_eq(Abs("x", Var("y")), Abs("x", Var("z")))


def test_substitute_avoids_capture():
    t = Abs("y", App(Var("x"), Var("y")))
    r = substitute(t, "x", Var("y"))
    assert isinstance(r, Abs)
    assert r.var != "y"
    assert free_vars(r) == {"y"}


def test_substitution_on_random_terms_never_captures():
    rng = random.Random(11)
    for _ in range(200):
        t = random_term(rng, 3)
        r = substitute(t, "x", Abs("k", Var("y")))
        assert "x" not in free_vars(r), show_term(t)
        assert free_vars(r) <= (free_vars(t) - {"x"}) | {"y"}


def test_values_are_variables_and_abstractions():
    assert is_value(Var("x"))
    assert is_value(Abs("x", Var("x")))
    assert not is_value(Zero)
    assert not is_value(Sum((Var("x"), Var("y"))))
    assert not is_value(App(Var("f"), Var("x")))


def test_summands_of_a_non_sum_is_a_singleton():
    assert summands(Var("x")) == (Var("x"),)


def test_transfer_path_tracks_subterms_across_renaming():
    rng = random.Random(13)
    for _ in range(100):
        t = canonicalize(random_term(rng, 3))
        shuffled = canonicalize(_rename_binders(_shuffle_sums(t, rng), rng))
        assert shuffled == t  # same canonical form, so paths transfer


def test_transfer_path_across_sum_permutation():
    a = Sum((App(Var("f"), Var("x")), Var("y")))
    b = Sum((Var("y"), App(Var("f"), Var("x"))))
    ca, cb = canonicalize(a), canonicalize(b)
    assert ca == cb
    # the app sits at some index; transferring the path to an alpha
    # variant must land on an equal subterm
    idx = next(i for i, p in enumerate(ca.parts) if isinstance(p, App))
    moved = transfer_path(ca, cb, (idx,), {})
    assert cb.parts[moved[0]] == ca.parts[idx]

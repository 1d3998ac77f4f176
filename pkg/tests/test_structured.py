"""Rigid sum trees, the grafting elimination, and conversions."""

import pytest

from addlam.corpus import (
    BASE_CTX,
    example_pair_tree,
    example_struct_elim,
    generate_corpus,
)
from addlam.derivation import RuleViolation, UnsupportedDerivationShape
from addlam.reduction import enumerate_redexes, step
from addlam.structured import (
    ExcludedRule,
    LEAF,
    Node,
    ZLEAF,
    add_to_sadd,
    check_sadd,
    label_tree,
    leaf_addresses,
    sadd_to_add,
    sarr_i,
    sax,
    sax0,
    splus_i,
    step_sadd_derivation,
    struct_arr_e,
    tree_compose,
    tree_of_type,
)
from addlam.syntax import canonicalize, show_term
from addlam.typesys import TArrow, TSum, TVar, TZero, raw_alpha_eq, type_equiv

X, Y = TVar("X"), TVar("Y")


def test_leaf_addresses_follow_left_right_words():
    a = Node(Node(LEAF, ZLEAF), LEAF)
    assert leaf_addresses(a) == ("ll", "r")


def test_tree_of_type_reads_the_rigid_sum_shape():
    t = TSum((TSum((X, TZero)), Y))
    tree, lab = tree_of_type(t)
    assert tree == Node(Node(LEAF, ZLEAF), LEAF)
    assert lab == {"ll": X, "r": Y}
    assert label_tree(tree, lab) == t


def test_tree_composition_grafts_at_plain_leaves():
    a = Node(Node(LEAF, ZLEAF), LEAF)
    a2 = Node(LEAF, ZLEAF)
    composed = tree_compose(a, a2)
    assert composed == Node(Node(Node(LEAF, ZLEAF), ZLEAF), Node(LEAF, ZLEAF))


def test_structured_elimination_matches_the_grafted_type():
    sd = example_struct_elim()
    check_sadd(sd)
    z = TVar("Z")
    expected = TSum((
        TSum((TSum((X, TZero)), TSum((TArrow(X, X), TZero)))),
        TZero,
    ))
    assert sd.ty == expected


def test_structured_types_are_rigid():
    ctx = BASE_CTX
    d1 = splus_i(sax(ctx, "a"), sax0(ctx))
    d2 = splus_i(sax0(ctx), sax(ctx, "a"))
    assert type_equiv(d1.ty, d2.ty)
    assert d1.ty != d2.ty  # no reordering without an explicit equivalence


def test_hypotheses_must_be_unit_typed():
    from addlam.typesys import Context
    ctx = Context((("s", TSum((X, Y))),))
    with pytest.raises(RuleViolation):
        sax(ctx, "s")


def test_conversion_round_trip_preserves_the_sequent():
    corpus = generate_corpus(5, count=40)
    for sd in corpus.structured:
        d = sadd_to_add(sd)
        from addlam.derivation import check_add
        check_add(d)
        assert canonicalize(d.term) == canonicalize(sd.term)
        assert type_equiv(d.ty, sd.ty)
        back = add_to_sadd(d)
        check_sadd(back)
        assert type_equiv(back.ty, sd.ty)


def test_stepping_preserves_the_rigid_type():
    corpus = generate_corpus(6, count=40)
    stepped = 0
    for sd in corpus.structured:
        for r in sorted(enumerate_redexes(sd.term), key=repr):
            try:
                sd2 = step_sadd_derivation(sd, r)
            except (ExcludedRule, UnsupportedDerivationShape):
                continue
            check_sadd(sd2)
            assert raw_alpha_eq(sd2.ty, sd.ty)
            assert canonicalize(sd2.term) == canonicalize(step(sd.term, r))
            stepped += 1
    assert stepped > 20


def test_zero_summand_rule_is_excluded_from_stepping():
    ctx = BASE_CTX
    sd = splus_i(sax(ctx, "a"), sax0(ctx))
    (r,) = [r for r in enumerate_redexes(sd.term) if r.rule == "sum-zero"]
    with pytest.raises(ExcludedRule):
        step_sadd_derivation(sd, r)


def test_misaligned_distribution_is_reported_not_mistyped():
    # a three-summand argument: splitting off its first summand does not
    # follow the rigid left-nested tree
    sd = example_pair_tree()
    rs = [r for r in enumerate_redexes(sd.term) if r.rule == "dist-left"]
    assert rs
    for r in rs:
        with pytest.raises(UnsupportedDerivationShape):
            step_sadd_derivation(sd, r)

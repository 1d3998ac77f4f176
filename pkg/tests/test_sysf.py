"""The polymorphic pair calculus: reduction, typing, and tree helpers."""

import pytest

from addlam.structured import LEAF, Node, ZLEAF
from addlam.sysf import (
    FAbs,
    FApp,
    FArrow,
    FContext,
    FForall,
    FPair,
    FProd,
    FProjL,
    FProjR,
    FRuleViolation,
    FTVar,
    FUnit,
    FVar,
    Star,
    f_alpha_eq,
    f_arr_e,
    f_arr_i,
    f_ax,
    f_canonicalize,
    f_check,
    f_forall_e,
    f_forall_i,
    f_normalize,
    f_prod_i,
    f_proj_l,
    f_proj_r,
    f_reaches,
    f_reducts,
    f_type_alpha_eq,
    f_unit_i,
    ftree_derivation,
    ftree_term,
    proj_path,
    proj_path_derivation,
)

A = FTVar("A")


def test_beta_and_projections():
    t = FApp(FAbs("x", FVar("x")), FVar("y"))
    assert f_canonicalize(FVar("y")) in f_reducts(t)
    p = FPair(FVar("a"), FVar("b"))
    assert f_canonicalize(FVar("a")) in f_reducts(FProjL(p))
    assert f_canonicalize(FVar("b")) in f_reducts(FProjR(p))


def test_eta_contraction_needs_a_fresh_variable():
    t = FAbs("x", FApp(FVar("f"), FVar("x")))
    assert f_canonicalize(FVar("f")) in f_reducts(t)
    u = FAbs("x", FApp(FVar("x"), FVar("x")))
    assert f_canonicalize(FVar("x")) not in f_reducts(u)


def test_surjective_pairing():
    p = FVar("p")
    t = FPair(FProjL(p), FProjR(p))
    assert f_canonicalize(p) in f_reducts(t)
    q = FPair(FProjL(FVar("p")), FProjR(FVar("q")))
    assert f_canonicalize(FVar("p")) not in f_reducts(q)


def test_normalisation_of_a_pair_program():
    t = FProjR(FPair(FVar("a"), FApp(FAbs("x", FVar("x")), FVar("b"))))
    res = f_normalize(t)
    assert f_alpha_eq(res, FVar("b"))


def test_reaches_returns_a_connected_path():
    src = FApp(FAbs("x", FPair(FVar("x"), FVar("x"))), FVar("v"))
    tgt = FPair(FVar("v"), FVar("v"))
    path = f_reaches(src, tgt)
    assert path is not None and len(path) == 2
    assert path[-1] == f_canonicalize(tgt)


def test_typing_of_abstraction_and_application():
    ctx = FContext((("v", A),))
    d = f_arr_i(f_ax(ctx.extend("x", A), "x"), "x")
    assert f_type_alpha_eq(d.ty, FArrow(A, A))
    app = f_arr_e(d, f_ax(ctx, "v"))
    f_check(app)
    assert f_type_alpha_eq(app.ty, A)


def test_typing_of_pairs_and_projections():
    ctx = FContext((("v", A), ("w", FUnit)))
    d = f_prod_i(f_ax(ctx, "v"), f_unit_i(ctx))
    assert f_type_alpha_eq(d.ty, FProd(A, FUnit))
    f_check(f_proj_l(d))
    assert f_type_alpha_eq(f_proj_r(d).ty, FUnit)


def test_typing_of_quantifiers():
    ctx = FContext()
    d = f_forall_i(f_arr_i(f_ax(ctx.extend("x", FTVar("B")), "x"), "x"), "B")
    assert f_type_alpha_eq(d.ty, FForall("C", FArrow(FTVar("C"), FTVar("C"))))
    inst = f_forall_e(d, FProd(A, A))
    f_check(inst)
    assert f_type_alpha_eq(inst.ty, FArrow(FProd(A, A), FProd(A, A)))


def test_generalisation_needs_a_fresh_type_variable():
    ctx = FContext((("v", A),))
    with pytest.raises(FRuleViolation):
        f_forall_i(f_ax(ctx, "v"), "A")


def test_checker_rejects_a_forged_projection():
    ctx = FContext((("v", A),))
    d = f_ax(ctx, "v")
    forged = type(d)("projL", ctx, FProjL(d.term), A, (d,))
    with pytest.raises(FRuleViolation):
        f_check(forged)


def test_projection_path_nests_innermost_first():
    t = FPair(FPair(FVar("u1"), FPair(FVar("u2"), FVar("u3"))), Star)
    # the leaf at address l,r,r is reached by projecting left first
    got = f_normalize(proj_path(t, "lrr"))
    assert f_alpha_eq(got, FVar("u3"))
    assert proj_path(t, "lrr") == FProjR(FProjR(FProjL(t)))


def test_tree_term_places_stars_at_zero_leaves():
    tree = Node(Node(LEAF, ZLEAF), LEAF)
    t = ftree_term(tree, {"ll": FVar("a"), "r": FVar("b")})
    assert t == FPair(FPair(FVar("a"), Star), FVar("b"))


def test_tree_derivation_assembles_products():
    ctx = FContext((("v", A),))
    tree = Node(LEAF, ZLEAF)
    d = ftree_derivation(tree, {"l": f_ax(ctx, "v")}, ctx)
    f_check(d)
    assert f_type_alpha_eq(d.ty, FProd(A, FUnit))
    back = proj_path_derivation(d, "l")
    f_check(back)
    assert f_type_alpha_eq(back.ty, A)

"""Translation of structured derivations into System F with pairs,
the partial reverse translation, the isomorphism terms for dropping a
zero summand, and the simulation of source reduction steps."""

from __future__ import annotations

from dataclasses import dataclass

from .derivation import AddDerivation, UnsupportedDerivationShape
from .reduction import Redex
from .structured import (
    ExcludedRule,
    LEAF,
    Leaf,
    SaddDerivation,
    TypeTree,
    ZLEAF,
    add_to_sadd,
    step_sadd_derivation,
    tree_compose,
    tree_of_type,
)
from .syntax import Abs, App, Sum, Term, Var, Zero, canonicalize, show_term
from .typesys import (
    Context,
    TArrow,
    TForall,
    TSum,
    TVar,
    TZero,
    Type,
    is_unit,
    raw_alpha_eq,
    show_type,
)
from .sysf import (
    FAbs,
    FApp,
    FArrow,
    FContext,
    FDerivation,
    FForall,
    FPair,
    FProd,
    FProjL,
    FProjR,
    FTVar,
    FTerm,
    FType,
    FUnit,
    FVar,
    Star,
    f_arr_e,
    f_arr_i,
    f_ax,
    f_canonicalize,
    f_forall_e,
    f_forall_i,
    f_prod_i,
    f_proj_l,
    f_reaches,
    f_type_alpha_eq,
    f_unit_i,
    ftree_derivation,
    proj_path,
    proj_path_derivation,
    show_fterm,
)


# --- forward translation -------------------------------------------------------


def trans_type(t: Type) -> FType:
    """Types: sums become products, the zero type becomes the unit."""
    match t:
        case TVar(x):
            return FTVar(x)
        case _ if t is TZero:
            return FUnit
        case TArrow(a, b):
            return FArrow(trans_type(a), trans_type(b))
        case TForall(x, b):
            return FForall(x, trans_type(b))
        case TSum((l, r)):
            return FProd(trans_type(l), trans_type(r))
        case TSum(_):
            raise ValueError(f"sum is not binary: {show_type(t)}")
    raise TypeError(f"not a type: {t!r}")


def trans_ctx(ctx: Context) -> FContext:
    return FContext((x, trans_type(u)) for x, u in ctx.items())


@dataclass(frozen=True)
class TranslationResult:
    fterm: FTerm
    ftype: FType
    fderivation: FDerivation


def _trans(sd: SaddDerivation) -> FDerivation:
    fctx = trans_ctx(sd.ctx)
    if sd.rule == "ax":
        return f_ax(fctx, sd.term.name)
    if sd.rule == "ax0":
        return f_unit_i(fctx)
    if sd.rule == "plusI":
        return f_prod_i(_trans(sd.premises[0]), _trans(sd.premises[1]))
    if sd.rule == "arrI":
        return f_arr_i(_trans(sd.premises[0]), sd.binder)
    if sd.rule == "forallI":
        return f_forall_i(_trans(sd.premises[0]), sd.binder)
    if sd.rule == "forallE":
        return f_forall_e(_trans(sd.premises[0]), trans_type(sd.inst_ty))
    if sd.rule == "arrE":
        d1, d2 = _trans(sd.premises[0]), _trans(sd.premises[1])
        a, _ = tree_of_type(sd.premises[0].ty)
        a2, _ = tree_of_type(sd.premises[1].ty)
        ts, vs = dict(sd.arr_ts), dict(sd.arr_vs)
        leaves: dict[str, FDerivation] = {}
        for w in ts:
            dw = proj_path_derivation(d1, w)
            for v, vec in vs.items():
                chain = dw
                for inst in vec:
                    chain = f_forall_e(chain, trans_type(inst))
                leaves[w + v] = f_arr_e(chain, proj_path_derivation(d2, v))
        return ftree_derivation(tree_compose(a, a2), leaves, fctx)
    raise TypeError(f"not a structured rule: {sd.rule!r}")


def trans_term(sd: SaddDerivation) -> TranslationResult:
    """Derivation-indexed term translation; the returned derivation
    concludes the translated context, term and type."""
    fd = _trans(sd)
    return TranslationResult(fd.term, fd.ty, fd)


def trans_add(d: AddDerivation) -> TranslationResult:
    """Translate via the structured system (may raise ConversionFailure)."""
    return trans_term(add_to_sadd(d))


# --- reverse translation --------------------------------------------------------


def rev_type(a: FType) -> Type | None:
    """Partial inverse on types; None marks the undefined cases."""
    match a:
        case FTVar(x):
            return TVar(x)
        case _ if a is FUnit:
            return TZero
        case FProd(l, r):
            rl, rr = rev_type(l), rev_type(r)
            return None if rl is None or rr is None else TSum((rl, rr))
        case FForall(x, b):
            rb = rev_type(b)
            return TForall(x, rb) if rb is not None and is_unit(rb) else None
        case FArrow(d, c):
            rd, rc = rev_type(d), rev_type(c)
            if rd is None or rc is None or not is_unit(rd):
                return None
            return TArrow(rd, rc)
    return None


def _f_as_tree(t: FTerm) -> tuple[TypeTree, dict[str, FTerm]]:
    """Maximal pair-tree decomposition of an F term."""
    from .structured import Node

    if t is Star:
        return ZLEAF, {}
    if isinstance(t, FPair):
        tl, ml = _f_as_tree(t.fst)
        tr, mr = _f_as_tree(t.snd)
        leaves = {"l" + w: u for w, u in ml.items()}
        leaves.update({"r" + w: u for w, u in mr.items()})
        return Node(tl, tr), leaves
    return LEAF, {"": t}


def _strip_projections(t: FTerm) -> tuple[FTerm, str]:
    """Peel a projection chain; the returned word lists the innermost
    projection first (the address the chain selects)."""
    letters = []
    while isinstance(t, (FProjL, FProjR)):
        letters.append("l" if isinstance(t, FProjL) else "r")
        t = t.body
    return t, "".join(reversed(letters))


def _match_app_tree(t: FTerm) -> tuple[FTerm, FTerm] | None:
    """Recognise a tree of projected applications over one consistent
    function/argument pair; the image of the structured application."""
    tree, leaves = _f_as_tree(t)
    if not leaves:
        return None
    t0 = u0 = None
    for addr, leaf in leaves.items():
        if not isinstance(leaf, FApp):
            return None
        pl, w = _strip_projections(leaf.fun)
        pr, v = _strip_projections(leaf.arg)
        if w + v != addr:
            return None
        if t0 is None:
            t0, u0 = pl, pr
        elif f_canonicalize(pl) != f_canonicalize(t0) or f_canonicalize(pr) != f_canonicalize(u0):
            return None
    return t0, u0


def rev_term(t: FTerm) -> Term | None:
    """Partial inverse on terms. A pair is read back as an application
    when it is a consistent tree of projected applications, and as a
    sum otherwise."""
    match t:
        case FVar(x):
            return Var(x)
        case _ if t is Star:
            return Zero
        case FAbs(x, b):
            rb = rev_term(b)
            return None if rb is None else Abs(x, rb)
        case FPair(_, _) | FApp(_, _):
            hit = _match_app_tree(t)
            if hit is not None:
                rf, ra = rev_term(hit[0]), rev_term(hit[1])
                return None if rf is None or ra is None else App(rf, ra)
            if isinstance(t, FPair):
                rl, rr = rev_term(t.fst), rev_term(t.snd)
                return None if rl is None or rr is None else Sum((rl, rr))
            return None
    return None


@dataclass(frozen=True)
class RoundTrip:
    ok: bool
    detail: str = ""


def round_trip(sd: SaddDerivation) -> RoundTrip:
    """Translate, reverse, and compare with the source sequent."""
    res = trans_term(sd)
    rt = rev_term(res.fterm)
    if rt is None or canonicalize(rt) != canonicalize(sd.term):
        got = "undefined" if rt is None else show_term(rt)
        return RoundTrip(False, f"term: {got} != {show_term(sd.term)}")
    rty = rev_type(res.ftype)
    if rty is None or not raw_alpha_eq(rty, sd.ty):
        got = "undefined" if rty is None else show_type(rty)
        return RoundTrip(False, f"type: {got} != {show_type(sd.ty)}")
    for x, u in sd.ctx.items():
        ru = rev_type(trans_type(u))
        if ru is None or not raw_alpha_eq(ru, u):
            return RoundTrip(False, f"hypothesis {x} does not survive the round trip")
    return RoundTrip(True, "same-sequent")


# --- isomorphism and coercion terms ----------------------------------------------


def epsilon_terms(t: Type) -> tuple[FTerm, FTerm]:
    """The two terms witnessing that a zero summand is redundant after
    translation: a projection out of, and a pairing into, [[T]] x 1."""
    return FAbs("x", FProjL(FVar("x"))), FAbs("x", FPair(FVar("x"), Star))


def epsilon_derivations(t: Type, ctx: FContext = FContext()) -> tuple[FDerivation, FDerivation]:
    ft = trans_type(t)
    c1 = ctx.extend("x", FProd(ft, FUnit))
    down = f_arr_i(f_proj_l(f_ax(c1, "x")), "x")
    c2 = ctx.extend("x", ft)
    up = f_arr_i(f_prod_i(f_ax(c2, "x"), f_unit_i(c2)), "x")
    return down, up


class CoercionUnsupported(Exception):
    """The two types differ below the sum structure."""


def equiv_coercion(t1: Type, t2: Type, ctx: FContext = FContext()) -> FDerivation:
    """A pair-shuffling term of type [[t1]] -> [[t2]] for rigid types
    equal up to reordering and zero summands: each leaf of t2's tree is
    fetched from a matching leaf of t1 by a projection chain."""
    _, lab1 = tree_of_type(t1)
    a2, lab2 = tree_of_type(t2)
    cx = ctx.extend("x", trans_type(t1))
    dx = f_ax(cx, "x")
    pool = dict(lab1)
    leaves: dict[str, FDerivation] = {}
    for v, unit in lab2.items():
        for w, cand in pool.items():
            if raw_alpha_eq(cand, unit):
                leaves[v] = proj_path_derivation(dx, w)
                del pool[w]
                break
        else:
            raise CoercionUnsupported(
                f"no leaf of {show_type(t1)} matches {show_type(unit)}"
            )
    body = ftree_derivation(a2, leaves, cx)
    return f_arr_i(body, "x")


# --- simulation of source reduction -----------------------------------------------


@dataclass(frozen=True)
class Simulation:
    derivation: SaddDerivation  # of the contracted term, same sequent
    path: list[FTerm] | None  # translated source, ..., translated target
    source: TranslationResult
    target: TranslationResult

    @property
    def found(self) -> bool:
        """A path was found. When source and target translate to distinct
        terms it has at least one step; the zero rules can collapse both
        sides to the same term, where the one-vertex path is the witness."""
        if self.path is None or not self.path:
            return False
        if f_canonicalize(self.source.fterm) != f_canonicalize(self.target.fterm):
            return len(self.path) >= 2
        return True


def simulate_step(sd: SaddDerivation, r: Redex, budget: int = 10000) -> Simulation:
    """Mirror one source reduction step in the target calculus: step the
    derivation, translate both sides, and search for the connecting
    reduction path."""
    if r.rule == "sum-zero":
        raise ExcludedRule("the zero-summand rule is handled by the epsilon terms")
    sd2 = step_sadd_derivation(sd, r)
    src = trans_term(sd)
    tgt = trans_term(sd2)
    path = f_reaches(src.fterm, tgt.fterm, budget)
    return Simulation(sd2, path, src, tgt)

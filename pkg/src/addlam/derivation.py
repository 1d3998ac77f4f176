"""First-class typing derivations for the additive system, their
checker, elaboration from annotated terms, and the derivation
transformations behind subject reduction (substitution lemmas, one-step
reduction of derivations)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    Abs,
    App,
    Sum,
    Term,
    Var,
    Zero,
    canonicalize,
    free_vars,
    fresh_name,
    is_value,
    mk_sum,
    show_term,
    sort_key,
    substitute,
    summands,
)
from .typesys import (
    Context,
    SsubWitness,
    TArrow,
    TForall,
    TSum,
    TVar,
    TZero,
    Type,
    ftv,
    fresh_tname,
    instantiate,
    is_unit,
    show_type,
    sum_of_units,
    type_canonicalize,
    type_equiv,
    type_subst,
    type_subst_vec,
    type_summands,
)


class RuleViolation(Exception):
    """A derivation node does not instantiate its rule schema."""

    def __init__(self, path: tuple[int, ...], message: str):
        self.path = path
        self.message = message
        at = ".".join(map(str, path)) or "root"
        super().__init__(f"at {at}: {message}")


class ElaborationError(Exception):
    def __init__(self, location: str, message: str):
        self.location = location
        self.message = message
        super().__init__(f"at {location}: {message}")


class UnsupportedDerivationShape(Exception):
    """The derivation mixes rules in an order the transformation does
    not normalise; surfaced rather than silently mishandled."""


ADD_RULES = ("ax", "ax0", "equiv", "arrI", "arrE", "plusI", "forallI", "forallE")


@dataclass(frozen=True)
class AddDerivation:
    rule: str
    ctx: Context
    term: Term
    ty: Type
    premises: tuple["AddDerivation", ...] = ()
    binder: str | None = None  # arrI term binder / forallI type binder
    inst_ty: Type | None = None  # forallE
    arr_u: Type | None = None  # arrE: shared arrow domain U
    arr_ts: tuple[Type, ...] | None = None  # arrE: T_i, alpha = len
    arr_vs: tuple[tuple[Type, ...], ...] | None = None  # arrE: V vectors, beta = len
    arr_xs: tuple[str, ...] | None = None  # arrE: generalised variables

    @property
    def alpha(self) -> int:
        return len(self.arr_ts) if self.arr_ts is not None else 0

    @property
    def beta(self) -> int:
        return len(self.arr_vs) if self.arr_vs is not None else 0

    def describe(self) -> str:
        return f"{self.rule}: {self.ctx} |- {show_term(self.term)} : {show_type(self.ty)}"


def forall_close(xs, u: Type) -> Type:
    for x in reversed(tuple(xs)):
        u = TForall(x, u)
    return u


def _fail(msg: str):
    raise RuleViolation((), msg)


# --- smart constructors (validate one node, assuming valid premises) -------


def ax(ctx: Context, name: str) -> AddDerivation:
    u = ctx.get(name)
    if u is None:
        _fail(f"variable {name} not in context")
    return AddDerivation("ax", ctx, Var(name), u)


def ax0(ctx: Context) -> AddDerivation:
    return AddDerivation("ax0", ctx, Zero, TZero)


def equiv(d: AddDerivation, ty: Type) -> AddDerivation:
    ty = type_canonicalize(ty)
    if not type_equiv(d.ty, ty):
        _fail(f"equiv between inequivalent types {show_type(d.ty)} and {show_type(ty)}")
    if d.rule == "equiv":  # fuse consecutive equivalence nodes
        d = d.premises[0]
    if d.ty == ty:
        return d
    return AddDerivation("equiv", d.ctx, d.term, ty, (d,))


def arr_i(d: AddDerivation, binder: str) -> AddDerivation:
    u = d.ctx.get(binder)
    if u is None:
        _fail(f"abstraction binder {binder} not in premise context")
    term = canonicalize(Abs(binder, d.term))
    ty = type_canonicalize(TArrow(u, d.ty))
    return AddDerivation("arrI", d.ctx.remove(binder), term, ty, (d,), binder=binder)


def plus_i(d1: AddDerivation, d2: AddDerivation) -> AddDerivation:
    if d1.ctx != d2.ctx:
        _fail("sum premises typed in different contexts")
    term = mk_sum((d1.term, d2.term))
    ty = type_canonicalize(TSum((d1.ty, d2.ty)))
    return AddDerivation("plusI", d1.ctx, term, ty, (d1, d2))


def forall_i(d: AddDerivation, binder: str) -> AddDerivation:
    if not is_unit(d.ty):
        _fail(f"generalisation over a non-unit type {show_type(d.ty)}")
    if binder in d.ctx.free_tvars():
        _fail(f"{binder} occurs free in the context")
    ty = type_canonicalize(TForall(binder, d.ty))
    return AddDerivation("forallI", d.ctx, d.term, ty, (d,), binder=binder)


def forall_e(d: AddDerivation, v: Type) -> AddDerivation:
    v = type_canonicalize(v)
    if not is_unit(v):
        _fail(f"instantiation with a non-unit type {show_type(v)}")
    if not isinstance(d.ty, TForall):
        _fail(f"instantiating a non-quantified type {show_type(d.ty)}")
    return AddDerivation("forallE", d.ctx, d.term, instantiate(d.ty, v), (d,), inst_ty=v)


def _arr_e_types(u, ts, vs, xs):
    u = type_canonicalize(u)
    ts = tuple(type_canonicalize(t) for t in ts)
    vs = tuple(tuple(type_canonicalize(v) for v in vec) for vec in vs)
    if not is_unit(u):
        raise RuleViolation((), f"arrow domain {show_type(u)} is not a unit type")
    for vec in vs:
        if len(vec) != len(xs):
            raise RuleViolation((), "instantiation vector length mismatch")
        if not all(is_unit(v) for v in vec):
            raise RuleViolation((), "instantiation vectors must hold unit types")
    fun_ty = sum_of_units(forall_close(xs, TArrow(u, t)) for t in ts)
    arg_ty = sum_of_units(type_subst_vec(u, xs, vec) for vec in vs)
    res_ty = sum_of_units(
        type_subst_vec(t, xs, vec) for t in ts for vec in vs
    )
    return u, ts, vs, fun_ty, arg_ty, res_ty


def arr_e(
    d1: AddDerivation,
    d2: AddDerivation,
    u: Type,
    ts,
    vs,
    xs=(),
) -> AddDerivation:
    xs = tuple(xs)
    u, ts, vs, fun_ty, arg_ty, res_ty = _arr_e_types(u, ts, vs, xs)
    if d1.ctx != d2.ctx:
        _fail("application premises typed in different contexts")
    if not type_equiv(d1.ty, fun_ty):
        _fail(f"function premise has type {show_type(d1.ty)}, expected {show_type(fun_ty)}")
    if not type_equiv(d2.ty, arg_ty):
        _fail(f"argument premise has type {show_type(d2.ty)}, expected {show_type(arg_ty)}")
    term = canonicalize(App(d1.term, d2.term))
    return AddDerivation(
        "arrE", d1.ctx, term, res_ty, (d1, d2),
        arr_u=u, arr_ts=ts, arr_vs=vs, arr_xs=xs,
    )


# --- the checker ------------------------------------------------------------


def _check_node(d: AddDerivation, path: tuple[int, ...]):
    def bad(msg):
        raise RuleViolation(path, msg)

    ps = d.premises
    if d.rule == "ax":
        u = d.ctx.get(d.term.name) if isinstance(d.term, Var) else None
        if u is None:
            bad("axiom subject is not a context variable")
        if not type_equiv(d.ty, u):
            bad("axiom type differs from the hypothesis")
    elif d.rule == "ax0":
        if d.term is not Zero or not type_equiv(d.ty, TZero):
            bad("zero axiom must type zero with the zero type")
    elif d.rule == "equiv":
        (p,) = ps
        if p.ctx != d.ctx or canonicalize(p.term) != canonicalize(d.term):
            bad("equivalence changes the judgement subject")
        if not type_equiv(p.ty, d.ty):
            bad("equivalence between inequivalent types")
    elif d.rule == "arrI":
        (p,) = ps
        u = p.ctx.get(d.binder or "")
        if u is None:
            bad("binder missing from the premise context")
        if p.ctx.remove(d.binder) != d.ctx:
            bad("abstraction context mismatch")
        if canonicalize(d.term) != canonicalize(Abs(d.binder, p.term)):
            bad("abstraction subject mismatch")
        if not type_equiv(d.ty, TArrow(u, p.ty)):
            bad("abstraction type is not the expected arrow")
    elif d.rule == "plusI":
        p1, p2 = ps
        if p1.ctx != d.ctx or p2.ctx != d.ctx:
            bad("sum context mismatch")
        if canonicalize(d.term) != mk_sum((p1.term, p2.term)):
            bad("sum subject mismatch")
        if not type_equiv(d.ty, TSum((p1.ty, p2.ty))):
            bad("sum type is not the sum of the premise types")
    elif d.rule == "forallI":
        (p,) = ps
        if p.ctx != d.ctx or canonicalize(p.term) != canonicalize(d.term):
            bad("generalisation changes the judgement subject")
        if not is_unit(type_canonicalize(p.ty)):
            bad("generalisation over a non-unit type")
        if d.binder in d.ctx.free_tvars():
            bad(f"{d.binder} occurs free in the context")
        if not type_equiv(d.ty, TForall(d.binder, p.ty)):
            bad("generalised type mismatch")
    elif d.rule == "forallE":
        (p,) = ps
        if p.ctx != d.ctx or canonicalize(p.term) != canonicalize(d.term):
            bad("instantiation changes the judgement subject")
        c = type_canonicalize(p.ty)
        if not isinstance(c, TForall):
            bad("instantiating a non-quantified type")
        if d.inst_ty is None or not is_unit(type_canonicalize(d.inst_ty)):
            bad("instantiation witness must be a unit type")
        if not type_equiv(d.ty, instantiate(c, d.inst_ty)):
            bad("instantiated type mismatch")
    elif d.rule == "arrE":
        p1, p2 = ps
        if d.arr_ts is None or d.arr_vs is None or d.arr_u is None or d.arr_xs is None:
            bad("application node lacks its witnesses")
        try:
            _, _, _, fun_ty, arg_ty, res_ty = _arr_e_types(
                d.arr_u, d.arr_ts, d.arr_vs, d.arr_xs
            )
        except RuleViolation as e:
            bad(e.message)
        if p1.ctx != d.ctx or p2.ctx != d.ctx:
            bad("application context mismatch")
        if not type_equiv(p1.ty, fun_ty):
            bad(
                f"function premise has type {show_type(p1.ty)}, "
                f"expected {show_type(fun_ty)}"
            )
        if not type_equiv(p2.ty, arg_ty):
            bad(
                f"argument premise has type {show_type(p2.ty)}, "
                f"expected {show_type(arg_ty)}"
            )
        if canonicalize(d.term) != canonicalize(App(p1.term, p2.term)):
            bad("application subject mismatch")
        if not type_equiv(d.ty, res_ty):
            bad("application result type mismatch")
    else:
        bad(f"unknown rule {d.rule!r}")


def check_add(d: AddDerivation, path: tuple[int, ...] = ()):
    """Validate every node; raises RuleViolation at the offending node."""
    for i, p in enumerate(d.premises):
        check_add(p, path + (i,))
    _check_node(d, path)


def is_valid_add(d: AddDerivation) -> bool:
    try:
        check_add(d)
        return True
    except RuleViolation:
        return False


# --- annotated terms and elaboration ---------------------------------------


class ATerm:
    __slots__ = ()


@dataclass(frozen=True)
class AVar(ATerm):
    name: str


@dataclass(frozen=True)
class AZero(ATerm):
    pass


@dataclass(frozen=True)
class AAbs(ATerm):
    var: str
    ann: Type
    body: ATerm


@dataclass(frozen=True)
class AApp(ATerm):
    fun: ATerm
    arg: ATerm
    wit: "AppWitness | None" = None


@dataclass(frozen=True)
class ASum(ATerm):
    parts: tuple[ATerm, ...]


@dataclass(frozen=True)
class AGen(ATerm):
    tvar: str
    body: ATerm


@dataclass(frozen=True)
class AInst(ATerm):
    body: ATerm
    ty: Type


@dataclass(frozen=True)
class AppWitness:
    u: Type
    ts: tuple[Type, ...]
    vs: tuple[tuple[Type, ...], ...]
    xs: tuple[str, ...] = ()


def erase(a: ATerm) -> Term:
    match a:
        case AVar(x):
            return Var(x)
        case AZero():
            return Zero
        case AAbs(x, _, b):
            return Abs(x, erase(b))
        case AApp(f, u, _):
            return App(erase(f), erase(u))
        case ASum(ps):
            return Sum(tuple(erase(p) for p in ps))
        case AGen(_, b) | AInst(b, _):
            return erase(b)
    raise TypeError(f"not an annotated term: {a!r}")


def elaborate(a: ATerm, ctx: Context, loc: str = "term") -> AddDerivation:
    """Build a derivation whose erasure is a; fails on the first witness
    that cannot be satisfied."""

    def err(msg):
        raise ElaborationError(loc, msg)

    match a:
        case AVar(x):
            if x not in ctx:
                err(f"unbound variable {x}")
            return ax(ctx, x)
        case AZero():
            return ax0(ctx)
        case AAbs(x, u, b):
            if x in ctx:
                err(f"binder {x} shadows a context variable")
            u = type_canonicalize(u)
            if not is_unit(u):
                err(f"binder annotation {show_type(u)} is not a unit type")
            d = elaborate(b, ctx.extend(x, u), loc + ".body")
            return arr_i(d, x)
        case ASum(ps):
            ds = [elaborate(p, ctx, f"{loc}.{i}") for i, p in enumerate(ps)]
            out = ds[0]
            for d in ds[1:]:
                out = plus_i(out, d)
            return out
        case AGen(x, b):
            d = elaborate(b, ctx, loc + ".body")
            try:
                return forall_i(d, x)
            except RuleViolation as e:
                err(e.message)
        case AInst(b, v):
            d = elaborate(b, ctx, loc + ".body")
            try:
                return forall_e(d, v)
            except RuleViolation as e:
                err(e.message)
        case AApp(f, u, wit):
            d1 = elaborate(f, ctx, loc + ".fun")
            d2 = elaborate(u, ctx, loc + ".arg")
            if wit is None:
                c = type_canonicalize(d1.ty)
                if isinstance(c, TArrow) and type_equiv(d2.ty, c.dom):
                    wit = AppWitness(c.dom, (c.cod,), ((),), ())
                else:
                    err("application needs an explicit witness block")
            try:
                return arr_e(d1, d2, wit.u, wit.ts, wit.vs, wit.xs)
            except RuleViolation as e:
                err(e.message)
    raise TypeError(f"not an annotated term: {a!r}")


# --- generation analysis ----------------------------------------------------


@dataclass(frozen=True)
class GenerationReport:
    head: str  # "app" | "abs" | "sum" | "leaf"
    chain: tuple[SsubWitness, ...]
    core_ty: Type
    # app case
    alpha: int | None = None
    beta: int | None = None
    u: Type | None = None
    ts: tuple[Type, ...] | None = None
    vs: tuple[tuple[Type, ...], ...] | None = None
    xs: tuple[str, ...] | None = None
    # abs case
    bind_ty: Type | None = None
    body_ty: Type | None = None
    # sum case
    left_ty: Type | None = None
    right_ty: Type | None = None


def strip_wrappers(d: AddDerivation):
    """Peel equiv/forallI/forallE nodes; returns (core, wrappers) with
    wrappers listed root-first."""
    wrappers = []
    while d.rule in ("equiv", "forallI", "forallE"):
        if d.rule == "equiv":
            wrappers.append(("equiv", d.ty))
        elif d.rule == "forallI":
            wrappers.append(("forallI", d.binder))
        else:
            wrappers.append(("forallE", d.inst_ty))
        d = d.premises[0]
    return d, wrappers


def reapply_wrappers(d: AddDerivation, wrappers) -> AddDerivation:
    for kind, w in reversed(wrappers):
        if kind == "equiv":
            d = equiv(d, w)
        elif kind == "forallI":
            d = forall_i(d, w)
        else:
            d = forall_e(d, w)
    return d


def _wrapper_chain(core_ty: Type, wrappers) -> tuple[SsubWitness, ...]:
    """Witness chain core_ty <= root type read off the peeled wrappers."""
    chain: list[SsubWitness] = []
    cur = type_canonicalize(core_ty)
    for kind, w in reversed(wrappers):  # core-to-root order
        if kind == "equiv":
            continue
        if kind == "forallI":
            chain.append(SsubWitness.gen(w))
            cur = type_canonicalize(TForall(w, cur))
        else:
            c = type_canonicalize(cur)
            chain.append(SsubWitness.inst(c.var, w))
            cur = instantiate(c, w)
    return tuple(chain)


def generation_analyze(d: AddDerivation) -> GenerationReport:
    """Decompose a checked derivation per the shape of its subject."""
    core, wrappers = strip_wrappers(d)
    chain = _wrapper_chain(core.ty, wrappers)
    t = canonicalize(d.term)
    if isinstance(t, App):
        if core.rule != "arrE":
            raise UnsupportedDerivationShape(core.describe())
        return GenerationReport(
            "app", chain, core.ty,
            alpha=core.alpha, beta=core.beta,
            u=core.arr_u, ts=core.arr_ts, vs=core.arr_vs, xs=core.arr_xs,
        )
    if isinstance(t, Abs):
        if core.rule != "arrI":
            raise UnsupportedDerivationShape(core.describe())
        bind = core.premises[0].ctx.get(core.binder)
        return GenerationReport(
            "abs", chain, core.ty, bind_ty=bind, body_ty=core.premises[0].ty
        )
    if isinstance(t, Sum):
        if core.rule != "plusI":
            raise UnsupportedDerivationShape(core.describe())
        return GenerationReport(
            "sum", chain, core.ty,
            left_ty=core.premises[0].ty, right_ty=core.premises[1].ty,
        )
    return GenerationReport("leaf", chain, core.ty)


# --- structural helpers for the transformations -----------------------------


def _all_tvars(d: AddDerivation) -> set[str]:
    out: set[str] = set()

    def tyvars(t: Type | None):
        if t is None:
            return
        match t:
            case TVar(x):
                out.add(x)
            case TArrow(a, b):
                tyvars(a), tyvars(b)
            case TForall(x, b):
                out.add(x)
                tyvars(b)
            case TSum(ps):
                for p in ps:
                    tyvars(p)

    def walk(n: AddDerivation):
        tyvars(n.ty)
        for _, v in n.ctx.items():
            tyvars(v)
        tyvars(n.inst_ty)
        tyvars(n.arr_u)
        for t in n.arr_ts or ():
            tyvars(t)
        for vec in n.arr_vs or ():
            for v in vec:
                tyvars(v)
        if n.rule == "forallI":
            out.add(n.binder)
        out.update(n.arr_xs or ())
        for p in n.premises:
            walk(p)

    walk(d)
    return out


def _all_term_vars(d: AddDerivation) -> set[str]:
    out: set[str] = set()

    def walk(n):
        out.update(n.ctx.names())
        out.update(free_vars(n.term))
        if n.rule == "arrI":
            out.add(n.binder)
        for p in n.premises:
            walk(p)

    walk(d)
    return out


def rename_var(d: AddDerivation, old: str, new: str) -> AddDerivation:
    """Rename a free term variable throughout a derivation."""
    if old not in d.ctx and old not in free_vars(d.term):
        return d

    def go(n: AddDerivation) -> AddDerivation:
        ctx = Context(
            ((new if k == old else k), v) for k, v in n.ctx.items()
        )
        if n.rule == "ax":
            nm = n.term.name
            return equiv(ax(ctx, new if nm == old else nm), n.ty)
        if n.rule == "ax0":
            return ax0(ctx)
        if n.rule == "equiv":
            return equiv(go(n.premises[0]), n.ty)
        if n.rule == "arrI":
            if n.binder in (old, new):
                raise UnsupportedDerivationShape(
                    f"binder {n.binder} collides while renaming {old} to {new}"
                )
            return arr_i(go(n.premises[0]), n.binder)
        if n.rule == "plusI":
            return plus_i(go(n.premises[0]), go(n.premises[1]))
        if n.rule == "forallI":
            return forall_i(go(n.premises[0]), n.binder)
        if n.rule == "forallE":
            return forall_e(go(n.premises[0]), n.inst_ty)
        if n.rule == "arrE":
            return arr_e(
                go(n.premises[0]), go(n.premises[1]),
                n.arr_u, n.arr_ts, n.arr_vs, n.arr_xs,
            )
        raise UnsupportedDerivationShape(n.rule)

    return go(d)


def weaken(d: AddDerivation, name: str, ty: Type) -> AddDerivation:
    """Add an unused hypothesis to every context of a derivation."""
    ty = type_canonicalize(ty)
    if name in d.ctx:
        raise UnsupportedDerivationShape(f"{name} already hypothesised")
    new_tv = ftv(ty)

    def go(n: AddDerivation) -> AddDerivation:
        if n.rule == "ax":
            return ax(n.ctx.extend(name, ty), n.term.name)
        if n.rule == "ax0":
            return ax0(n.ctx.extend(name, ty))
        if n.rule == "equiv":
            return equiv(go(n.premises[0]), n.ty)
        if n.rule == "arrI":
            p = n.premises[0]
            b = n.binder
            if b == name:
                avoid = set(p.ctx.names()) | free_vars(p.term) | {name}
                nb = fresh_name(b, avoid)
                p = rename_var(p, b, nb)
                b = nb
            return arr_i(go(p), b)
        if n.rule == "plusI":
            return plus_i(go(n.premises[0]), go(n.premises[1]))
        if n.rule == "forallI":
            p, b = n.premises[0], n.binder
            if b in new_tv:
                nb = fresh_tname(b, _all_tvars(p) | new_tv)
                p = type_subst_derivation(p, b, TVar(nb))
                b = nb
            return forall_i(go(p), b)
        if n.rule == "forallE":
            return forall_e(go(n.premises[0]), n.inst_ty)
        if n.rule == "arrE":
            return arr_e(
                go(n.premises[0]), go(n.premises[1]),
                n.arr_u, n.arr_ts, n.arr_vs, n.arr_xs,
            )
        raise UnsupportedDerivationShape(n.rule)

    return go(d)


# --- the substitution lemmas -------------------------------------------------


def type_subst_derivation(d: AddDerivation, x: str, u: Type) -> AddDerivation:
    """Substitute a unit type for a type variable throughout a
    derivation: contexts, conclusion types and witnesses."""
    u = type_canonicalize(u)
    if not is_unit(u):
        raise RuleViolation((), "only unit types substitute for type variables")
    fv_u = ftv(u)

    def sub(t: Type | None):
        return None if t is None else type_subst(t, x, u)

    def go(n: AddDerivation) -> AddDerivation:
        if n.rule == "ax":
            return ax(n.ctx.map_types(lambda t: type_subst(t, x, u)), n.term.name)
        if n.rule == "ax0":
            return ax0(n.ctx.map_types(lambda t: type_subst(t, x, u)))
        if n.rule == "equiv":
            return equiv(go(n.premises[0]), sub(n.ty))
        if n.rule == "arrI":
            return arr_i(go(n.premises[0]), n.binder)
        if n.rule == "plusI":
            return plus_i(go(n.premises[0]), go(n.premises[1]))
        if n.rule == "forallI":
            p, b = n.premises[0], n.binder
            if b == x:
                # x is shadowed below this node; nothing to substitute
                return n
            if b in fv_u:
                nb = fresh_tname(b, _all_tvars(p) | fv_u | {x})
                p = type_subst_derivation(p, b, TVar(nb))
                b = nb
            return forall_i(go(p), b)
        if n.rule == "forallE":
            return forall_e(go(n.premises[0]), sub(n.inst_ty))
        if n.rule == "arrE":
            xs = n.arr_xs or ()
            arr_u, ts = n.arr_u, n.arr_ts
            if x in xs:
                # x is bound inside the witness schema; only instantiate
                # the free occurrences (premises and vectors)
                p1, p2 = go(n.premises[0]), go(n.premises[1])
                vs = tuple(tuple(sub(v) for v in vec) for vec in n.arr_vs)
                return arr_e(p1, p2, arr_u, ts, vs, xs)
            clash = [y for y in xs if y in fv_u]
            if clash:
                ren = {}
                avoid = _all_tvars(n) | fv_u | {x}
                for y in clash:
                    ny = fresh_tname(y, avoid)
                    avoid.add(ny)
                    ren[y] = ny
                xs = tuple(ren.get(y, y) for y in xs)
                for y, ny in ren.items():
                    arr_u = type_subst(arr_u, y, TVar(ny))
                    ts = tuple(type_subst(t, y, TVar(ny)) for t in ts)
            p1, p2 = go(n.premises[0]), go(n.premises[1])
            vs = tuple(tuple(sub(v) for v in vec) for vec in n.arr_vs)
            return arr_e(p1, p2, sub(arr_u), tuple(sub(t) for t in ts), vs, xs)
        raise UnsupportedDerivationShape(n.rule)

    return go(d)


def subst_derivation(d: AddDerivation, x: str, dv: AddDerivation) -> AddDerivation:
    """From derivations of G,x:U |- t:T and G |- v:U, a derivation of
    G |- t[v/x] : T."""
    u = d.ctx.get(x)
    if u is None:
        raise RuleViolation((), f"{x} is not hypothesised")
    if dv.ctx != d.ctx.remove(x):
        raise RuleViolation((), "value premise context mismatch")
    if not type_equiv(dv.ty, u):
        raise RuleViolation((), "value premise type differs from the hypothesis")
    if not is_value(canonicalize(dv.term)):
        raise RuleViolation((), "only values substitute for term variables")

    def go(n: AddDerivation, dv: AddDerivation) -> AddDerivation:
        if n.rule == "ax":
            if n.term.name == x:
                return equiv(dv, n.ty)
            return ax(n.ctx.remove(x), n.term.name)
        if n.rule == "ax0":
            return ax0(n.ctx.remove(x))
        if n.rule == "equiv":
            return equiv(go(n.premises[0], dv), n.ty)
        if n.rule == "arrI":
            p, b = n.premises[0], n.binder
            if b == x:
                raise UnsupportedDerivationShape("binder shadows the substituted variable")
            dv2 = weaken(dv, b, p.ctx.get(b))
            return arr_i(go(p, dv2), b)
        if n.rule == "plusI":
            return plus_i(go(n.premises[0], dv), go(n.premises[1], dv))
        if n.rule == "forallI":
            return forall_i(go(n.premises[0], dv), n.binder)
        if n.rule == "forallE":
            return forall_e(go(n.premises[0], dv), n.inst_ty)
        if n.rule == "arrE":
            return arr_e(
                go(n.premises[0], dv), go(n.premises[1], dv),
                n.arr_u, n.arr_ts, n.arr_vs, n.arr_xs,
            )
        raise UnsupportedDerivationShape(n.rule)

    return go(d, dv)


# --- one-step reduction of derivations ---------------------------------------


from .reduction import Redex, StaleRedex, step  # noqa: E402
from .syntax import transfer_path  # noqa: E402


def decompose_sum(d: AddDerivation) -> list[AddDerivation]:
    """Split a derivation of a sum into one derivation per canonical
    component, listed in component order."""
    if not isinstance(canonicalize(d.term), Sum):
        return [d]
    if d.rule == "equiv":
        return decompose_sum(d.premises[0])
    if d.rule == "plusI":
        ps = decompose_sum(d.premises[0]) + decompose_sum(d.premises[1])
    elif d.rule in ("forallI", "forallE"):
        ps = decompose_sum(d.premises[0])
        live = [i for i, p in enumerate(ps) if type_canonicalize(p.ty) is not TZero]
        if len(live) != 1:
            raise UnsupportedDerivationShape(
                "quantifier rule over a sum without a unique non-zero component"
            )
        k = live[0]
        if d.rule == "forallI":
            ps[k] = forall_i(ps[k], d.binder)
        else:
            ps[k] = forall_e(ps[k], d.inst_ty)
    else:
        raise UnsupportedDerivationShape(f"rule {d.rule} concludes a sum")
    ps.sort(key=lambda p: sort_key(p.term))
    parts = summands(canonicalize(d.term))
    if tuple(p.term for p in ps) != parts:
        raise UnsupportedDerivationShape("sum components do not line up")
    return ps


def _rebuild_sum(pieces: list[AddDerivation]) -> AddDerivation:
    out = pieces[0]
    for p in pieces[1:]:
        out = plus_i(out, p)
    return out


def _beta_subst_plan(wrappers, xs, vec) -> list[tuple[str, Type]]:
    """Read the type substitution performed by a redex off the
    quantifier nodes between an abstraction and its application."""
    binders: list[str] = []
    subs: list[tuple[str, Type]] = []

    def pop(v: Type):
        if not binders:
            raise UnsupportedDerivationShape("instantiation without a matching generalisation")
        x0 = binders.pop(0)
        fv = ftv(v)
        if any(b in fv for b in binders):
            raise UnsupportedDerivationShape("instantiation would capture a pending generalisation")
        subs.append((x0, v))

    for kind, w in reversed(wrappers):  # abstraction-to-application order
        if kind == "equiv":
            continue
        if kind == "forallI":
            if w in binders:
                raise UnsupportedDerivationShape("repeated generalisation binder")
            binders.insert(0, w)
        else:
            pop(w)
    if len(binders) != len(xs) or len(vec) != len(xs):
        raise UnsupportedDerivationShape("generalisation arity differs from the witness")
    for v in vec:
        pop(v)
    return subs


def _match_units(piece_ty: Type, expected: list[Type]) -> list[int]:
    """Indices of expected (canonical unit) types covered by a sum
    component's type, consuming duplicates left to right."""
    used: list[int] = []
    for un in type_summands(type_canonicalize(piece_ty)):
        for k, e in enumerate(expected):
            if k not in used and e == un:
                used.append(k)
                break
        else:
            raise UnsupportedDerivationShape("sum component type not among the witnesses")
    return sorted(used)


def _focus_beta(core: AddDerivation) -> AddDerivation:
    p1, p2 = core.premises
    if core.alpha != 1 or core.beta != 1:
        raise UnsupportedDerivationShape("redex premises are not unit-typed")
    c1, w1 = strip_wrappers(p1)
    if c1.rule != "arrI":
        raise UnsupportedDerivationShape(f"abstraction derived by {c1.rule}")
    subs = _beta_subst_plan(w1, core.arr_xs, core.arr_vs[0])
    body = c1.premises[0]
    for x, v in subs:
        body = type_subst_derivation(body, x, v)
    want_u = body.ctx.get(c1.binder)
    if want_u is None or body.ctx.remove(c1.binder) != core.ctx:
        raise UnsupportedDerivationShape("substituted body context mismatch")
    if not type_equiv(p2.ty, want_u):
        raise UnsupportedDerivationShape("argument type differs from the instantiated domain")
    out = subst_derivation(body, c1.binder, p2)
    return equiv(out, core.ty)


def _focus_dist(core: AddDerivation, part: int, side: int) -> AddDerivation:
    prem = core.premises[side]
    other = core.premises[1 - side]
    pieces = decompose_sum(prem)
    if not 0 <= part < len(pieces):
        raise StaleRedex("split component out of range")
    left, rest = pieces[part], pieces[:part] + pieces[part + 1:]
    u, ts, vs, xs = core.arr_u, core.arr_ts, core.arr_vs, core.arr_xs
    if side == 0:
        expected = [
            type_canonicalize(forall_close(xs, TArrow(u, t))) for t in ts
        ]
        kl = _match_units(left.ty, expected)
        kr = [k for k in range(len(ts)) if k not in kl]
        dl = arr_e(left, other, u, tuple(ts[k] for k in kl), vs, xs)
        dr = arr_e(_rebuild_sum(rest), other, u, tuple(ts[k] for k in kr), vs, xs)
    else:
        expected = [type_canonicalize(type_subst_vec(u, xs, vec)) for vec in vs]
        kl = _match_units(left.ty, expected)
        kr = [k for k in range(len(vs)) if k not in kl]
        dl = arr_e(other, left, u, ts, tuple(vs[k] for k in kl), xs)
        dr = arr_e(other, _rebuild_sum(rest), u, ts, tuple(vs[k] for k in kr), xs)
    return equiv(plus_i(dl, dr), core.ty)


def _focus(core: AddDerivation, r: Redex) -> AddDerivation:
    if r.rule == "beta":
        if core.rule != "arrE":
            raise UnsupportedDerivationShape(f"redex derived by {core.rule}")
        return _focus_beta(core)
    if r.rule in ("dist-right", "dist-left"):
        if core.rule != "arrE":
            raise UnsupportedDerivationShape(f"redex derived by {core.rule}")
        return _focus_dist(core, r.part, 0 if r.rule == "dist-right" else 1)
    if r.rule in ("zero-fun", "zero-arg"):
        if core.rule != "arrE":
            raise UnsupportedDerivationShape(f"redex derived by {core.rule}")
        if type_canonicalize(core.ty) is not TZero:
            raise UnsupportedDerivationShape("vanishing application is not zero-typed")
        return ax0(core.ctx)
    if r.rule == "sum-zero":
        pieces = decompose_sum(core)
        if not 0 <= r.part < len(pieces) or pieces[r.part].term is not Zero:
            raise StaleRedex("no zero component at the stated position")
        rest = pieces[:r.part] + pieces[r.part + 1:]
        return equiv(_rebuild_sum(rest), core.ty)
    raise StaleRedex(f"unknown rule {r.rule}")


def _descend(core: AddDerivation, r: Redex) -> AddDerivation:
    head, rest = r.path[0], r.path[1:]
    if core.rule == "arrE":
        if head not in (0, 1):
            raise StaleRedex("path leaves the application")
        sub = step_derivation(core.premises[head], Redex(rest, r.rule, r.part))
        ps = [core.premises[0], core.premises[1]]
        ps[head] = sub
        return arr_e(ps[0], ps[1], core.arr_u, core.arr_ts, core.arr_vs, core.arr_xs)
    if core.rule == "arrI":
        if head != 0:
            raise StaleRedex("path leaves the abstraction")
        p = core.premises[0]
        tail = {
            "dist-right": (0, r.part),
            "dist-left": (1, r.part),
            "sum-zero": (r.part,),
        }.get(r.rule, ())
        full = transfer_path(
            core.term.body, p.term, rest + tail, {core.term.var: core.binder}
        )
        if tail:
            new_path, new_part = full[: len(full) - len(tail)], full[-1]
        else:
            new_path, new_part = full, None
        sub = step_derivation(p, Redex(new_path, r.rule, new_part))
        return arr_i(sub, core.binder)
    if core.rule == "plusI":
        pieces = decompose_sum(core)
        if not 0 <= head < len(pieces):
            raise StaleRedex("path leaves the sum")
        pieces[head] = step_derivation(pieces[head], Redex(rest, r.rule, r.part))
        return equiv(_rebuild_sum(pieces), core.ty)
    raise UnsupportedDerivationShape(f"cannot follow the redex through {core.rule}")


def step_derivation(d: AddDerivation, r: Redex) -> AddDerivation:
    """Subject reduction, constructively: from a derivation of t and a
    redex t -> u, a derivation of u with the same context and type."""
    new_term = step(d.term, r)
    core, wrappers = strip_wrappers(d)
    if r.path == ():
        new_core = _focus(core, r)
    else:
        new_core = _descend(core, r)
    out = equiv(reapply_wrappers(new_core, wrappers), d.ty)
    if canonicalize(out.term) != new_term:
        raise UnsupportedDerivationShape(
            f"derivation stepped to {show_term(out.term)}, term to {show_term(new_term)}"
        )
    return out

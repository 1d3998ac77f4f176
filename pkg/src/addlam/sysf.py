"""System F with pairs and unit: the target calculus. Terms, types, a
derivation checker, full (non-deterministic) reduction including both
eta rules, and bounded reachability search."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .structured import Leaf, Node, TypeTree, ZeroLeaf


# --- types -------------------------------------------------------------------


class FType:
    __slots__ = ()


@dataclass(frozen=True)
class FTVar(FType):
    name: str


@dataclass(frozen=True)
class FArrow(FType):
    dom: FType
    cod: FType


@dataclass(frozen=True)
class FForall(FType):
    var: str
    body: FType


@dataclass(frozen=True)
class _FUnit(FType):
    def __repr__(self):
        return "FUnit"


@dataclass(frozen=True)
class FProd(FType):
    left: FType
    right: FType


FUnit = _FUnit()


def f_type_ftv(t: FType) -> frozenset[str]:
    match t:
        case FTVar(x):
            return frozenset((x,))
        case FArrow(a, b) | FProd(a, b):
            return f_type_ftv(a) | f_type_ftv(b)
        case FForall(x, b):
            return f_type_ftv(b) - {x}
        case _FUnit():
            return frozenset()
    raise TypeError(f"not a type: {t!r}")


def f_type_subst(t: FType, x: str, u: FType) -> FType:
    fv = f_type_ftv(u)

    def go(t: FType) -> FType:
        match t:
            case FTVar(y):
                return u if y == x else t
            case FArrow(a, b):
                return FArrow(go(a), go(b))
            case FProd(a, b):
                return FProd(go(a), go(b))
            case _FUnit():
                return t
            case FForall(y, b):
                if y == x:
                    return t
                if y in fv and x in f_type_ftv(b):
                    z = _f_fresh(y, fv | f_type_ftv(b))
                    b = f_type_subst(b, y, FTVar(z))
                    return FForall(z, go(b))
                return FForall(y, go(b))
        raise TypeError(f"not a type: {t!r}")

    return go(t)


def _f_fresh(base: str, avoid) -> str:
    stem = base.rstrip("0123456789") or base
    if stem not in avoid:
        return stem
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


def f_type_alpha_eq(a: FType, b: FType) -> bool:
    def go(a, b, ea, eb, d):
        match a, b:
            case FTVar(x), FTVar(y):
                return ea.get(x, x) == eb.get(y, y)
            case FArrow(d1, c1), FArrow(d2, c2):
                return go(d1, d2, ea, eb, d) and go(c1, c2, ea, eb, d)
            case FProd(l1, r1), FProd(l2, r2):
                return go(l1, l2, ea, eb, d) and go(r1, r2, ea, eb, d)
            case FForall(x, b1), FForall(y, b2):
                m = f"#{d}"
                return go(b1, b2, {**ea, x: m}, {**eb, y: m}, d + 1)
            case _FUnit(), _FUnit():
                return True
        return False

    return go(a, b, {}, {}, 0)


# --- terms -------------------------------------------------------------------


class FTerm:
    __slots__ = ()


@dataclass(frozen=True)
class FVar(FTerm):
    name: str


@dataclass(frozen=True)
class FAbs(FTerm):
    var: str
    body: FTerm


@dataclass(frozen=True)
class FApp(FTerm):
    fun: FTerm
    arg: FTerm


@dataclass(frozen=True)
class _Star(FTerm):
    def __repr__(self):
        return "Star"


@dataclass(frozen=True)
class FPair(FTerm):
    fst: FTerm
    snd: FTerm


@dataclass(frozen=True)
class FProjL(FTerm):
    body: FTerm


@dataclass(frozen=True)
class FProjR(FTerm):
    body: FTerm


Star = _Star()


def f_free_vars(t: FTerm) -> frozenset[str]:
    match t:
        case FVar(x):
            return frozenset((x,))
        case FAbs(x, b):
            return f_free_vars(b) - {x}
        case FApp(f, a) | FPair(f, a):
            return f_free_vars(f) | f_free_vars(a)
        case FProjL(b) | FProjR(b):
            return f_free_vars(b)
        case _Star():
            return frozenset()
    raise TypeError(f"not a term: {t!r}")


def f_canonicalize(t: FTerm) -> FTerm:
    """Positional renaming of binders; canonical forms are equal iff the
    terms are alpha-equivalent."""

    def go(t: FTerm, env: dict[str, str], d: int) -> FTerm:
        match t:
            case FVar(x):
                return FVar(env.get(x, x))
            case FAbs(x, b):
                nm = f"_{d}"
                return FAbs(nm, go(b, {**env, x: nm}, d + 1))
            case FApp(f, a):
                return FApp(go(f, env, d), go(a, env, d))
            case FPair(f, a):
                return FPair(go(f, env, d), go(a, env, d))
            case FProjL(b):
                return FProjL(go(b, env, d))
            case FProjR(b):
                return FProjR(go(b, env, d))
            case _Star():
                return t
        raise TypeError(f"not a term: {t!r}")

    return go(t, {}, 0)


def f_alpha_eq(a: FTerm, b: FTerm) -> bool:
    return f_canonicalize(a) == f_canonicalize(b)


def f_substitute(t: FTerm, x: str, v: FTerm) -> FTerm:
    fv = f_free_vars(v)

    def go(t: FTerm) -> FTerm:
        match t:
            case FVar(y):
                return v if y == x else t
            case FAbs(y, b):
                if y == x:
                    return t
                if y in fv and x in f_free_vars(b):
                    z = _f_fresh(y, fv | f_free_vars(b))
                    return FAbs(z, go(f_substitute(b, y, FVar(z))))
                return FAbs(y, go(b))
            case FApp(f, a):
                return FApp(go(f), go(a))
            case FPair(f, a):
                return FPair(go(f), go(a))
            case FProjL(b):
                return FProjL(go(b))
            case FProjR(b):
                return FProjR(go(b))
            case _Star():
                return t
        raise TypeError(f"not a term: {t!r}")

    return go(t)


def show_fterm(t: FTerm) -> str:
    def go(t: FTerm, level: int) -> str:
        match t:
            case FVar(x):
                return x
            case _Star():
                return "star"
            case FPair(f, s):
                return f"<{go(f, 0)}, {go(s, 0)}>"
            case FAbs(x, b):
                s = f"\\{x}. {go(b, 0)}"
                return f"({s})" if level > 0 else s
            case FApp(f, a):
                s = f"{go(f, 1)} {go(a, 2)}"
                return f"({s})" if level > 1 else s
            case FProjL(b):
                s = f"proj_l {go(b, 2)}"
                return f"({s})" if level > 1 else s
            case FProjR(b):
                s = f"proj_r {go(b, 2)}"
                return f"({s})" if level > 1 else s
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


def show_ftype(t: FType) -> str:
    def go(t: FType, level: int) -> str:
        match t:
            case FTVar(x):
                return x
            case _FUnit():
                return "1"
            case FForall(x, b):
                s = f"forall {x}. {go(b, 0)}"
                return f"({s})" if level > 0 else s
            case FArrow(a, b):
                s = f"{go(a, 2)} -> {go(b, 1)}"
                return f"({s})" if level > 1 else s
            case FProd(a, b):
                s = f"{go(a, 2)} * {go(b, 2)}"
                return f"({s})" if level > 1 else s
        raise TypeError(f"not a type: {t!r}")

    return go(t, 0)


# --- reduction ---------------------------------------------------------------


def _immediate_freducts(t: FTerm) -> list[FTerm]:
    out = []
    match t:
        case FApp(FAbs(x, b), a):
            out.append(f_substitute(b, x, a))
        case FProjL(FPair(f, _)):
            out.append(f)
        case FProjR(FPair(_, s)):
            out.append(s)
    match t:
        case FAbs(x, FApp(f, FVar(y))) if y == x and x not in f_free_vars(f):
            out.append(f)
        case FPair(FProjL(p), FProjR(q)) if f_alpha_eq(p, q):
            out.append(p)
    return out


def f_reducts(t: FTerm) -> frozenset[FTerm]:
    """All one-step reducts at all positions: full beta, projections and
    both eta rules."""
    out = set(f_canonicalize(u) for u in _immediate_freducts(t))

    def inside(build, sub):
        out.update(f_canonicalize(build(u)) for u in f_reducts(sub))

    match t:
        case FAbs(x, b):
            inside(lambda u: FAbs(x, u), b)
        case FApp(f, a):
            inside(lambda u: FApp(u, a), f)
            inside(lambda u: FApp(f, u), a)
        case FPair(f, s):
            inside(lambda u: FPair(u, s), f)
            inside(lambda u: FPair(f, u), s)
        case FProjL(b):
            inside(FProjL, b)
        case FProjR(b):
            inside(FProjR, b)
    return frozenset(out)


def f_normalize(t: FTerm, fuel: int = 10000) -> FTerm:
    """Deterministic normalisation by beta and projections only; the
    eta rules are deliberately left out of the strategy."""

    def head(t: FTerm) -> FTerm | None:
        match t:
            case FApp(FAbs(x, b), a):
                return f_substitute(b, x, a)
            case FProjL(FPair(f, _)):
                return f
            case FProjR(FPair(_, s)):
                return s
            case FAbs(x, b):
                r = head(b)
                return None if r is None else FAbs(x, r)
            case FApp(f, a):
                r = head(f)
                if r is not None:
                    return FApp(r, a)
                r = head(a)
                return None if r is None else FApp(f, r)
            case FPair(f, s):
                r = head(f)
                if r is not None:
                    return FPair(r, s)
                r = head(s)
                return None if r is None else FPair(f, r)
            case FProjL(b):
                r = head(b)
                return None if r is None else FProjL(r)
            case FProjR(b):
                r = head(b)
                return None if r is None else FProjR(r)
        return None

    for _ in range(fuel):
        r = head(t)
        if r is None:
            break
        t = r
    return f_canonicalize(t)


def f_reaches(t: FTerm, u: FTerm, budget: int = 10000):
    """Bounded breadth-first search for a reduction path t ->* u.
    Returns the path as a term list, or None within the budget."""
    t, u = f_canonicalize(t), f_canonicalize(u)
    if t == u:
        return [t]
    seen = {t: None}
    queue = deque([t])
    expanded = 0
    while queue and expanded < budget:
        cur = queue.popleft()
        expanded += 1
        for nxt in sorted(f_reducts(cur), key=repr):
            if nxt in seen:
                continue
            seen[nxt] = cur
            if nxt == u:
                path = [nxt]
                while path[-1] is not None and seen[path[-1]] is not None:
                    path.append(seen[path[-1]])
                return list(reversed(path))
            queue.append(nxt)
    return None


# --- typing ------------------------------------------------------------------


class FContext:
    """Immutable name-sorted typing context for the target calculus."""

    __slots__ = ("entries",)

    def __init__(self, entries=()):
        self.entries: tuple[tuple[str, FType], ...] = tuple(
            sorted(dict(entries).items())
        )

    def get(self, name):
        for k, v in self.entries:
            if k == name:
                return v
        return None

    def __contains__(self, name):
        return self.get(name) is not None

    def extend(self, name, ty):
        return FContext(dict(self.entries) | {name: ty})

    def remove(self, name):
        return FContext((k, v) for k, v in self.entries if k != name)

    def items(self):
        return self.entries

    def free_tvars(self):
        out = frozenset()
        for _, v in self.entries:
            out |= f_type_ftv(v)
        return out

    def __eq__(self, other):
        return isinstance(other, FContext) and all(
            x == y and f_type_alpha_eq(a, b)
            for (x, a), (y, b) in zip(self.entries, other.entries)
        ) and len(self.entries) == len(other.entries)

    def __hash__(self):
        return hash(tuple(k for k, _ in self.entries))

    def __str__(self):
        return ", ".join(f"{k}: {show_ftype(v)}" for k, v in self.entries) or "-"

    def __repr__(self):
        return f"FContext({self.entries!r})"


@dataclass(frozen=True)
class FDerivation:
    rule: str  # Ax UnitI ArrI ArrE ProdI ProdEl ProdEr ForallI ForallE
    ctx: FContext
    term: FTerm
    ty: FType
    premises: tuple["FDerivation", ...] = ()
    binder: str | None = None  # ArrI / ForallI
    inst_ty: FType | None = None  # ForallE

    def describe(self) -> str:
        return f"{self.rule}: {self.ctx} |- {show_fterm(self.term)} : {show_ftype(self.ty)}"


class FRuleViolation(Exception):
    def __init__(self, path, message):
        self.path = path
        self.message = message
        at = ".".join(map(str, path)) or "root"
        super().__init__(f"at {at}: {message}")


def _ffail(msg):
    raise FRuleViolation((), msg)


def f_ax(ctx: FContext, name: str) -> FDerivation:
    ty = ctx.get(name)
    if ty is None:
        _ffail(f"variable {name} not in context")
    return FDerivation("Ax", ctx, FVar(name), ty)


def f_unit_i(ctx: FContext) -> FDerivation:
    return FDerivation("UnitI", ctx, Star, FUnit)


def f_arr_i(d: FDerivation, binder: str) -> FDerivation:
    ty = d.ctx.get(binder)
    if ty is None:
        _ffail(f"binder {binder} not in premise context")
    return FDerivation(
        "ArrI", d.ctx.remove(binder), FAbs(binder, d.term),
        FArrow(ty, d.ty), (d,), binder=binder,
    )


def f_arr_e(d1: FDerivation, d2: FDerivation) -> FDerivation:
    if d1.ctx != d2.ctx:
        _ffail("application premises typed in different contexts")
    if not isinstance(d1.ty, FArrow):
        _ffail(f"applying a non-arrow of type {show_ftype(d1.ty)}")
    if not f_type_alpha_eq(d1.ty.dom, d2.ty):
        _ffail(
            f"argument type {show_ftype(d2.ty)} differs from the domain "
            f"{show_ftype(d1.ty.dom)}"
        )
    return FDerivation("ArrE", d1.ctx, FApp(d1.term, d2.term), d1.ty.cod, (d1, d2))


def f_prod_i(d1: FDerivation, d2: FDerivation) -> FDerivation:
    if d1.ctx != d2.ctx:
        _ffail("pair premises typed in different contexts")
    return FDerivation(
        "ProdI", d1.ctx, FPair(d1.term, d2.term), FProd(d1.ty, d2.ty), (d1, d2)
    )


def f_proj_l(d: FDerivation) -> FDerivation:
    if not isinstance(d.ty, FProd):
        _ffail(f"projecting from a non-product of type {show_ftype(d.ty)}")
    return FDerivation("ProdEl", d.ctx, FProjL(d.term), d.ty.left, (d,))


def f_proj_r(d: FDerivation) -> FDerivation:
    if not isinstance(d.ty, FProd):
        _ffail(f"projecting from a non-product of type {show_ftype(d.ty)}")
    return FDerivation("ProdEr", d.ctx, FProjR(d.term), d.ty.right, (d,))


def f_forall_i(d: FDerivation, binder: str) -> FDerivation:
    if binder in d.ctx.free_tvars():
        _ffail(f"{binder} occurs free in the context")
    return FDerivation(
        "ForallI", d.ctx, d.term, FForall(binder, d.ty), (d,), binder=binder
    )


def f_forall_e(d: FDerivation, ty: FType) -> FDerivation:
    if not isinstance(d.ty, FForall):
        _ffail(f"instantiating a non-quantified type {show_ftype(d.ty)}")
    return FDerivation(
        "ForallE", d.ctx, d.term, f_type_subst(d.ty.body, d.ty.var, ty), (d,),
        inst_ty=ty,
    )


def _f_check_node(d: FDerivation, path):
    def bad(msg):
        raise FRuleViolation(path, msg)

    ps = d.premises
    if d.rule == "Ax":
        ty = d.ctx.get(d.term.name) if isinstance(d.term, FVar) else None
        if ty is None or not f_type_alpha_eq(ty, d.ty):
            bad("axiom does not read its type off the context")
    elif d.rule == "UnitI":
        if d.term is not Star or d.ty is not FUnit:
            bad("the unit axiom must type star with 1")
    elif d.rule == "ArrI":
        (p,) = ps
        dom = p.ctx.get(d.binder or "")
        if dom is None or p.ctx.remove(d.binder) != d.ctx:
            bad("abstraction context mismatch")
        if not f_alpha_eq(d.term, FAbs(d.binder, p.term)):
            bad("abstraction subject mismatch")
        if not f_type_alpha_eq(d.ty, FArrow(dom, p.ty)):
            bad("abstraction type mismatch")
    elif d.rule == "ArrE":
        p1, p2 = ps
        if p1.ctx != d.ctx or p2.ctx != d.ctx:
            bad("application context mismatch")
        if not isinstance(p1.ty, FArrow) or not f_type_alpha_eq(p1.ty.dom, p2.ty):
            bad("application premises do not compose")
        if not f_alpha_eq(d.term, FApp(p1.term, p2.term)):
            bad("application subject mismatch")
        if not f_type_alpha_eq(d.ty, p1.ty.cod):
            bad("application result type mismatch")
    elif d.rule == "ProdI":
        p1, p2 = ps
        if p1.ctx != d.ctx or p2.ctx != d.ctx:
            bad("pair context mismatch")
        if not f_alpha_eq(d.term, FPair(p1.term, p2.term)):
            bad("pair subject mismatch")
        if not f_type_alpha_eq(d.ty, FProd(p1.ty, p2.ty)):
            bad("pair type mismatch")
    elif d.rule in ("ProdEl", "ProdEr"):
        (p,) = ps
        if p.ctx != d.ctx or not isinstance(p.ty, FProd):
            bad("projection premise is not a product")
        want_tm = FProjL(p.term) if d.rule == "ProdEl" else FProjR(p.term)
        want_ty = p.ty.left if d.rule == "ProdEl" else p.ty.right
        if not f_alpha_eq(d.term, want_tm) or not f_type_alpha_eq(d.ty, want_ty):
            bad("projection conclusion mismatch")
    elif d.rule == "ForallI":
        (p,) = ps
        if p.ctx != d.ctx or not f_alpha_eq(p.term, d.term):
            bad("generalisation changes the subject")
        if d.binder in d.ctx.free_tvars():
            bad(f"{d.binder} occurs free in the context")
        if not f_type_alpha_eq(d.ty, FForall(d.binder, p.ty)):
            bad("generalised type mismatch")
    elif d.rule == "ForallE":
        (p,) = ps
        if p.ctx != d.ctx or not f_alpha_eq(p.term, d.term):
            bad("instantiation changes the subject")
        if not isinstance(p.ty, FForall) or d.inst_ty is None:
            bad("instantiation premise is not quantified")
        if not f_type_alpha_eq(d.ty, f_type_subst(p.ty.body, p.ty.var, d.inst_ty)):
            bad("instantiated type mismatch")
    else:
        bad(f"unknown rule {d.rule!r}")


def f_check(d: FDerivation, path: tuple[int, ...] = ()):
    """Validate every node; raises FRuleViolation at the offending node."""
    for i, p in enumerate(d.premises):
        f_check(p, path + (i,))
    _f_check_node(d, path)


def is_valid_f(d: FDerivation) -> bool:
    try:
        f_check(d)
        return True
    except FRuleViolation:
        return False


# --- trees as pairs ----------------------------------------------------------


def ftree_label(a: TypeTree, phi: dict[str, FType], prefix: str = "") -> FType:
    """Read a tree with F-types at its leaves as nested products; a
    zero leaf becomes the unit type."""
    match a:
        case Leaf():
            return phi[prefix]
        case ZeroLeaf():
            return FUnit
        case Node(l, r):
            return FProd(
                ftree_label(l, phi, prefix + "l"), ftree_label(r, phi, prefix + "r")
            )
    raise TypeError(f"not a tree: {a!r}")


def ftree_term(a: TypeTree, tau: dict[str, FTerm], prefix: str = "") -> FTerm:
    """Read a tree with F-terms at its leaves as nested pairs; a zero
    leaf becomes star."""
    match a:
        case Leaf():
            return tau[prefix]
        case ZeroLeaf():
            return Star
        case Node(l, r):
            return FPair(
                ftree_term(l, tau, prefix + "l"), ftree_term(r, tau, prefix + "r")
            )
    raise TypeError(f"not a tree: {a!r}")


def ftree_derivation(a: TypeTree, taud: dict[str, FDerivation], ctx: FContext) -> FDerivation:
    """Pair up leaf derivations along a tree shape."""
    match a:
        case Leaf():
            return taud[""]
        case ZeroLeaf():
            return f_unit_i(ctx)
        case Node(l, r):
            dl = ftree_derivation(l, {w[1:]: d for w, d in taud.items() if w.startswith("l")}, ctx)
            dr = ftree_derivation(r, {w[1:]: d for w, d in taud.items() if w.startswith("r")}, ctx)
            return f_prod_i(dl, dr)
    raise TypeError(f"not a tree: {a!r}")


def proj_path(t: FTerm, w: str) -> FTerm:
    """Projection chain selecting the leaf at address w: the first
    letter of w is the innermost projection, so the outermost one is
    the last (the mirror-word convention)."""
    for c in w:
        t = FProjL(t) if c == "l" else FProjR(t)
    return t


def proj_path_derivation(d: FDerivation, w: str) -> FDerivation:
    """Typed version of proj_path: project a tree-typed derivation down
    to the component at address w."""
    for c in w:
        d = f_proj_l(d) if c == "l" else f_proj_r(d)
    return d

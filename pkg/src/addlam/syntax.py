"""Terms of the source calculus, kept in AC-canonical form.

A term is a variable, an abstraction, an application, an n-ary sum, or
the impossible computation ``zero``.  Sums are flattened multisets held
in a deterministic, alpha-invariant order, so alpha-AC-equivalent terms
have one representation and can be compared with ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return show_term(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Abs(Term):
    var: str
    body: Term

    def __repr__(self):
        return f"Abs({self.var!r}, {self.body!r})"


@dataclass(frozen=True, repr=False)
class App(Term):
    fun: Term
    arg: Term

    def __repr__(self):
        return f"App({self.fun!r}, {self.arg!r})"


@dataclass(frozen=True, repr=False)
class Sum(Term):
    parts: tuple[Term, ...]  # length >= 2, no nested Sum once canonical

    def __repr__(self):
        return f"Sum({list(self.parts)!r})"


@dataclass(frozen=True, repr=False)
class _Zero(Term):
    def __repr__(self):
        return "Zero"


Zero = _Zero()

# Canonical binder names are positional (lambda-nesting depth), which the
# surface grammar cannot produce, so they never collide with user names.


def _binder(depth: int) -> str:
    return f"_{depth}"


def sort_key(t: Term):
    """Structural key; total order Var < Abs < App < Sum < Zero."""
    match t:
        case Var(x):
            return (0, x)
        case Abs(_, b):
            return (1, sort_key(b))
        case App(f, a):
            return (2, sort_key(f), sort_key(a))
        case Sum(ps):
            return (3, len(ps), tuple(sort_key(p) for p in ps))
        case _Zero():
            return (4,)
    raise TypeError(f"not a term: {t!r}")


def _canon(t: Term, env: dict[str, str], depth: int) -> Term:
    match t:
        case Var(x):
            return Var(env.get(x, x))
        case Abs(x, b):
            nx = _binder(depth)
            return Abs(nx, _canon(b, {**env, x: nx}, depth + 1))
        case App(f, a):
            return App(_canon(f, env, depth), _canon(a, env, depth))
        case Sum(ps):
            flat: list[Term] = []
            for p in ps:
                cp = _canon(p, env, depth)
                if isinstance(cp, Sum):
                    flat.extend(cp.parts)
                else:
                    flat.append(cp)
            flat.sort(key=sort_key)
            if len(flat) == 1:
                return flat[0]
            return Sum(tuple(flat))
        case _Zero():
            return Zero
    raise TypeError(f"not a term: {t!r}")


def canonicalize(t: Term) -> Term:
    """Unique representative modulo alpha and AC of +.  Idempotent.

    Zero summands are kept: ``t + 0 -> t`` is a reduction step, not a
    term equivalence.
    """
    return _canon(t, {}, 0)


def mk_sum(parts) -> Term:
    """Canonical sum of the given terms (flattens; unary collapses)."""
    parts = tuple(parts)
    if not parts:
        raise ValueError("empty sum")
    if len(parts) == 1:
        return canonicalize(parts[0])
    return canonicalize(Sum(parts))


def summands(t: Term) -> tuple[Term, ...]:
    """The summand multiset of a canonical term (singleton if not a sum)."""
    return t.parts if isinstance(t, Sum) else (t,)


def alpha_eq(t: Term, u: Term) -> bool:
    return canonicalize(t) == canonicalize(u)


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(x):
            return frozenset((x,))
        case Abs(x, b):
            return free_vars(b) - {x}
        case App(f, a):
            return free_vars(f) | free_vars(a)
        case Sum(ps):
            out = frozenset()
            for p in ps:
                out |= free_vars(p)
            return out
        case _Zero():
            return frozenset()
    raise TypeError(f"not a term: {t!r}")


def fresh_name(base: str, avoid) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def _subst(t: Term, x: str, v: Term, fv_v: frozenset[str]) -> Term:
    match t:
        case Var(y):
            return v if y == x else t
        case Abs(y, b):
            if y == x:
                return t
            if y in fv_v:
                ny = fresh_name(y, fv_v | free_vars(b))
                b = _subst(b, y, Var(ny), frozenset((ny,)))
                y = ny
            return Abs(y, _subst(b, x, v, fv_v))
        case App(f, a):
            return App(_subst(f, x, v, fv_v), _subst(a, x, v, fv_v))
        case Sum(ps):
            return Sum(tuple(_subst(p, x, v, fv_v) for p in ps))
        case _Zero():
            return t
    raise TypeError(f"not a term: {t!r}")


def substitute(t: Term, x: str, v: Term) -> Term:
    """Capture-avoiding substitution of v for x; result canonical."""
    return canonicalize(_subst(t, x, v, free_vars(v)))


def is_value(t: Term) -> bool:
    """Values are variables and abstractions."""
    return isinstance(t, (Var, Abs))


def is_pseudo_value(t: Term) -> bool:
    """An abstraction or a sum of abstractions."""
    if isinstance(t, Abs):
        return True
    if isinstance(t, Sum):
        return all(is_pseudo_value(p) for p in t.parts)
    return False


@dataclass(frozen=True)
class TermClass:
    tag: str  # "value" | "pseudo-value" | "neutral"
    is_value: bool
    is_pseudo_value: bool

    @property
    def is_neutral(self) -> bool:
        return not self.is_pseudo_value


def classify(t: Term) -> TermClass:
    v, pv = is_value(t), is_pseudo_value(t)
    if v:
        tag = "value"
    elif pv:
        tag = "pseudo-value"
    else:
        tag = "neutral"
    return TermClass(tag, v, pv)


# --- printing ------------------------------------------------------------

_NICE = "xyzwuvst"


def _display_names(t: Term) -> dict[int, str]:
    """Readable names for positional binders, avoiding free variables."""
    taken = set(free_vars(t))
    names: dict[int, str] = {}

    def depth_of(u: Term, d: int, maxd: list[int]):
        match u:
            case Abs(_, b):
                maxd[0] = max(maxd[0], d + 1)
                depth_of(b, d + 1, maxd)
            case App(f, a):
                depth_of(f, d, maxd)
                depth_of(a, d, maxd)
            case Sum(ps):
                for p in ps:
                    depth_of(p, d, maxd)

    maxd = [0]
    depth_of(t, 0, maxd)
    for d in range(maxd[0]):
        base = _NICE[d % len(_NICE)]
        nm = fresh_name(base, taken)
        taken.add(nm)
        names[d] = nm
    return names


def show_term(t: Term) -> str:
    names = _display_names(canonicalize(t))

    def go(u: Term, level: int, env: dict[str, str], d: int) -> str:
        match u:
            case Var(x):
                return env.get(x, x)
            case _Zero():
                return "zero"
            case Abs(x, b):
                nm = names.get(d, x)
                s = f"\\{nm}. {go(b, 0, {**env, x: nm}, d + 1)}"
                return f"({s})" if level > 0 else s
            case Sum(ps):
                s = " + ".join(go(p, 2, env, d) for p in ps)
                return f"({s})" if level > 1 else s
            case App(f, a):
                s = f"{go(f, 2, env, d)} {go(a, 3, env, d)}"
                return f"({s})" if level > 2 else s
        raise TypeError(f"not a term: {u!r}")

    return go(canonicalize(t), 0, {}, 0)


def alpha_eq_ren(a: Term, b: Term, ren: dict[str, str]) -> bool:
    """Alpha equivalence where free variables of a are read through ren."""
    match (a, b):
        case (Var(x), Var(y)):
            return ren.get(x, x) == y
        case (_Zero(), _Zero()):
            return True
        case (Abs(x, s), Abs(y, u)):
            return alpha_eq_ren(s, u, {**ren, x: y})
        case (App(f, s), App(g, u)):
            return alpha_eq_ren(f, g, ren) and alpha_eq_ren(s, u, ren)
        case (Sum(ps), Sum(qs)) if len(ps) == len(qs):
            used = [False] * len(qs)
            for p in ps:
                for j, q in enumerate(qs):
                    if not used[j] and alpha_eq_ren(p, q, ren):
                        used[j] = True
                        break
                else:
                    return False
            return True
    return False


def transfer_path(a: Term, b: Term, path: tuple[int, ...], ren: dict[str, str]) -> tuple[int, ...]:
    """Translate a subterm path in a to the corresponding path in b,
    where b is alpha-equal to a through the free-variable renaming ren.
    Alpha-variants may order sum components differently, so indices
    into sums are re-matched rather than copied."""
    out: list[int] = []
    for i in path:
        match (a, b):
            case (App(f, s), App(g, u)):
                out.append(i)
                a, b = (f, g) if i == 0 else (s, u)
            case (Abs(x, s), Abs(y, u)):
                out.append(0)
                ren = {**ren, x: y}
                a, b = s, u
            case (Sum(ps), Sum(qs)):
                part = ps[i]
                for j, q in enumerate(qs):
                    if alpha_eq_ren(part, q, ren):
                        out.append(j)
                        a, b = part, q
                        break
                else:
                    raise ValueError("terms are not alpha-correspondent")
            case _:
                raise ValueError("path leaves the term")
    return tuple(out)

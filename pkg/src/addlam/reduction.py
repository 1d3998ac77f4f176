"""Small-step reduction: two distributivity rules, three zero rules and
call-by-value beta, applied at any position modulo AC of sums."""

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
    is_value,
    mk_sum,
    show_term,
    substitute,
)

RULES = ("dist-right", "dist-left", "zero-fun", "zero-arg", "sum-zero", "beta")


class StaleRedex(Exception):
    """The redex does not address a matching subterm of the given term."""


@dataclass(frozen=True)
class Redex:
    path: tuple[int, ...]
    rule: str
    part: int | None = None  # summand split off by a dist/sum-zero rule


def subterm_at(t: Term, path: tuple[int, ...]) -> Term:
    for i in path:
        match t:
            case App(f, a):
                t = (f, a)[i]
            case Abs(_, b) if i == 0:
                t = b
            case Sum(ps):
                t = ps[i]
            case _:
                raise StaleRedex(f"no child {i} at {show_term(t)}")
    return t


def _replace_at(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    i, rest = path[0], path[1:]
    match t:
        case App(f, a):
            if i == 0:
                return App(_replace_at(f, rest, new), a)
            return App(f, _replace_at(a, rest, new))
        case Abs(x, b) if i == 0:
            return Abs(x, _replace_at(b, rest, new))
        case Sum(ps):
            parts = list(ps)
            parts[i] = _replace_at(parts[i], rest, new)
            return Sum(tuple(parts))
    raise StaleRedex(f"no child {i} at {show_term(t)}")


def enumerate_redexes(t: Term) -> frozenset[Redex]:
    """All rule occurrences in the canonical term, with distributivity
    splits of the form {one summand} vs {rest}."""
    t = canonicalize(t)
    out: list[Redex] = []

    def walk(u: Term, path: tuple[int, ...]):
        match u:
            case App(f, a):
                if f is Zero:
                    out.append(Redex(path, "zero-fun"))
                if a is Zero:
                    out.append(Redex(path, "zero-arg"))
                if isinstance(f, Sum):
                    for i in range(len(f.parts)):
                        out.append(Redex(path, "dist-right", i))
                if isinstance(a, Sum):
                    for i in range(len(a.parts)):
                        out.append(Redex(path, "dist-left", i))
                if isinstance(f, Abs) and is_value(a):
                    out.append(Redex(path, "beta"))
                walk(f, path + (0,))
                walk(a, path + (1,))
            case Abs(_, b):
                walk(b, path + (0,))
            case Sum(ps):
                for i, p in enumerate(ps):
                    if p is Zero:
                        out.append(Redex(path, "sum-zero", i))
                        break  # removing any zero gives the same reduct
                for i, p in enumerate(ps):
                    walk(p, path + (i,))

    walk(t, ())
    return frozenset(out)


def _split(parts: tuple[Term, ...], i: int) -> tuple[Term, Term]:
    if not 0 <= i < len(parts):
        raise StaleRedex(f"no summand {i} in a {len(parts)}-ary sum")
    rest = parts[:i] + parts[i + 1 :]
    return parts[i], rest[0] if len(rest) == 1 else Sum(rest)


def _contract(u: Term, r: Redex) -> Term:
    match r.rule, u:
        case "beta", App(Abs(x, b), v) if is_value(v):
            return substitute(b, x, v)
        case "dist-right", App(Sum(ps), a):
            one, rest = _split(ps, r.part)
            return Sum((App(one, a), App(rest, a)))
        case "dist-left", App(f, Sum(ps)):
            one, rest = _split(ps, r.part)
            return Sum((App(f, one), App(f, rest)))
        case "zero-fun", App(f, _) if f is Zero:
            return Zero
        case "zero-arg", App(_, a) if a is Zero:
            return Zero
        case "sum-zero", Sum(ps):
            if ps[r.part] is not Zero:
                raise StaleRedex("sum-zero split is not a zero summand")
            _, rest = _split(ps, r.part)
            return rest
    raise StaleRedex(f"rule {r.rule} does not match {show_term(u)}")


def step(t: Term, r: Redex) -> Term:
    """Canonical contractum of one redex."""
    t = canonicalize(t)
    u = subterm_at(t, r.path)
    return canonicalize(_replace_at(t, r.path, _contract(u, r)))


def reducts(t: Term) -> frozenset[Term]:
    """One-step reduct set up to AC."""
    return frozenset(step(t, r) for r in enumerate_redexes(t))


@dataclass(frozen=True)
class TraceStep:
    rule: str
    path: tuple[int, ...]
    before: Term
    after: Term

    def __str__(self):
        at = ".".join(map(str, self.path)) or "e"
        return f"{self.rule} @ {at} : {show_term(self.before)} ==> {show_term(self.after)}"


@dataclass(frozen=True)
class NormalizeResult:
    term: Term
    steps: tuple[TraceStep, ...]
    exhausted: bool


def _strategy_key(r: Redex):
    # distributivity and zero rules before beta; then innermost-leftmost
    return (1 if r.rule == "beta" else 0, -len(r.path), r.path, r.rule, r.part or 0)


def normalize(t: Term, fuel: int = 10000) -> NormalizeResult:
    """Deterministic normalisation (innermost, non-beta rules first)."""
    t = canonicalize(t)
    trace: list[TraceStep] = []
    while fuel > 0:
        rs = enumerate_redexes(t)
        if not rs:
            return NormalizeResult(t, tuple(trace), False)
        r = min(rs, key=_strategy_key)
        u = step(t, r)
        trace.append(TraceStep(r.rule, r.path, t, u))
        t = u
        fuel -= 1
    return NormalizeResult(t, tuple(trace), True)


@dataclass(frozen=True)
class SnResult:
    status: str  # "terminates" | "budget-exhausted"
    max_depth: int = 0
    states: int = 0
    cycle: bool = False

    @property
    def terminates(self) -> bool:
        return self.status == "terminates"


class _Abort(Exception):
    def __init__(self, cycle: bool):
        self.cycle = cycle


def check_sn(t: Term, budget: int = 100000) -> SnResult:
    """Exhaustive search of the reduction graph.

    Reports the longest reduction path when the graph is finite and
    acyclic within the budget; a cycle counts as exhaustion (it is a
    witness of an infinite reduction)."""
    t = canonicalize(t)
    memo: dict[Term, int] = {}
    onstack: set[Term] = set()
    seen = 0

    def depth(u: Term) -> int:
        nonlocal seen
        if u in memo:
            return memo[u]
        if u in onstack:
            raise _Abort(cycle=True)
        seen += 1
        if seen > budget:
            raise _Abort(cycle=False)
        onstack.add(u)
        best = 0
        for v in reducts(u):
            best = max(best, 1 + depth(v))
        onstack.discard(u)
        memo[u] = best
        return best

    try:
        d = depth(t)
    except _Abort as a:
        return SnResult("budget-exhausted", 0, seen, a.cycle)
    except RecursionError:
        return SnResult("budget-exhausted", 0, seen, False)
    return SnResult("terminates", d, seen, False)

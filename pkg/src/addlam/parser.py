"""Text syntax for terms, types, annotated terms, target-calculus terms
and types, and type trees. Application binds tighter than +, arrows are
right-associative and bind tighter than +, and binders extend to the
right as far as possible."""

from __future__ import annotations

from dataclasses import dataclass

from .derivation import AAbs, AApp, AGen, AInst, ASum, ATerm, AVar, AZero, AppWitness
from .structured import LEAF, Node, TypeTree, ZLEAF
from .syntax import Abs, App, Sum, Term, Var, Zero
from .sysf import (
    FAbs,
    FApp,
    FArrow,
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
)
from .typesys import TArrow, TForall, TSum, TVar, TZero, Type


class ParseError(Exception):
    """A syntax error with its position in the input."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "sym", "eof"
    text: str
    line: int
    col: int


_SYMBOLS = ("->", "\\", ".", "(", ")", "+", "*", "<", ">", ",", "{", "}",
            "[", "]", "|", ";", ":")


def tokenize(src: str) -> list[Token]:
    toks = []
    line, col, i = 1, 1, 0
    while i < len(src):
        c = src[i]
        if c == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if c.isspace():
            col, i = col + 1, i + 1
            continue
        if c.isalnum() or c == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            toks.append(Token("ident", src[i:j], line, col))
            col, i = col + (j - i), j
            continue
        for s in _SYMBOLS:
            if src.startswith(s, i):
                toks.append(Token("sym", s, line, col))
                col, i = col + len(s), i + len(s)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.toks = tokenize(src)
        self.pos = 0

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg: str):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.text == text and t.kind != "eof"

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def ident(self, what: str = "a name") -> str:
        t = self.peek()
        if t.kind != "ident":
            self.fail(f"expected {what}")
        return self.next().text

    def done(self):
        if self.peek().kind != "eof":
            self.fail("unexpected trailing input")

    # --- source terms ---

    def term(self) -> Term:
        parts = [self.term_app()]
        while self.eat("+"):
            parts.append(self.term_app())
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))

    def term_app(self) -> Term:
        t = self.term_atom()
        while self._at_term_atom():
            t = App(t, self.term_atom())
        return t

    def _at_term_atom(self) -> bool:
        p = self.peek()
        return p.kind == "ident" or p.text in ("\\", "(")

    def term_atom(self) -> Term:
        if self.eat("\\"):
            x = self.ident("a variable")
            self.expect(".")
            return Abs(x, self.term())
        if self.eat("("):
            t = self.term()
            self.expect(")")
            return t
        name = self.ident("a term")
        return Zero if name == "zero" else Var(name)

    # --- source types ---

    def type_(self) -> Type:
        parts = [self.type_arrow()]
        while self.eat("+"):
            parts.append(self.type_arrow())
        return parts[0] if len(parts) == 1 else TSum(tuple(parts))

    def type_arrow(self) -> Type:
        t = self.type_atom()
        if self.eat("->"):
            return TArrow(t, self.type_arrow())
        return t

    def type_atom(self) -> Type:
        if self.eat("("):
            t = self.type_()
            self.expect(")")
            return t
        name = self.ident("a type")
        if name == "void":
            return TZero
        if name == "forall":
            x = self.ident("a type variable")
            self.expect(".")
            return TForall(x, self.type_())
        return TVar(name)

    # --- annotated terms ---

    def aterm(self) -> ATerm:
        parts = [self.aterm_app()]
        while self.eat("+"):
            parts.append(self.aterm_app())
        return parts[0] if len(parts) == 1 else ASum(tuple(parts))

    def aterm_app(self) -> ATerm:
        t = self.aterm_atom()
        while self._at_aterm_atom():
            arg = self.aterm_atom()
            wit = self.witness() if self.at("{") else None
            t = AApp(t, arg, wit)
        return t

    def _at_aterm_atom(self) -> bool:
        p = self.peek()
        return p.kind == "ident" or p.text in ("\\", "(")

    def aterm_atom(self) -> ATerm:
        if self.eat("\\"):
            x = self.ident("a variable")
            self.expect(":")
            ann = self.type_arrow()
            self.expect(".")
            return AAbs(x, ann, self.aterm())
        if self.eat("("):
            t = self.aterm()
            self.expect(")")
            return t
        name = self.ident("a term")
        if name == "zero":
            return AZero()
        if name == "gen":
            x = self.ident("a type variable")
            self.expect(".")
            return AGen(x, self.aterm())
        if name == "inst":
            body = self.aterm_atom()
            self.expect("[")
            ty = self.type_()
            self.expect("]")
            return AInst(body, ty)
        return AVar(name)

    def witness(self) -> AppWitness:
        """{ U | T1, T2 | [V11, V12], [V21] | X, Y }"""
        self.expect("{")
        u = self.type_()
        self.expect("|")
        ts = [self.type_()]
        while self.eat(","):
            ts.append(self.type_())
        self.expect("|")
        vs = [self._type_vec()]
        while self.eat(","):
            vs.append(self._type_vec())
        self.expect("|")
        xs: list[str] = []
        if self.peek().kind == "ident":
            xs.append(self.ident())
            while self.eat(","):
                xs.append(self.ident())
        self.expect("}")
        return AppWitness(u, tuple(ts), tuple(vs), tuple(xs))

    def _type_vec(self) -> tuple[Type, ...]:
        self.expect("[")
        vec: list[Type] = []
        if not self.at("]"):
            vec.append(self.type_())
            while self.eat(","):
                vec.append(self.type_())
        self.expect("]")
        return tuple(vec)

    # --- target-calculus terms ---

    def fterm(self) -> FTerm:
        t = self.fterm_atom()
        while self._at_fterm_atom():
            t = FApp(t, self.fterm_atom())
        return t

    def _at_fterm_atom(self) -> bool:
        p = self.peek()
        return p.kind == "ident" or p.text in ("\\", "(", "<")

    def fterm_atom(self) -> FTerm:
        if self.eat("\\"):
            x = self.ident("a variable")
            self.expect(".")
            return FAbs(x, self.fterm())
        if self.eat("("):
            t = self.fterm()
            self.expect(")")
            return t
        if self.eat("<"):
            a = self.fterm()
            self.expect(",")
            b = self.fterm()
            self.expect(">")
            return FPair(a, b)
        name = self.ident("a term")
        if name == "star":
            return Star
        if name == "proj_l":
            return FProjL(self.fterm_atom())
        if name == "proj_r":
            return FProjR(self.fterm_atom())
        return FVar(name)

    # --- target-calculus types ---

    def ftype(self) -> FType:
        t = self.ftype_prod()
        if self.eat("->"):
            return FArrow(t, self.ftype())
        return t

    def ftype_prod(self) -> FType:
        t = self.ftype_atom()
        while self.eat("*"):
            t = FProd(t, self.ftype_atom())
        return t

    def ftype_atom(self) -> FType:
        if self.eat("("):
            t = self.ftype()
            self.expect(")")
            return t
        name = self.ident("a type")
        if name == "1":
            return FUnit
        if name == "forall":
            x = self.ident("a type variable")
            self.expect(".")
            return FForall(x, self.ftype())
        return FTVar(name)

    # --- type trees ---

    def tree(self) -> TypeTree:
        if self.eat("("):
            left = self.tree()
            if not (self.eat(".") or self.eat("|")):
                self.fail("expected '.' between subtrees")
            right = self.tree()
            self.expect(")")
            return Node(left, right)
        name = self.ident("a tree")
        if name in ("L", "leaf"):
            return LEAF
        if name in ("Z", "zero"):
            return ZLEAF
        self.fail(f"unknown tree leaf {name!r}")

    def labelling(self) -> dict[str, Type]:
        """{ ll: X, lr: X -> void, _: ... } with _ for the root address."""
        self.expect("{")
        out: dict[str, Type] = {}
        if not self.at("}"):
            while True:
                addr = self.ident("a leaf address")
                if addr == "_":
                    addr = ""
                elif set(addr) - set("lr"):
                    self.fail(f"bad leaf address {addr!r}")
                self.expect(":")
                out[addr] = self.type_()
                if not self.eat(","):
                    break
        self.expect("}")
        return out


def _run(src: str, method: str):
    p = _Parser(src)
    out = getattr(p, method)()
    p.done()
    return out


def parse_term(src: str) -> Term:
    return _run(src, "term")


def parse_type(src: str) -> Type:
    return _run(src, "type_")


def parse_aterm(src: str) -> ATerm:
    """An annotation-carrying term, elaborated elsewhere to a derivation."""
    return _run(src, "aterm")


def parse_derivation(src: str) -> ATerm:
    return parse_aterm(src)


def parse_fterm(src: str) -> FTerm:
    return _run(src, "fterm")


def parse_ftype(src: str) -> FType:
    return _run(src, "ftype")


def parse_tree(src: str) -> TypeTree:
    return _run(src, "tree")


def parse_context(src: str) -> list[tuple[str, Type]]:
    """Comma-separated hypotheses: `x: X, f: X -> X`."""
    p = _Parser(src)
    out: list[tuple[str, Type]] = []
    if p.peek().kind != "eof":
        while True:
            x = p.ident("a variable")
            p.expect(":")
            out.append((x, p.type_()))
            if not p.eat(","):
                break
    p.done()
    return out

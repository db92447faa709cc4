"""Tiny expression language for one-parameter analytic families f_n(z).

Grammar (whitespace between tokens is ignored)::

    expr    := term { ("+" | "-") term }
    term    := factor { ("*" | "/") factor }
    factor  := "-" factor | primary [ "^" integer ]
    primary := number | "z" | "n" | "i"
             | ("exp" | "log") "(" expr ")"
             | "(" expr ")"
    number  := digits [ "." digits ]
    integer := [ "-" ] digits

The caret needs an integer literal exponent and is non-associative, so
``z^2^3`` is a parse error.  It binds tighter than unary minus on its left
operand: ``-z^2`` reads as ``-(z^2)``.  There is no implicit
multiplication.  ``log`` is the principal branch.  The only identifiers
are ``z`` (the variable), ``n`` (the real family index), ``i``, ``exp``
and ``log``; anything else is a parse error.

Parse failures raise :class:`ParseError` with a character offset into the
source; evaluation failures raise :class:`EvalError` carrying the source
span of the offending subexpression.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Callable, Tuple

from .jets import (
    ComplexJet3,
    JetError,
    jet_add,
    jet_const,
    jet_div,
    jet_exp,
    jet_log,
    jet_mul,
    jet_neg,
    jet_pow_int,
    jet_sub,
    jet_var,
)

__all__ = [
    "Span",
    "Node",
    "Var",
    "Param",
    "ImagUnit",
    "ConstNum",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Neg",
    "PowInt",
    "Exp",
    "Log",
    "FamilyExpr",
    "ParseError",
    "EvalError",
    "parse",
    "pretty_print",
    "eval_jet",
    "eval_jet_seeded",
    "lex_number",
]

Span = Tuple[int, int]

_NO_SPAN: Span = (0, 0)


class Node:
    """Base class for expression tree nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Var(Node):
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Param(Node):
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ImagUnit(Node):
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ConstNum(Node):
    value: complex
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Add(Node):
    lhs: Node
    rhs: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Sub(Node):
    lhs: Node
    rhs: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Mul(Node):
    lhs: Node
    rhs: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Div(Node):
    lhs: Node
    rhs: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class PowInt(Node):
    base: Node
    exponent: int
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Exp(Node):
    arg: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Log(Node):
    arg: Node
    span: Span = field(default=_NO_SPAN, compare=False, repr=False)


class ParseError(ValueError):
    """Syntax error with a character offset into the source text."""

    def __init__(self, position: int, message: str, expected: str):
        super().__init__(f"parse error at offset {position}: {message}")
        self.position = position
        self.message = message
        self.expected = expected


class EvalError(ArithmeticError):
    """Evaluation failure tagged with the offending subexpression's span."""

    def __init__(self, span: Span, message: str, point: complex | None = None):
        super().__init__(
            f"evaluation error at source span {span[0]}..{span[1]}: {message}"
        )
        self.span = span
        self.message = message
        self.point = point


@dataclass(eq=True)
class FamilyExpr:
    """A parsed family expression; immutable once built.

    Structural equality compares the tree only, not the source text it was
    parsed from.  Instances are safe to share across scan worker processes.
    """

    root: Node
    source: str = field(default="", compare=False)

    def __post_init__(self):
        self._compiled = None

    def __getstate__(self):
        return {"root": self.root, "source": self.source}

    def __setstate__(self, state):
        self.root = state["root"]
        self.source = state["source"]
        self._compiled = None


# ---------------------------------------------------------------------------
# lexer

_DIGITS = set("0123456789")
_LETTERS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_RESERVED = {"z", "n", "i", "exp", "log"}


@dataclass(frozen=True)
class _Token:
    kind: str  # "number", "ident", one of "+-*/^()", or "eof"
    text: str
    pos: int


def lex_number(source: str, pos: int) -> tuple[str, int]:
    """Scan a ``digits[.digits]`` literal at ``pos``; returns (text, end)."""
    j = pos
    n = len(source)
    while j < n and source[j] in _DIGITS:
        j += 1
    if j == pos:
        raise ParseError(pos, "expected a number", "digits")
    if j < n and source[j] == ".":
        j += 1
        if j >= n or source[j] not in _DIGITS:
            raise ParseError(j, "expected digits after the decimal point", "digits")
        while j < n and source[j] in _DIGITS:
            j += 1
    return source[pos:j], j


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in _DIGITS:
            text, j = lex_number(source, i)
            tokens.append(_Token("number", text, i))
            i = j
            continue
        if ch in _LETTERS:
            j = i
            while j < n and (source[j] in _LETTERS or source[j] in _DIGITS):
                j += 1
            name = source[i:j]
            if name not in _RESERVED:
                raise ParseError(
                    i, f"unknown identifier {name!r}", "one of z, n, i, exp, log"
                )
            tokens.append(_Token("ident", name, i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ParseError(i, f"unexpected character {ch!r}", "a valid token")
    tokens.append(_Token("eof", "", n))
    return tokens


# ---------------------------------------------------------------------------
# recursive-descent parser

_PRIMARY_EXPECTED = "a number, 'z', 'n', 'i', 'exp(', 'log(', '(' or unary '-'"


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(tok.pos, f"expected {kind!r}", kind)
        return self.advance()

    def expression(self) -> Node:
        left = self.term()
        while True:
            kind = self.peek().kind
            if kind == "+":
                self.advance()
                right = self.term()
                left = Add(left, right, span=(left.span[0], right.span[1]))
            elif kind == "-":
                self.advance()
                right = self.term()
                left = Sub(left, right, span=(left.span[0], right.span[1]))
            else:
                return left

    def term(self) -> Node:
        left = self.factor()
        while True:
            kind = self.peek().kind
            if kind == "*":
                self.advance()
                right = self.factor()
                left = Mul(left, right, span=(left.span[0], right.span[1]))
            elif kind == "/":
                self.advance()
                right = self.factor()
                left = Div(left, right, span=(left.span[0], right.span[1]))
            else:
                return left

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            operand = self.factor()
            return Neg(operand, span=(tok.pos, operand.span[1]))
        base = self.primary()
        if self.peek().kind == "^":
            self.advance()
            k, end = self.int_literal()
            return PowInt(base, k, span=(base.span[0], end))
        return base

    def int_literal(self) -> tuple[int, int]:
        sign = 1
        tok = self.peek()
        if tok.kind == "-":
            self.advance()
            sign = -1
            tok = self.peek()
        if tok.kind != "number" or "." in tok.text:
            raise ParseError(
                tok.pos, "exponent must be an integer literal", "an integer"
            )
        self.advance()
        return sign * int(tok.text), tok.pos + len(tok.text)

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            value = complex(float(tok.text))
            return ConstNum(value, span=(tok.pos, tok.pos + len(tok.text)))
        if tok.kind == "ident":
            self.advance()
            end = tok.pos + len(tok.text)
            if tok.text == "z":
                return Var(span=(tok.pos, end))
            if tok.text == "n":
                return Param(span=(tok.pos, end))
            if tok.text == "i":
                return ImagUnit(span=(tok.pos, end))
            self.expect("(")
            arg = self.expression()
            rp = self.expect(")")
            span = (tok.pos, rp.pos + 1)
            return Exp(arg, span=span) if tok.text == "exp" else Log(arg, span=span)
        if tok.kind == "(":
            self.advance()
            inner = self.expression()
            rp = self.expect(")")
            return replace(inner, span=(tok.pos, rp.pos + 1))
        raise ParseError(tok.pos, "expected a primary expression", _PRIMARY_EXPECTED)


def parse(source: str) -> FamilyExpr:
    """Parse source text into a :class:`FamilyExpr`, or raise ParseError."""
    parser = _Parser(_tokenize(source))
    root = parser.expression()
    tail = parser.peek()
    if tail.kind != "eof":
        raise ParseError(
            tail.pos, f"unexpected token {tail.text!r}", "end of input or an operator"
        )
    return FamilyExpr(root, source)


# ---------------------------------------------------------------------------
# pretty printer

# minimum context precedence at which each construct may appear bare
_LEVEL_SUM = 1
_LEVEL_PRODUCT = 2
_LEVEL_UNARY = 3
_LEVEL_POWER = 4
_LEVEL_ATOM = 9


def _format_number(value: complex) -> str:
    # the grammar's number token is a plain nonnegative decimal; parser
    # produced constants are always of that shape
    if value.imag != 0.0 or value.real < 0.0:
        raise ValueError(f"constant {value!r} is not a grammar number literal")
    re = value.real
    if re == int(re) and abs(re) < 1e16:
        return repr(int(re))
    text = repr(re)
    if "e" in text or "E" in text:
        text = format(Decimal(text), "f")
    return text


def _pp(node: Node, ctx: int) -> str:
    if isinstance(node, Var):
        return "z"
    if isinstance(node, Param):
        return "n"
    if isinstance(node, ImagUnit):
        return "i"
    if isinstance(node, ConstNum):
        return _format_number(node.value)
    if isinstance(node, Exp):
        return f"exp({_pp(node.arg, 0)})"
    if isinstance(node, Log):
        return f"log({_pp(node.arg, 0)})"
    if isinstance(node, Add):
        text = f"{_pp(node.lhs, _LEVEL_SUM)}+{_pp(node.rhs, _LEVEL_PRODUCT)}"
        level = _LEVEL_SUM
    elif isinstance(node, Sub):
        text = f"{_pp(node.lhs, _LEVEL_SUM)}-{_pp(node.rhs, _LEVEL_PRODUCT)}"
        level = _LEVEL_SUM
    elif isinstance(node, Mul):
        text = f"{_pp(node.lhs, _LEVEL_PRODUCT)}*{_pp(node.rhs, _LEVEL_UNARY)}"
        level = _LEVEL_PRODUCT
    elif isinstance(node, Div):
        text = f"{_pp(node.lhs, _LEVEL_PRODUCT)}/{_pp(node.rhs, _LEVEL_UNARY)}"
        level = _LEVEL_PRODUCT
    elif isinstance(node, Neg):
        text = f"-{_pp(node.operand, _LEVEL_UNARY)}"
        level = _LEVEL_UNARY
    elif isinstance(node, PowInt):
        text = f"{_pp(node.base, _LEVEL_ATOM)}^{node.exponent}"
        level = _LEVEL_POWER
    else:
        raise TypeError(f"not an expression node: {node!r}")
    if level < ctx:
        return f"({text})"
    return text


def pretty_print(expr: FamilyExpr | Node) -> str:
    """Render a tree back to source text with a minimal set of parentheses.

    Reparsing the output of ``pretty_print`` always reproduces the tree it
    was given, up to source spans.
    """
    node = expr.root if isinstance(expr, FamilyExpr) else expr
    return _pp(node, 0)


# ---------------------------------------------------------------------------
# evaluation

_Compiled = Callable[[ComplexJet3, ComplexJet3, complex], ComplexJet3]


def _compile(node: Node) -> _Compiled:
    if isinstance(node, Var):
        return lambda nj, zj, z: zj
    if isinstance(node, Param):
        return lambda nj, zj, z: nj
    if isinstance(node, ImagUnit):
        cj = jet_const(1j)
        return lambda nj, zj, z: cj
    if isinstance(node, ConstNum):
        cj = jet_const(node.value)
        return lambda nj, zj, z: cj
    if isinstance(node, Neg):
        fa = _compile(node.operand)
        return lambda nj, zj, z: jet_neg(fa(nj, zj, z))

    span = node.span
    if isinstance(node, (Add, Sub, Mul, Div)):
        fa = _compile(node.lhs)
        fb = _compile(node.rhs)
        op = {Add: jet_add, Sub: jet_sub, Mul: jet_mul, Div: jet_div}[type(node)]

        def run_binary(nj, zj, z, fa=fa, fb=fb, op=op, span=span):
            a = fa(nj, zj, z)
            b = fb(nj, zj, z)
            try:
                return op(a, b)
            except JetError as exc:
                raise EvalError(span, str(exc), z) from exc

        return run_binary
    if isinstance(node, (Exp, Log)):
        fa = _compile(node.arg)
        op = jet_exp if isinstance(node, Exp) else jet_log

        def run_unary(nj, zj, z, fa=fa, op=op, span=span):
            try:
                return op(fa(nj, zj, z))
            except JetError as exc:
                raise EvalError(span, str(exc), z) from exc

        return run_unary
    if isinstance(node, PowInt):
        fa = _compile(node.base)
        k = node.exponent

        def run_pow(nj, zj, z, fa=fa, k=k, span=span):
            try:
                return jet_pow_int(fa(nj, zj, z), k)
            except JetError as exc:
                raise EvalError(span, str(exc), z) from exc

        return run_pow
    raise TypeError(f"not an expression node: {node!r}")


def _compiled(expr: FamilyExpr) -> _Compiled:
    fn = expr._compiled
    if fn is None:
        fn = _compile(expr.root)
        expr._compiled = fn
    return fn


def eval_jet(expr: FamilyExpr, n: float, z: complex) -> ComplexJet3:
    """Evaluate the order-3 jet of f_n at z.

    The family index n is real and enters the arithmetic as a complex
    number with zero imaginary part.
    """
    z = complex(z)
    return _compiled(expr)(jet_const(complex(n)), jet_var(z), z)


def eval_jet_seeded(
    expr: FamilyExpr, n: float, seed: ComplexJet3, point: complex | None = None
) -> ComplexJet3:
    """Evaluate with the variable leaf seeded by an arbitrary jet.

    Seeding with the jet of another function g at z computes the jet of the
    composition f_n(g(z)) by the chain rule; ``point`` only labels errors.
    """
    at = seed.v if point is None else point
    return _compiled(expr)(jet_const(complex(n)), seed, at)

from __future__ import annotations

import re
from typing import Generic, List, Optional, Tuple, TypeVar

import sympy

from scalarprod.errors import ParseError, SignatureMismatch
from scalarprod.weyl import AlgebraSignature, WeylOperator, op_mul

__all__: Tuple[str, ...] = (
    "Builder",
    "parse_expression",
    "parse_operator",
    "parse_polynomial",
    "format_operator",
)

T = TypeVar("T")

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()=]))")


class Builder(Generic[T]):
    """Semantic actions of :func:`parse_expression`.

    Subclasses decide what numbers, names and calls mean; the arithmetic hooks
    default to the Python operators of ``T``.
    """

    def number(self, value: int, position: int) -> T:
        raise NotImplementedError

    def symbol(self, name: str, position: int) -> T:
        raise NotImplementedError

    def call(self, name: str, argument: T, position: int) -> T:
        raise ParseError(f"{name}(...) is not allowed here", position)

    def add(self, a: T, b: T) -> T:
        return a + b  # type: ignore

    def sub(self, a: T, b: T) -> T:
        return a - b  # type: ignore

    def neg(self, a: T) -> T:
        return -a  # type: ignore

    def mul(self, a: T, b: T, position: int) -> T:
        return a * b  # type: ignore

    def div(self, a: T, b: T, position: int) -> T:
        return a / b  # type: ignore

    def pow(self, a: T, e: int, position: int) -> T:
        return a**e  # type: ignore


class _Parser(Generic[T]):
    def __init__(self, text: str, builder: Builder[T]) -> None:
        self.text = text
        self.builder = builder
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            if stripped[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(stripped, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {stripped[pos]!r}", pos)
            start = m.start(m.lastindex or 0)
            if m.group(1) is not None:
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), start))
            else:
                self.tokens.append(("op", m.group(3), start))
            pos = m.end()
        self.i = 0
        self.end = len(stripped)

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def accept(self, *ops: str) -> Optional[Tuple[str, str, int]]:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in ops:
            self.i += 1
            return tok
        return None

    def expect(self, op: str) -> Tuple[str, str, int]:
        tok = self.accept(op)
        if tok is None:
            raise ParseError(f"expected {op!r}", self.position())
        return tok

    def position(self) -> int:
        tok = self.peek()
        return tok[2] if tok is not None else self.end

    def parse(self) -> T:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        value = self.expression()
        if self.accept("="):
            rhs = self.expression()
            value = self.builder.sub(value, rhs)
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()[1]!r}", self.position())  # type: ignore
        return value

    def expression(self) -> T:
        value = self.term()
        while True:
            if self.accept("+"):
                value = self.builder.add(value, self.term())
            elif self.accept("-"):
                value = self.builder.sub(value, self.term())
            else:
                return value

    def _starts_factor(self) -> bool:
        tok = self.peek()
        return tok is not None and (tok[0] != "op" or tok[1] == "(")

    def term(self) -> T:
        value = self.unary()
        while True:
            pos = self.position()
            if self.accept("*"):
                value = self.builder.mul(value, self.unary(), pos)
            elif self.accept("/"):
                value = self.builder.div(value, self.unary(), pos)
            elif self._starts_factor():
                value = self.builder.mul(value, self.unary(), pos)
            else:
                return value

    def unary(self) -> T:
        if self.accept("-"):
            return self.builder.neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> T:
        base = self.primary()
        pos = self.position()
        if self.accept("^", "**"):
            tok = self.peek()
            if tok is None or tok[0] != "num":
                raise ParseError("exponents must be nonnegative integer literals", self.position())
            self.i += 1
            return self.builder.pow(base, int(tok[1]), pos)
        return base

    def primary(self) -> T:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.end)
        kind, text, pos = tok
        if kind == "num":
            self.i += 1
            return self.builder.number(int(text), pos)
        if kind == "name":
            self.i += 1
            if self.accept("("):
                argument = self.expression()
                self.expect(")")
                return self.builder.call(text, argument, pos)
            return self.builder.symbol(text, pos)
        if self.accept("("):
            value = self.expression()
            self.expect(")")
            return value
        raise ParseError(f"unexpected {text!r}", pos)


def parse_expression(text: str, builder: Builder[T]) -> T:
    """Read ``text`` in the polynomial grammar (``+ - * / ^``, parentheses, ``lhs = rhs``)."""
    return _Parser(text, builder).parse()


class _OperatorBuilder(Builder[WeylOperator]):
    def __init__(self, signature: AlgebraSignature) -> None:
        self.signature = signature

    def number(self, value: int, position: int) -> WeylOperator:
        return WeylOperator.constant(self.signature, value)

    def symbol(self, name: str, position: int) -> WeylOperator:
        try:
            return WeylOperator.letter(self.signature, name)
        except SignatureMismatch:
            raise ParseError(f"unknown letter {name!r} for {self.signature.describe()}", position)

    def mul(self, a: WeylOperator, b: WeylOperator, position: int) -> WeylOperator:
        return op_mul(a, b)

    def div(self, a: WeylOperator, b: WeylOperator, position: int) -> WeylOperator:
        if not b:
            raise ParseError("division by zero", position)
        one = self.signature.one
        if set(b.terms) != {one}:
            raise ParseError("only division by coefficients is allowed", position)
        inverse = self.signature.field.one / b.terms[one]
        return op_mul(a, WeylOperator(self.signature, {one: inverse}))

    def pow(self, a: WeylOperator, e: int, position: int) -> WeylOperator:
        return a**e


def parse_operator(text: str, signature: AlgebraSignature) -> WeylOperator:
    """Read an operator; factors are multiplied in written order, so ``dp1*p1 = p1*dp1 + 1``."""
    try:
        return parse_expression(text, _OperatorBuilder(signature))
    except ZeroDivisionError:
        raise ParseError("division by zero", 0)


class _SymPyBuilder(Builder[sympy.Expr]):
    def __init__(self, allowed: Optional[Tuple[str, ...]]) -> None:
        self.allowed = allowed

    def number(self, value: int, position: int) -> sympy.Expr:
        return sympy.Integer(value)

    def symbol(self, name: str, position: int) -> sympy.Expr:
        if self.allowed is not None and name not in self.allowed:
            raise ParseError(f"unknown symbol {name!r}", position)
        return sympy.Symbol(name)

    def div(self, a: sympy.Expr, b: sympy.Expr, position: int) -> sympy.Expr:
        if b == 0:
            raise ParseError("division by zero", position)
        return a / b


def parse_polynomial(text: str, allowed: Optional[Tuple[str, ...]] = None) -> sympy.Expr:
    """Read a polynomial (or rational expression) as an expanded sympy expression."""
    return sympy.expand(parse_expression(text, _SymPyBuilder(allowed)))


def format_operator(op: WeylOperator) -> str:
    return op.to_text()

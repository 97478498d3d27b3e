"""Recursive-descent parser for right-hand-side expressions.

Grammar, loosest binding first::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | 'pi' | 'e' | 't' | x<i> | u<k>
            | FUNC '(' expr ')' | '(' expr ')'

so ``-x1^2`` is ``-(x1^2)`` and ``2^-1`` is ``2^(-1)``. Power is right
associative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import ParseError, UnknownIdentifierError, VariableIndexError

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "abs", "tanh", "sqrt")
CONSTANTS = ("pi", "e")


@dataclass(frozen=True)
class Num:
    value: float
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Const:
    name: str
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    kind: str  # 't', 'x' or 'u'
    index: int = 0  # 1-based for x and u
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: Node
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: Node
    right: Node
    pos: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: Node
    pos: int = field(default=0, compare=False)


Node = Union[Num, Const, Var, Neg, BinOp, Call]


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^()])
    """,
    re.VERBOSE,
)
_INDEXED = re.compile(r"([xu])(\d+)$")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def _byte_offset(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


def tokenize(text: str) -> list[Token]:
    tokens = []
    i = 0
    while i < len(text):
        match = _TOKEN.match(text, i)
        if match is None:
            raise ParseError(f"unexpected character {text[i]!r}", _byte_offset(text, i), text)
        kind = match.lastgroup
        if kind != "ws":
            tok = match.group()
            tokens.append(Token(kind, "^" if tok == "**" else tok, _byte_offset(text, i)))
        i = match.end()
    tokens.append(Token("end", "", _byte_offset(text, len(text))))
    return tokens


class _Parser:
    def __init__(self, text: str, m: int, r: int, context: str):
        self.text = text
        self.m = m
        self.r = r
        self.context = context
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None, cls=ParseError):
        tok = tok or self.tok
        if tok.kind == "end":
            message = f"{message} (got end of input)"
        else:
            message = f"{message} (got {tok.text!r})"
        return cls(message, tok.pos, self.text)

    def expect(self, text: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        raise self.error(f"expected {text!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error("unexpected trailing input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            node = BinOp(op.text, node, self.term(), op.pos)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance()
            node = BinOp(op.text, node, self.unary(), op.pos)
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance()
            operand = self.unary()
            return Neg(operand, op.pos) if op.text == "-" else operand
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            op = self.advance()
            return BinOp("^", base, self.unary(), op.pos)
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            value = float(tok.text)
            if value == float("inf"):
                raise ParseError(f"numeric literal {tok.text!r} overflows", tok.pos, self.text)
            return Num(value, tok.pos)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        raise self.error("expected a number, variable, function or '('")

    def name(self, tok: Token) -> Node:
        name = tok.text
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(name, arg, tok.pos)
        if name in CONSTANTS:
            return Const(name, tok.pos)
        if name == "t":
            return Var("t", 0, tok.pos)
        indexed = _INDEXED.match(name)
        if indexed:
            kind, index = indexed.group(1), int(indexed.group(2))
            limit = self.m if kind == "x" else self.r
            if not 1 <= index <= limit:
                if limit == 0:
                    msg = f"variable {name} is not allowed in {self.context}"
                else:
                    msg = f"variable {name} out of range ({kind}1..{kind}{limit} declared)"
                raise VariableIndexError(msg, tok.pos, self.text)
            return Var(kind, index, tok.pos)
        raise UnknownIdentifierError(f"unknown identifier {name!r}", tok.pos, self.text)


def parse_node(text: str, m: int, r: int, context: str = "this expression") -> Node:
    return _Parser(text, m, r, context).parse()


def to_text(node: Node) -> str:
    """Fully parenthesized rendering that reparses to an equal tree."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return "t" if node.kind == "t" else f"{node.kind}{node.index}"
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def walk(node: Node):
    yield node
    if isinstance(node, Neg):
        yield from walk(node.operand)
    elif isinstance(node, BinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, Call):
        yield from walk(node.arg)

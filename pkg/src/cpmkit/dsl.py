"""A small expression language for string diagrams of CP maps.

Grammar (whitespace insensitive)::

    expr := seq
    seq  := ten (">>" ten)*          left-to-right composition: "a >> b" runs a, then b
    ten  := post ("*" post)*         tensor juxtaposition
    post := atom ("'")*              postfix adjoint
    atom := "id(" nat ")" | "discard(" nat ")" | "prepare(" nat ")"
          | "double(" name ")" | "scale(" real "," expr ")"
          | name | "(" expr ")"

Precedence: adjoint > tensor > composition.  Composition reads in diagram
order (bottom to top), not function order, so ``"a >> b"`` denotes
``compose(b, a)``.  Scalars are CP scalars, i.e. non-negative reals:
complex coefficients are inexpressible by design, since doubling squares
their modulus anyway.

Environments bind names either to matrices (consumed by ``double(name)``)
or to CP maps (referenced bare).  There is no abstraction: expressions
are first-order over the bindings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .cpm import (
    CPMap,
    choi_distance,
    choi_norm,
    compose,
    cpmap_from_json,
    cpmap_to_json,
    dagger,
    discard,
    double,
    identity,
    prepare,
    scale,
    tensor,
)
from .tensor import DEFAULT_TOL, CpmkitError, Tolerance, matrix_from_json, matrix_to_json

__all__ = [
    "Span",
    "DiagramSyntaxError",
    "UnboundNameError",
    "DimensionMismatchError",
    "Id",
    "Discard",
    "Prepare",
    "Double",
    "Ref",
    "Dagger",
    "Tensor",
    "Seq",
    "Scale",
    "Environment",
    "EquationCheck",
    "parse",
    "pretty",
    "evaluate",
    "check_equation",
    "environment_to_json",
    "environment_from_json",
]

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Span:
    """Source position (1-based line and column) of a token or node."""

    line: int
    col: int

    def __str__(self):
        return f"{self.line}:{self.col}"


class DiagramSyntaxError(CpmkitError):
    """Parse failure, with position and the tokens that would have been accepted."""

    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        self.span = span
        self.expected = expected
        suffix = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"syntax error at {span}: {message}{suffix}")


class UnboundNameError(CpmkitError):
    """An expression referenced a name the environment does not bind suitably."""

    def __init__(self, name: str, span: Span, detail: str = "is not bound"):
        self.name = name
        self.span = span
        super().__init__(f"at {span}: name '{name}' {detail}")


class DimensionMismatchError(CpmkitError):
    """Dimensions disagree at a composition point (or an atom has dimension 0)."""

    def __init__(self, span: Span, expected, found):
        self.span = span
        self.expected = expected
        self.found = found
        super().__init__(f"at {span}: dimension mismatch, expected {expected}, found {found}")


# --- AST ------------------------------------------------------------------
# Spans never participate in equality so that print/parse round trips
# compare structurally.

@dataclass(frozen=True)
class Id:
    n: int
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Discard:
    n: int
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Prepare:
    n: int
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Double:
    name: str
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Ref:
    name: str
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Dagger:
    child: object
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Tensor:
    left: object
    right: object
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Seq:
    first: object
    then: object
    span: Span = field(default=Span(0, 0), compare=False)


@dataclass(frozen=True)
class Scale:
    c: float
    child: object
    span: Span = field(default=Span(0, 0), compare=False)

    def __post_init__(self):
        if not (self.c >= 0 and np.isfinite(self.c)):
            raise ValueError(f"scale coefficient must be a non-negative real, got {self.c}")


@dataclass(frozen=True)
class Environment:
    """Immutable name bindings: matrices for ``double``, CP maps for bare references."""

    bindings: dict

    def __post_init__(self):
        for name in self.bindings:
            if not NAME_RE.fullmatch(name):
                raise ValueError(f"invalid binding name {name!r}")


@dataclass(frozen=True)
class EquationCheck:
    """Outcome of comparing two expressions by Choi distance."""

    ok: bool
    residual: float


# --- lexer ----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<seq>>>)"
    r"|(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[*'(),])"
)


@dataclass(frozen=True)
class _Token:
    kind: str       # "seq" | "number" | "name" | one of * ' ( ) , | "eof"
    text: str
    span: Span


def _lex(src: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise DiagramSyntaxError(f"unexpected character {src[pos]!r}", Span(line, col))
        text = m.group(0)
        kind = m.lastgroup
        if kind == "punct":
            kind = text
        if kind != "ws":
            tokens.append(_Token(kind, text, Span(line, col)))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
        pos = m.end()
    tokens.append(_Token("eof", "", Span(line, col)))
    return tokens


# --- parser ---------------------------------------------------------------

_BUILTIN_DIMS = {"id": Id, "discard": Discard, "prepare": Prepare}


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, expected: tuple[str, ...]) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            got = tok.text or "end of input"
            raise DiagramSyntaxError(f"unexpected {got!r}", tok.span, expected)
        return self.advance()

    def parse_expr(self):
        node = self.parse_tensor()
        while self.peek().kind == "seq":
            self.advance()
            rhs = self.parse_tensor()
            node = Seq(node, rhs, span=node.span)
        return node

    def parse_tensor(self):
        node = self.parse_post()
        while self.peek().kind == "*":
            self.advance()
            rhs = self.parse_post()
            node = Tensor(node, rhs, span=node.span)
        return node

    def parse_post(self):
        node = self.parse_atom()
        while self.peek().kind == "'":
            tick = self.advance()
            node = Dagger(node, span=tick.span)
        return node

    def parse_atom(self):
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")", ("')'",))
            return node
        if tok.kind == "name":
            name = self.advance()
            follows_call = self.peek().kind == "("
            if name.text in _BUILTIN_DIMS and follows_call:
                self.advance()
                num = self.expect("number", ("a dimension",))
                if "." in num.text or "e" in num.text or "E" in num.text:
                    raise DiagramSyntaxError("dimension must be a natural number", num.span)
                self.expect(")", ("')'",))
                return _BUILTIN_DIMS[name.text](int(num.text), span=name.span)
            if name.text == "double" and follows_call:
                self.advance()
                ref = self.expect("name", ("a binding name",))
                self.expect(")", ("')'",))
                return Double(ref.text, span=name.span)
            if name.text == "scale" and follows_call:
                self.advance()
                num = self.expect("number", ("a non-negative real",))
                self.expect(",", ("','",))
                child = self.parse_expr()
                self.expect(")", ("')'",))
                return Scale(float(num.text), child, span=name.span)
            return Ref(name.text, span=name.span)
        got = tok.text or "end of input"
        raise DiagramSyntaxError(
            f"unexpected {got!r}", tok.span,
            ("id(", "discard(", "prepare(", "double(", "scale(", "a name", "'('"),
        )


def parse(src: str):
    """Parse an expression, raising :class:`DiagramSyntaxError` with position on failure."""
    parser = _Parser(_lex(src))
    node = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "eof":
        raise DiagramSyntaxError(f"unexpected trailing {tail.text!r}", tail.span, ("end of input",))
    return node


# --- pretty printer -------------------------------------------------------

_PREC_SEQ, _PREC_TENSOR, _PREC_POST = 1, 2, 3


def _render(node, min_prec: int) -> str:
    if isinstance(node, Id):
        return f"id({node.n})"
    if isinstance(node, Discard):
        return f"discard({node.n})"
    if isinstance(node, Prepare):
        return f"prepare({node.n})"
    if isinstance(node, Double):
        return f"double({node.name})"
    if isinstance(node, Ref):
        return node.name
    if isinstance(node, Scale):
        return f"scale({node.c!r}, {_render(node.child, _PREC_SEQ)})"
    if isinstance(node, Dagger):
        return f"{_render(node.child, _PREC_POST)}'"
    if isinstance(node, Tensor):
        text = f"{_render(node.left, _PREC_TENSOR)} * {_render(node.right, _PREC_POST)}"
        return f"({text})" if min_prec > _PREC_TENSOR else text
    if isinstance(node, Seq):
        text = f"{_render(node.first, _PREC_SEQ)} >> {_render(node.then, _PREC_TENSOR)}"
        return f"({text})" if min_prec > _PREC_SEQ else text
    raise TypeError(f"not a diagram node: {node!r}")


def pretty(node) -> str:
    """Render an AST back to source; ``parse(pretty(ast)) == ast``."""
    return _render(node, _PREC_SEQ)


# --- evaluator ------------------------------------------------------------

def _positive_dim(n: int, span: Span) -> int:
    if n < 1:
        raise DimensionMismatchError(span, "dimension >= 1", n)
    return n


def evaluate(node, env: Environment, tol: Tolerance = DEFAULT_TOL) -> CPMap:
    """Denote an expression as a CP map over the environment's bindings."""
    if isinstance(node, Id):
        return identity(_positive_dim(node.n, node.span))
    if isinstance(node, Discard):
        return discard(_positive_dim(node.n, node.span))
    if isinstance(node, Prepare):
        return prepare(_positive_dim(node.n, node.span))
    if isinstance(node, Double):
        value = env.bindings.get(node.name)
        if value is None:
            raise UnboundNameError(node.name, node.span)
        if isinstance(value, CPMap):
            raise UnboundNameError(node.name, node.span,
                                   "is bound to a CP map; double() needs a matrix")
        return double(value)
    if isinstance(node, Ref):
        value = env.bindings.get(node.name)
        if value is None:
            raise UnboundNameError(node.name, node.span)
        if not isinstance(value, CPMap):
            raise UnboundNameError(node.name, node.span,
                                   "is bound to a matrix; reference it via double()")
        return value
    if isinstance(node, Dagger):
        return dagger(evaluate(node.child, env, tol))
    if isinstance(node, Scale):
        return scale(evaluate(node.child, env, tol), node.c)
    if isinstance(node, Tensor):
        return tensor(evaluate(node.left, env, tol), evaluate(node.right, env, tol))
    if isinstance(node, Seq):
        first = evaluate(node.first, env, tol)
        then = evaluate(node.then, env, tol)
        if first.out_dim != then.in_dim:
            raise DimensionMismatchError(node.then.span, first.out_dim, then.in_dim)
        return compose(then, first)
    raise TypeError(f"not a diagram node: {node!r}")


def check_equation(lhs: str, rhs: str, env: Environment,
                   tol: Tolerance = DEFAULT_TOL) -> EquationCheck:
    """Parse and evaluate both sides, then compare by Choi-Frobenius distance.

    The verdict threshold is ``atol * max(1, |choi(lhs)|_F)``, so it scales
    with the magnitude of the maps being compared.
    """
    left = evaluate(parse(lhs), env, tol)
    right = evaluate(parse(rhs), env, tol)
    if (left.in_dim, left.out_dim) != (right.in_dim, right.out_dim):
        raise DimensionMismatchError(Span(1, 1),
                                     f"{left.in_dim}->{left.out_dim}",
                                     f"{right.in_dim}->{right.out_dim}")
    residual = choi_distance(left, right)
    return EquationCheck(ok=residual <= tol.atol * max(1.0, choi_norm(left)), residual=residual)


def environment_to_json(env: Environment) -> dict:
    out = {}
    for name, value in env.bindings.items():
        if isinstance(value, CPMap):
            out[name] = {"cpmap": cpmap_to_json(value)}
        else:
            out[name] = {"matrix": matrix_to_json(value)}
    return out


def environment_from_json(obj, tol: Tolerance = DEFAULT_TOL) -> Environment:
    if not isinstance(obj, dict):
        raise ValueError(f"environment JSON must be an object, got {type(obj).__name__}")
    bindings = {}
    for name, entry in obj.items():
        if not isinstance(entry, dict) or len(entry) != 1:
            raise ValueError(f"binding {name!r} must be {{'matrix': ...}} or {{'cpmap': ...}}")
        if "matrix" in entry:
            bindings[name] = matrix_from_json(entry["matrix"])
        elif "cpmap" in entry:
            bindings[name] = cpmap_from_json(entry["cpmap"], tol)
        else:
            raise ValueError(f"binding {name!r} must be {{'matrix': ...}} or {{'cpmap': ...}}")
    return Environment(bindings=bindings)

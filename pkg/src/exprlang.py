"""
Parser and evaluator for the scalar expressions scenarios are written in.

Grammar:

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" atom)?
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Exponents must be constant integers or constant rationals such as
``(1/2)`` or ``(-3)``. The same compiled closure evaluates plain floats,
numpy arrays and Jet3 values, so every representation goes through the
same sequence of floating-point operations.
"""

import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

try:
    from .errors import ExpressionDomainError, ExpressionSyntaxError, UnboundIdentifierError
    from .jets import Jet3, UnivariateRule, integer_power, jet_compose, power_rule
except ImportError:
    from errors import ExpressionDomainError, ExpressionSyntaxError, UnboundIdentifierError
    from jets import Jet3, UnivariateRule, integer_power, jet_compose, power_rule

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------- syntax tree


class Expr:
    """Base class of the immutable expression tree."""

    precedence = 5

    def identifiers(self) -> frozenset:
        return frozenset()

    def functions(self) -> frozenset:
        return frozenset()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Number(Expr):
    value: float
    text: str


@dataclass(frozen=True)
class Variable(Expr):
    name: str

    def identifiers(self) -> frozenset:
        return frozenset([self.name])


@dataclass(frozen=True)
class Negate(Expr):
    operand: Expr
    precedence = 3

    def identifiers(self) -> frozenset:
        return self.operand.identifiers()

    def functions(self) -> frozenset:
        return self.operand.functions()


@dataclass(frozen=True)
class BinaryOp(Expr):
    op: str
    left: Expr
    right: Expr

    @property
    def precedence(self) -> int:
        return 1 if self.op in "+-" else 2

    def identifiers(self) -> frozenset:
        return self.left.identifiers() | self.right.identifiers()

    def functions(self) -> frozenset:
        return self.left.functions() | self.right.functions()


@dataclass(frozen=True)
class Power(Expr):
    base: Expr
    exponent_node: Expr
    exponent: Fraction
    precedence = 4

    def identifiers(self) -> frozenset:
        return self.base.identifiers()

    def functions(self) -> frozenset:
        return self.base.functions()


@dataclass(frozen=True)
class Call(Expr):
    name: str
    argument: Expr

    def identifiers(self) -> frozenset:
        return self.argument.identifiers()

    def functions(self) -> frozenset:
        return frozenset([self.name]) | self.argument.functions()


# ---------------------------------------------------------- function registry


@dataclass(frozen=True)
class UnivariateFunction:
    """A registered function: plain numpy evaluation plus an order-3 jet rule."""

    name: str
    plain: Callable[[np.ndarray], np.ndarray]
    rule: UnivariateRule
    domain: Optional[Callable[[np.ndarray, bool], Optional[str]]] = None


FUNCTIONS: Dict[str, UnivariateFunction] = {}


def register_function(function: UnivariateFunction) -> None:
    FUNCTIONS[function.name] = function


def _sin_rule(x, order):
    s, c = np.sin(x), np.cos(x)
    return [s, c, -s, -c][: order + 1]


def _cos_rule(x, order):
    c, s = np.cos(x), np.sin(x)
    return [c, -s, -c, s][: order + 1]


def _exp_rule(x, order):
    e = np.exp(x)
    return [e] * (order + 1)


def _log_rule(x, order):
    r = 1.0 / x
    return [np.log(x), r, -r * r, 2.0 * r ** 3][: order + 1]


def _sqrt_rule(x, order):
    r = np.sqrt(x)
    if order == 0:
        return [r]
    return [r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)][: order + 1]


def _tanh_rule(x, order):
    t = np.tanh(x)
    s = 1.0 - t * t
    return [t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)][: order + 1]


def _positive(x, with_derivatives):
    return None if np.all(x > 0.0) else "log of a non-positive value"


def _non_negative(x, with_derivatives):
    if with_derivatives:
        return None if np.all(x > 0.0) else "derivative of sqrt at a non-positive value"
    return None if np.all(x >= 0.0) else "sqrt of a negative value"


for _function in (
    UnivariateFunction("sin", np.sin, _sin_rule),
    UnivariateFunction("cos", np.cos, _cos_rule),
    UnivariateFunction("exp", np.exp, _exp_rule),
    UnivariateFunction("log", np.log, _log_rule, _positive),
    UnivariateFunction("sqrt", np.sqrt, _sqrt_rule, _non_negative),
    UnivariateFunction("tanh", np.tanh, _tanh_rule),
):
    register_function(_function)


# ------------------------------------------------------------------- tokens


_TOKEN_RE = re.compile(
    r"(?P<NUMBER>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<OP>[-+*/^()])"
)

_EXPR_START = ("NUMBER", "IDENT", "(", "-")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int
    # end of the previous token, where any whitespace before this one begins
    gap: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> List[Token]:
    tokens = []
    index, previous_end = 0, 0
    while index < len(source):
        if source[index].isspace():
            index += 1
            continue
        match = _TOKEN_RE.match(source, index)
        if match is None:
            raise ExpressionSyntaxError(
                f"Unexpected character {source[index]!r}",
                _byte_offset(source, index),
                _EXPR_START + ("+", "*", "/", "^", ")"),
            )
        kind = match.lastgroup
        text = match.group()
        if kind == "OP":
            kind = text
        tokens.append(Token(kind, text, _byte_offset(source, index), _byte_offset(source, previous_end)))
        index = previous_end = match.end()
    end = _byte_offset(source, len(source))
    tokens.append(Token("END", "", end, _byte_offset(source, previous_end)))
    return tokens


# ------------------------------------------------------------------- parser


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.position = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.current
        self.position += 1
        return token

    def fail(self, expected: Sequence[str], token: Optional[Token] = None):
        token = token or self.current
        what = "end of input" if token.kind == "END" else f"token {token.text!r}"
        offset = token.offset if token.kind == "END" else token.gap
        raise ExpressionSyntaxError(f"Unexpected {what}", offset, expected)

    def expect(self, kind: str) -> Token:
        if self.current.kind != kind:
            self.fail([kind])
        return self.advance()

    def parse(self) -> Expr:
        tree = self.expr()
        if self.current.kind != "END":
            self.fail(["+", "-", "*", "/", "^", "end of input"])
        return tree

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinaryOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.current.kind == "-":
            self.advance()
            return Negate(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.current.kind != "^":
            return base
        self.advance()
        start = self.current
        exponent_node = self.atom()
        exponent = _constant_exponent(exponent_node)
        if exponent is None:
            raise ExpressionSyntaxError(
                "Exponent must be a constant integer or rational", start.offset, ["NUMBER", "("]
            )
        return Power(base, exponent_node, exponent)

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "NUMBER":
            self.advance()
            return Number(float(token.text), token.text)
        if token.kind == "IDENT":
            self.advance()
            if self.current.kind == "(":
                self.advance()
                argument = self.expr()
                self.expect(")")
                return Call(token.text, argument)
            return Variable(token.text)
        if token.kind == "(":
            self.advance()
            inner = self.expr()
            if self.current.kind != ")":
                self.fail([")", "+", "-", "*", "/", "^"])
            self.advance()
            return inner
        self.fail(_EXPR_START)


def _constant_exponent(node: Expr) -> Optional[Fraction]:
    if isinstance(node, Number):
        return Fraction(node.text)
    if isinstance(node, Negate):
        inner = _constant_exponent(node.operand)
        return None if inner is None else -inner
    if isinstance(node, BinaryOp) and node.op == "/":
        numerator, denominator = _constant_exponent(node.left), _constant_exponent(node.right)
        if numerator is None or denominator is None or denominator == 0:
            return None
        return numerator / denominator
    return None


def parse(source: str) -> Expr:
    """Parse an expression; raises ExpressionSyntaxError with a byte offset."""
    if not source or not source.strip():
        raise ExpressionSyntaxError("Empty expression", 0, _EXPR_START)
    return _Parser(source).parse()


# ----------------------------------------------------------- pretty-printing


def to_source(node: Expr) -> str:
    """Print with the fewest parentheses that reparse to the same tree."""
    if isinstance(node, Number):
        return node.text
    if isinstance(node, Variable):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({to_source(node.argument)})"
    if isinstance(node, Negate):
        inner = to_source(node.operand)
        return "-" + (f"({inner})" if node.operand.precedence < Negate.precedence else inner)
    if isinstance(node, Power):
        base = to_source(node.base)
        if node.base.precedence < 5:
            base = f"({base})"
        exponent = to_source(node.exponent_node)
        if not isinstance(node.exponent_node, Number):
            exponent = f"({exponent})"
        return f"{base}^{exponent}"
    if isinstance(node, BinaryOp):
        left, right = to_source(node.left), to_source(node.right)
        if node.left.precedence < node.precedence:
            left = f"({left})"
        if node.right.precedence <= node.precedence:
            right = f"({right})"
        separator = f" {node.op} " if node.op in "+-" else node.op
        return left + separator + right
    raise TypeError(f"Not an expression node: {node!r}")


# --------------------------------------------------------------- evaluation


Evaluator = Callable[[Sequence], object]


def _is_jet(value) -> bool:
    return isinstance(value, Jet3)


def _value_of(value):
    return value.value if _is_jet(value) else np.asarray(value)


class CompiledExpr:
    """An expression bound to an ordered coordinate list.

    Calling it with one value per coordinate evaluates the expression;
    values may be floats, numpy arrays (vectorized over a grid) or Jet3.
    """

    def __init__(self, expr: Expr, coordinates: Sequence[str]):
        self.expr = expr
        self.coordinates = tuple(coordinates)
        unknown = sorted(expr.identifiers() - set(self.coordinates))
        if unknown:
            raise UnboundIdentifierError(unknown[0])
        unknown = sorted(expr.functions() - set(FUNCTIONS))
        if unknown:
            raise UnboundIdentifierError(unknown[0])
        self._evaluate = self._compile(expr)

    def __call__(self, values: Sequence):
        return self._evaluate(values)

    def __repr__(self) -> str:
        return f"CompiledExpr({to_source(self.expr)!r})"

    def _compile(self, node: Expr) -> Evaluator:
        if isinstance(node, Number):
            constant = node.value
            return lambda values: constant
        if isinstance(node, Variable):
            index = self.coordinates.index(node.name)
            return lambda values: values[index]
        if isinstance(node, Negate):
            operand = self._compile(node.operand)
            return lambda values: -operand(values)
        if isinstance(node, BinaryOp):
            return self._compile_binary(node)
        if isinstance(node, Power):
            return self._compile_power(node)
        if isinstance(node, Call):
            return self._compile_call(node)
        raise TypeError(f"Not an expression node: {node!r}")

    def _compile_binary(self, node: BinaryOp) -> Evaluator:
        left, right = self._compile(node.left), self._compile(node.right)
        if node.op == "+":
            return lambda values: left(values) + right(values)
        if node.op == "-":
            return lambda values: left(values) - right(values)
        if node.op == "*":
            return lambda values: left(values) * right(values)
        text = to_source(node)

        def divide(values):
            numerator, denominator = left(values), right(values)
            if np.any(_value_of(denominator) == 0.0):
                raise ExpressionDomainError("division by zero", text)
            return numerator / denominator

        return divide

    def _compile_power(self, node: Power) -> Evaluator:
        base = self._compile(node.base)
        text = to_source(node)
        if node.exponent.denominator == 1:
            k = int(node.exponent)

            def int_power(values):
                value = base(values)
                if k < 0 and np.any(_value_of(value) == 0.0):
                    raise ExpressionDomainError("negative power of zero", text)
                return integer_power(value, k)

            return int_power
        p = float(node.exponent)
        rule = power_rule(p)

        def rational_power(values):
            value = base(values)
            if np.any(_value_of(value) <= 0.0):
                raise ExpressionDomainError("non-integer power of a non-positive value", text)
            if _is_jet(value):
                return jet_compose(rule, value)
            return np.power(value, p)

        return rational_power

    def _compile_call(self, node: Call) -> Evaluator:
        function = FUNCTIONS[node.name]
        argument = self._compile(node.argument)
        text = to_source(node)

        def call(values):
            value = argument(values)
            jet = _is_jet(value)
            if function.domain is not None:
                problem = function.domain(_value_of(value), jet and value.order > 0)
                if problem:
                    raise ExpressionDomainError(problem, text)
            if jet:
                return jet_compose(function.rule, value)
            return function.plain(value)

        return call


def bind(expr: Expr, coordinates: Sequence[str]) -> CompiledExpr:
    return CompiledExpr(expr, coordinates)


def evaluate(expr: Expr, env: Mapping[str, float]):
    """Plain recursive evaluation against a name -> value mapping."""
    names = sorted(env)
    return CompiledExpr(expr, names)([env[name] for name in names])


def eval_jet(
    expr: Expr,
    coordinates: Sequence[str],
    point: Sequence[float],
    seeds: Optional[Sequence[Jet3]] = None,
    order: int = 3,
) -> Jet3:
    """Taylor expansion of ``expr`` at ``point``; seeds default to coordinate jets."""
    if seeds is None:
        seeds = Jet3.seeds(point, order)
    result = CompiledExpr(expr, coordinates)(seeds)
    if not _is_jet(result):
        n = seeds[0].n if seeds else len(point)
        result = Jet3.constant(result, n, seeds[0].order if seeds else order)
    return result


def parse_many(sources: Sequence[str], coordinates: Sequence[str]) -> Tuple[CompiledExpr, ...]:
    return tuple(bind(parse(source), coordinates) for source in sources)

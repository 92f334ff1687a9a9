"""
Expression Calculus

Parses scalar expressions in chart coordinates, evaluates them on single
points or batches of points, and differentiates them exactly. Central
finite differences are provided as an independent oracle.

Grammar:
    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := ("-")? atom ("^" integer)?
    atom   := number | ident | func "(" expr ")" | "(" expr ")"
    ident  := "x" digits
    func   := "sin" | "cos" | "exp" | "log" | "sqrt"
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Union

import numpy as np

from nullgeo.error_handler import (
    CoordinateRangeError,
    EvaluationDomainError,
    ExpressionSyntaxError,
)


logger = logging.getLogger(__name__)


FUNCTIONS = ('sin', 'cos', 'exp', 'log', 'sqrt')

TOKEN_PATTERN = re.compile(
    r'\s*(?:'
    r'(?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)'
    r'|(?P<ident>x\d+)'
    r'|(?P<func>sin|cos|exp|log|sqrt)'
    r'|(?P<op>[-+*/^()])'
    r')'
)


@dataclass(frozen=True)
class ExpressionAST:
    """Base class for expression tree nodes"""


@dataclass(frozen=True)
class Number(ExpressionAST):
    value: float


@dataclass(frozen=True)
class Coordinate(ExpressionAST):
    index: int


@dataclass(frozen=True)
class Negation(ExpressionAST):
    operand: ExpressionAST


@dataclass(frozen=True)
class BinaryOp(ExpressionAST):
    op: str
    left: ExpressionAST
    right: ExpressionAST


@dataclass(frozen=True)
class Power(ExpressionAST):
    base: ExpressionAST
    exponent: int


@dataclass(frozen=True)
class FunctionCall(ExpressionAST):
    name: str
    argument: ExpressionAST


# ---------------------------------------------------------------------------
# Node builders with constant folding
# ---------------------------------------------------------------------------

ZERO = Number(0.0)
ONE = Number(1.0)


def _number(value: float) -> Number:
    return Number(float(value) + 0.0)


def _is_number(node: ExpressionAST, value: Optional[float] = None) -> bool:
    if not isinstance(node, Number):
        return False
    return value is None or node.value == value


def _fold(value: float) -> Optional[Number]:
    if math.isfinite(value):
        return _number(value)
    return None


def make_add(left: ExpressionAST, right: ExpressionAST) -> ExpressionAST:
    if _is_number(left) and _is_number(right):
        folded = _fold(left.value + right.value)
        if folded is not None:
            return folded
    if _is_number(left, 0.0):
        return right
    if _is_number(right, 0.0):
        return left
    return BinaryOp('+', left, right)


def make_sub(left: ExpressionAST, right: ExpressionAST) -> ExpressionAST:
    if _is_number(left) and _is_number(right):
        folded = _fold(left.value - right.value)
        if folded is not None:
            return folded
    if _is_number(right, 0.0):
        return left
    if _is_number(left, 0.0):
        return make_neg(right)
    return BinaryOp('-', left, right)


def domain_total(node: ExpressionAST) -> bool:
    """True when node evaluates to a finite value at every point"""
    if isinstance(node, (Number, Coordinate)):
        return True
    if isinstance(node, Negation):
        return domain_total(node.operand)
    if isinstance(node, BinaryOp):
        return node.op != '/' and domain_total(node.left) and domain_total(node.right)
    if isinstance(node, Power):
        return node.exponent >= 0 and domain_total(node.base)
    if isinstance(node, FunctionCall):
        return node.name in ('sin', 'cos') and domain_total(node.argument)
    return False


def make_mul(left: ExpressionAST, right: ExpressionAST) -> ExpressionAST:
    if _is_number(left) and _is_number(right):
        folded = _fold(left.value * right.value)
        if folded is not None:
            return folded
    # 0 * expr keeps expr when it can fail to evaluate
    if (_is_number(left, 0.0) and domain_total(right)) or (_is_number(right, 0.0) and domain_total(left)):
        return ZERO
    if _is_number(left, 1.0):
        return right
    if _is_number(right, 1.0):
        return left
    return BinaryOp('*', left, right)


def make_div(left: ExpressionAST, right: ExpressionAST) -> ExpressionAST:
    if _is_number(left) and _is_number(right) and right.value != 0.0:
        folded = _fold(left.value / right.value)
        if folded is not None:
            return folded
    if _is_number(right, 1.0):
        return left
    return BinaryOp('/', left, right)


def make_neg(operand: ExpressionAST) -> ExpressionAST:
    if isinstance(operand, Number):
        return _number(-operand.value)
    if isinstance(operand, Negation):
        return operand.operand
    return Negation(operand)


def make_pow(base: ExpressionAST, exponent: int) -> ExpressionAST:
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Number):
        try:
            folded = _fold(base.value ** exponent)
        except OverflowError:
            folded = None
        if folded is not None:
            return folded
    return Power(base, exponent)


def _apply_scalar(name: str, value: float) -> Optional[float]:
    if name == 'log' and value <= 0.0:
        return None
    if name == 'sqrt' and value < 0.0:
        return None
    try:
        return getattr(math, name)(value)
    except (OverflowError, ValueError):
        return None


def make_func(name: str, argument: ExpressionAST) -> ExpressionAST:
    if name not in FUNCTIONS:
        raise ValueError(f"Unknown function: {name}")
    if isinstance(argument, Number):
        value = _apply_scalar(name, argument.value)
        if value is not None:
            folded = _fold(value)
            if folded is not None:
                return folded
    return FunctionCall(name, argument)


_BINARY_BUILDERS = {'+': make_add, '-': make_sub, '*': make_mul, '/': make_div}


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@dataclass
class _Token:
    kind: str
    text: str
    offset: int


def _byte_offset(text: str, char_offset: int) -> int:
    return len(text[:char_offset].encode('utf-8'))


def tokenize(text: str) -> List[_Token]:
    """
    Split expression text into tokens

    Args:
        text: Expression text

    Returns:
        List of tokens, terminated by an 'end' token

    Raises:
        ExpressionSyntaxError: On characters outside the grammar
    """
    tokens: List[_Token] = []
    position = 0
    while position < len(text):
        if text[position:].strip() == '':
            break
        match = TOKEN_PATTERN.match(text, position)
        if match is None or match.end() == position:
            raise ExpressionSyntaxError("Unexpected character", text, _byte_offset(text, position))
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append(_Token(kind, match.group(kind), start))
        position = match.end()
    tokens.append(_Token('end', '', len(text)))
    return tokens


class _Parser:
    """Recursive-descent parser over the token list"""

    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.tokens = tokenize(text)
        self.position = 0

    def _peek(self) -> _Token:
        return self.tokens[self.position]

    def _advance(self) -> _Token:
        token = self.tokens[self.position]
        self.position += 1
        return token

    def _error(self, message: str, token: _Token) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(message, self.text, _byte_offset(self.text, token.offset))

    def _expect(self, kind: str, text: str) -> _Token:
        token = self._advance()
        if token.kind != kind or token.text != text:
            raise self._error(f"Expected '{text}'", token)
        return token

    def parse(self) -> ExpressionAST:
        node = self._expr()
        token = self._peek()
        if token.kind != 'end':
            raise self._error("Unexpected token", token)
        return node

    def _expr(self) -> ExpressionAST:
        node = self._term()
        while self._peek().kind == 'op' and self._peek().text in '+-':
            op = self._advance().text
            node = _BINARY_BUILDERS[op](node, self._term())
        return node

    def _term(self) -> ExpressionAST:
        node = self._factor()
        while self._peek().kind == 'op' and self._peek().text in '*/':
            op = self._advance().text
            node = _BINARY_BUILDERS[op](node, self._factor())
        return node

    def _factor(self) -> ExpressionAST:
        negate = False
        if self._peek().kind == 'op' and self._peek().text == '-':
            self._advance()
            negate = True
        node = self._atom()
        if self._peek().kind == 'op' and self._peek().text == '^':
            self._advance()
            token = self._advance()
            if token.kind != 'number' or not token.text.isdigit():
                raise self._error("Exponent must be a non-negative integer literal", token)
            node = make_pow(node, int(token.text))
        if negate:
            node = make_neg(node)
        return node

    def _atom(self) -> ExpressionAST:
        token = self._advance()
        if token.kind == 'number':
            return _number(float(token.text))
        if token.kind == 'ident':
            index = int(token.text[1:])
            if index >= self.dim:
                raise CoordinateRangeError(
                    f"Coordinate {token.text} out of range for chart dimension {self.dim}",
                    {"text": self.text, "offset": _byte_offset(self.text, token.offset)},
                )
            return Coordinate(index)
        if token.kind == 'func':
            self._expect('op', '(')
            argument = self._expr()
            self._expect('op', ')')
            return make_func(token.text, argument)
        if token.kind == 'op' and token.text == '(':
            node = self._expr()
            self._expect('op', ')')
            return node
        raise self._error("Expected number, coordinate, function or '('", token)


# ---------------------------------------------------------------------------
# Tree operations
# ---------------------------------------------------------------------------

def to_text(node: ExpressionAST) -> str:
    """
    Serialize a tree to grammar text that parses back to the same tree

    Args:
        node: Expression tree

    Returns:
        Fully parenthesized expression text
    """
    if isinstance(node, Number):
        if node.value < 0:
            return f"(-{repr(-node.value)})"
        return repr(node.value)
    if isinstance(node, Coordinate):
        return f"x{node.index}"
    if isinstance(node, Negation):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinaryOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Power):
        return f"({to_text(node.base)}^{node.exponent})"
    if isinstance(node, FunctionCall):
        return f"{node.name}({to_text(node.argument)})"
    raise TypeError(f"Unknown node type: {type(node).__name__}")


def coordinates(node: ExpressionAST) -> Set[int]:
    """Collect coordinate indices referenced by a tree"""
    if isinstance(node, Coordinate):
        return {node.index}
    if isinstance(node, Number):
        return set()
    if isinstance(node, Negation):
        return coordinates(node.operand)
    if isinstance(node, BinaryOp):
        return coordinates(node.left) | coordinates(node.right)
    if isinstance(node, Power):
        return coordinates(node.base)
    if isinstance(node, FunctionCall):
        return coordinates(node.argument)
    raise TypeError(f"Unknown node type: {type(node).__name__}")


def _derivative_term(derivative: ExpressionAST, factor: ExpressionAST) -> ExpressionAST:
    """derivative * factor; a zero derivative term vanishes wherever the differentiated node is defined"""
    if _is_number(derivative, 0.0):
        return ZERO
    return make_mul(derivative, factor)


def _derivative_ratio(derivative: ExpressionAST, denominator: ExpressionAST) -> ExpressionAST:
    if _is_number(derivative, 0.0):
        return ZERO
    return make_div(derivative, denominator)


def differentiate(node: ExpressionAST, index: int) -> ExpressionAST:
    """
    Symbolic partial derivative

    Args:
        node: Expression tree
        index: Coordinate index

    Returns:
        Derivative tree (constant-folded)
    """
    if isinstance(node, Number):
        return ZERO
    if isinstance(node, Coordinate):
        return ONE if node.index == index else ZERO
    if isinstance(node, Negation):
        return make_neg(differentiate(node.operand, index))
    if isinstance(node, BinaryOp):
        left, right = node.left, node.right
        d_left = differentiate(left, index)
        d_right = differentiate(right, index)
        if node.op == '+':
            return make_add(d_left, d_right)
        if node.op == '-':
            return make_sub(d_left, d_right)
        if node.op == '*':
            return make_add(_derivative_term(d_left, right), _derivative_term(d_right, left))
        if node.op == '/':
            numerator = make_sub(_derivative_term(d_left, right), _derivative_term(d_right, left))
            return _derivative_ratio(numerator, make_pow(right, 2))
    if isinstance(node, Power):
        d_base = differentiate(node.base, index)
        outer = make_mul(_number(node.exponent), make_pow(node.base, node.exponent - 1))
        return _derivative_term(d_base, outer)
    if isinstance(node, FunctionCall):
        argument = node.argument
        d_arg = differentiate(argument, index)
        if node.name == 'sin':
            return _derivative_term(d_arg, make_func('cos', argument))
        if node.name == 'cos':
            return _derivative_term(d_arg, make_neg(make_func('sin', argument)))
        if node.name == 'exp':
            return _derivative_term(d_arg, make_func('exp', argument))
        if node.name == 'log':
            return _derivative_ratio(d_arg, argument)
        if node.name == 'sqrt':
            return _derivative_ratio(d_arg, make_mul(_number(2.0), make_func('sqrt', argument)))
    raise TypeError(f"Unknown node type: {type(node).__name__}")


def substitute(node: ExpressionAST, replacements: Sequence[ExpressionAST]) -> ExpressionAST:
    """
    Replace each coordinate xi by replacements[i], re-folding constants

    Args:
        node: Expression tree
        replacements: One tree per coordinate of the source chart

    Returns:
        Substituted tree
    """
    if isinstance(node, Number):
        return node
    if isinstance(node, Coordinate):
        return replacements[node.index]
    if isinstance(node, Negation):
        return make_neg(substitute(node.operand, replacements))
    if isinstance(node, BinaryOp):
        return _BINARY_BUILDERS[node.op](substitute(node.left, replacements),
                                         substitute(node.right, replacements))
    if isinstance(node, Power):
        return make_pow(substitute(node.base, replacements), node.exponent)
    if isinstance(node, FunctionCall):
        return make_func(node.name, substitute(node.argument, replacements))
    raise TypeError(f"Unknown node type: {type(node).__name__}")


_NUMPY_FUNCTIONS = {
    'sin': np.sin,
    'cos': np.cos,
    'exp': np.exp,
    'log': np.log,
    'sqrt': np.sqrt,
}


def _evaluate(node: ExpressionAST, x: np.ndarray):
    if isinstance(node, Number):
        return node.value
    if isinstance(node, Coordinate):
        return x[node.index]
    if isinstance(node, Negation):
        return -_evaluate(node.operand, x)
    if isinstance(node, BinaryOp):
        left = _evaluate(node.left, x)
        right = _evaluate(node.right, x)
        if node.op == '+':
            return left + right
        if node.op == '-':
            return left - right
        if node.op == '*':
            return left * right
        return np.divide(left, right)
    if isinstance(node, Power):
        return np.power(_evaluate(node.base, x), node.exponent)
    if isinstance(node, FunctionCall):
        argument = _evaluate(node.argument, x)
        if node.name == 'log':
            argument = np.where(np.asarray(argument) > 0.0, argument, np.nan)
        return _NUMPY_FUNCTIONS[node.name](argument)
    raise TypeError(f"Unknown node type: {type(node).__name__}")


# ---------------------------------------------------------------------------
# Scalar fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarField:
    """
    Scalar function of chart coordinates

    Immutable after construction; evaluation is a pure function of the point,
    so the same field may be evaluated from several threads.
    """
    ast: ExpressionAST
    dim: int
    _partials: Dict[int, 'ScalarField'] = field(default_factory=dict, compare=False, repr=False)

    def evaluate(self, point) -> Union[float, np.ndarray]:
        """
        Evaluate at one point or a batch of points

        Args:
            point: Array of shape (dim,) or (dim, ...) for batches

        Returns:
            Float for a single point, array of shape point.shape[1:] for batches

        Raises:
            EvaluationDomainError: If any value is not finite
        """
        x = np.asarray(point, dtype=float)
        if x.shape[0] != self.dim:
            raise ValueError(f"Point has {x.shape[0]} coordinates, field expects {self.dim}")
        with np.errstate(all='ignore'):
            value = np.broadcast_to(np.asarray(_evaluate(self.ast, x), dtype=float), x.shape[1:])
        if not np.all(np.isfinite(value)):
            raise EvaluationDomainError(
                f"Non-finite value of {self.to_text()}",
                {"point": x.tolist() if x.ndim == 1 else "batch"},
            )
        if value.ndim == 0:
            return float(value)
        return np.array(value)

    def __call__(self, point) -> Union[float, np.ndarray]:
        return self.evaluate(point)

    def exact_partial(self, index: int) -> 'ScalarField':
        """Symbolic partial derivative along coordinate index (cached)"""
        if not 0 <= index < self.dim:
            raise CoordinateRangeError(f"Partial index {index} out of range for dimension {self.dim}")
        cached = self._partials.get(index)
        if cached is None:
            cached = ScalarField(differentiate(self.ast, index), self.dim)
            self._partials[index] = cached
        return cached

    def gradient(self, point) -> np.ndarray:
        """Exact partials at a point, shape (dim,)"""
        return np.array([self.exact_partial(i).evaluate(point) for i in range(self.dim)])

    def hessian(self, point) -> np.ndarray:
        """Exact second partials at a point, shape (dim, dim)"""
        return np.array([
            [self.exact_partial(i).exact_partial(j).evaluate(point) for j in range(self.dim)]
            for i in range(self.dim)
        ])

    def is_zero(self) -> bool:
        return _is_number(self.ast, 0.0)

    def is_constant(self) -> bool:
        return not coordinates(self.ast)

    def to_text(self) -> str:
        return to_text(self.ast)

    def compose(self, substitutions: Sequence['ScalarField']) -> 'ScalarField':
        """
        Pull the field back along a map given by one field per coordinate

        Args:
            substitutions: Fields over the new chart, one per coordinate of this chart

        Returns:
            Field over the new chart
        """
        if len(substitutions) != self.dim:
            raise ValueError(f"Need {self.dim} substitutions, got {len(substitutions)}")
        dims = {s.dim for s in substitutions}
        if len(dims) != 1:
            raise ValueError("Substitutions must share one chart dimension")
        return ScalarField(substitute(self.ast, [s.ast for s in substitutions]), dims.pop())

    def _combine(self, other, builder) -> 'ScalarField':
        if isinstance(other, ScalarField):
            if other.dim != self.dim:
                raise ValueError("Fields live on charts of different dimension")
            return ScalarField(builder(self.ast, other.ast), self.dim)
        return ScalarField(builder(self.ast, _number(other)), self.dim)

    def __add__(self, other) -> 'ScalarField':
        return self._combine(other, make_add)

    __radd__ = __add__

    def __sub__(self, other) -> 'ScalarField':
        return self._combine(other, make_sub)

    def __rsub__(self, other) -> 'ScalarField':
        return ScalarField(make_sub(_number(other), self.ast), self.dim)

    def __mul__(self, other) -> 'ScalarField':
        return self._combine(other, make_mul)

    __rmul__ = __mul__

    def __truediv__(self, other) -> 'ScalarField':
        return self._combine(other, make_div)

    def __neg__(self) -> 'ScalarField':
        return ScalarField(make_neg(self.ast), self.dim)


def parse(text: str, dim: int) -> ScalarField:
    """
    Parse expression text into a scalar field

    Args:
        text: Expression text
        dim: Chart dimension

    Returns:
        ScalarField

    Raises:
        ExpressionSyntaxError: Text outside the grammar (with byte offset)
        CoordinateRangeError: Coordinate index >= dim
    """
    if not isinstance(text, str):
        text = repr(float(text))
    return ScalarField(_Parser(text, dim).parse(), dim)


def constant(value: float, dim: int) -> ScalarField:
    return ScalarField(_number(value), dim)


def coordinate(index: int, dim: int) -> ScalarField:
    if not 0 <= index < dim:
        raise CoordinateRangeError(f"Coordinate x{index} out of range for dimension {dim}")
    return ScalarField(Coordinate(index), dim)


def apply_function(name: str, argument: ScalarField) -> ScalarField:
    """Wrap a field in one of the grammar functions"""
    return ScalarField(make_func(name, argument.ast), argument.dim)


def exact_partial(f: ScalarField, i: int) -> ScalarField:
    return f.exact_partial(i)


def fd_partial(f: ScalarField, i: int, p, h: float = 1e-5) -> float:
    """
    Central finite difference (f(p + h e_i) - f(p - h e_i)) / 2h

    Raises:
        EvaluationDomainError: If either shifted point fails to evaluate
    """
    p = np.asarray(p, dtype=float)
    step = np.zeros_like(p)
    step[i] = h
    return (f.evaluate(p + step) - f.evaluate(p - step)) / (2.0 * h)


def _mixed_difference(f: ScalarField, i: int, j: int, p: np.ndarray, h: float) -> float:
    ei = np.zeros_like(p)
    ej = np.zeros_like(p)
    ei[i] = h
    ej[j] = h
    return (f.evaluate(p + ei + ej) - f.evaluate(p + ei - ej)
            - f.evaluate(p - ei + ej) + f.evaluate(p - ei - ej)) / (4.0 * h * h)


def fd_second_partial(f: ScalarField, i: int, j: int, p, h: float = 1e-3) -> float:
    """
    Second partial by central differences with one Richardson step

    Args:
        f: Scalar field
        i, j: Coordinate indices
        p: Point
        h: Base step

    Returns:
        (4 D(h/2) - D(h)) / 3 where D is the centred mixed difference
    """
    p = np.asarray(p, dtype=float)
    coarse = _mixed_difference(f, i, j, p, h)
    fine = _mixed_difference(f, i, j, p, h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def derivative_oracle_residual(f: ScalarField, p, h: float = 1e-5) -> float:
    """
    Largest scaled gap between exact and finite-difference partials at p

    Returns:
        max_i |exact_i - fd_i| / (1 + |exact_i|)
    """
    worst = 0.0
    for i in range(f.dim):
        exact = f.exact_partial(i).evaluate(p)
        approx = fd_partial(f, i, p, h)
        worst = max(worst, abs(exact - approx) / (1.0 + abs(exact)))
    return worst


if __name__ == '__main__':
    print("Testing expression calculus...")

    field_ = parse("x0^2 - x1^2", 2)
    print(f"✓ Parsed: {field_.to_text()}")
    print(f"  value at (3, 1): {field_.evaluate([3.0, 1.0])}")
    print(f"  d/dx0 at (3, 1): {field_.exact_partial(0).evaluate([3.0, 1.0])}")
    print(f"  fd d/dx0 at (3, 1): {fd_partial(field_, 0, [3.0, 1.0]):.10f}")

    try:
        parse("sin(x9)", 2)
    except CoordinateRangeError as e:
        print(f"✓ Range error: {e}")

    print("\nExpression calculus tests passed!")

"""A tiny prefix expression language over [-1, 1].

Surface syntax, whitespace-insensitive, no infix operators:

    expr     := mid(expr, expr) | mul(expr, expr) | neg(expr)
              | half(expr) | pow(expr, nat>=1) | literal | identifier
    literal  := rational `p/q` | decimal with <= 12 places | integer
    program  := expr (';' expr)*

Semantics: `mid` is the midpoint (a+b)/2, `half` prepends a zero digit,
`pow` unfolds to repeated multiplication.  Literals must lie in [-1, 1] and
convert exactly through scaled integers; there is no floating point
anywhere.  Every operation composes moduli of continuity bottom-up, so a
whole program carries an honest digit-lookahead per variable, and interval
evaluation over exact rationals gives certified value bounds for the
branch-and-bound optimizer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence as SequenceABC

from .reals import (
    DomainError,
    I_DESC,
    IReal,
    MIDPOINT_LOOKAHEAD,
    MULTIPLY_LOOKAHEAD,
    halve,
    i_from_fraction,
    ireal_to_value,
    midpoint,
    multiply,
    negate,
    value_to_ireal,
)
from .stype import ContinuousMap, PairPrec, Precision, Product, SeqPrec, STypeDescriptor, STypeValue, UNIT


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Abstract syntax


@dataclass(frozen=True)
class RationalLit:
    num: int
    den: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Mid:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Halve:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


Expr = RationalLit | Var | Mid | Mul | Neg | Halve | Pow


@dataclass(frozen=True)
class ExprProgram:
    variables: tuple[str, ...]
    components: tuple[Expr, ...]


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>-?\d+(?:\.\d+)?(?:/\d+)?)
  | (?P<name>[a-z][a-z0-9_]*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<semi>;)
    """,
    re.VERBOSE,
)

_FUNCTIONS = {"mid": 2, "mul": 2, "neg": 1, "half": 1, "pow": 2}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> Iterator[_Token]:
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind != "ws":
            yield _Token(kind, tok, line, col)
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        pos = m.end()
    yield _Token("eof", "", line, col)


class _Parser:
    def __init__(self, text: str, variables: SequenceABC[str]):
        self.tokens = list(_tokenize(text))
        self.pos = 0
        self.variables = set(variables)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, kind: str) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        self.pos += 1
        return tok

    def parse_program(self) -> list[Expr]:
        components = [self.parse_expr()]
        while self.peek().kind == "semi":
            self.take("semi")
            components.append(self.parse_expr())
        self.take("eof")
        return components

    def parse_expr(self) -> Expr:
        tok = self.peek()
        if tok.kind == "number":
            self.pos += 1
            return self._literal(tok)
        if tok.kind == "name":
            self.pos += 1
            if self.peek().kind == "lparen":
                return self._call(tok)
            if tok.text not in self.variables:
                raise ParseError(f"undeclared variable {tok.text!r}", tok.line, tok.col)
            return Var(tok.text)
        raise ParseError(f"expected expression, found {tok.text or 'end of input'!r}", tok.line, tok.col)

    def _call(self, name: _Token) -> Expr:
        arity = _FUNCTIONS.get(name.text)
        if arity is None:
            raise ParseError(f"unknown function {name.text!r}", name.line, name.col)
        self.take("lparen")
        if name.text == "pow":
            base = self.parse_expr()
            self.take("comma")
            etok = self.take("number")
            if not re.fullmatch(r"\d+", etok.text):
                raise ParseError("exponent must be a natural number", etok.line, etok.col)
            exponent = int(etok.text)
            if exponent < 1:
                raise ParseError("exponent must be at least 1", etok.line, etok.col)
            self.take("rparen")
            return Pow(base, exponent)
        args = [self.parse_expr()]
        for _ in range(arity - 1):
            self.take("comma")
            args.append(self.parse_expr())
        self.take("rparen")
        ctor = {"mid": Mid, "mul": Mul, "neg": Neg, "half": Halve}[name.text]
        return ctor(*args)

    def _literal(self, tok: _Token) -> RationalLit:
        text = tok.text
        if "/" in text:
            num_s, den_s = text.split("/")
            if "." in num_s:
                raise ParseError("rational literal numerator must be an integer", tok.line, tok.col)
            num, den = int(num_s), int(den_s)
            if den == 0:
                raise ParseError("literal denominator is zero", tok.line, tok.col)
        elif "." in text:
            whole, frac = text.split(".")
            if len(frac) > 12:
                raise ParseError("decimal literal limited to 12 places", tok.line, tok.col)
            den = 10 ** len(frac)
            mag = abs(int(whole or "0")) * den + int(frac)
            num = -mag if text.startswith("-") else mag
        else:
            num, den = int(text), 1
        q = Fraction(num, den)
        if not -1 <= q <= 1:
            raise ParseError(f"literal {text} outside [-1, 1]", tok.line, tok.col)
        return RationalLit(q.numerator, q.denominator)


def parse(text: str, variables: SequenceABC[str] = ()) -> ExprProgram:
    """Parse one or more ';'-separated expressions over declared variables."""
    for v in variables:
        if not re.fullmatch(r"[a-z][a-z0-9_]*", v):
            raise ParseError(f"invalid variable name {v!r}", 1, 1)
    components = _Parser(text, variables).parse_program()
    return ExprProgram(tuple(variables), tuple(components))


def format_expr(e: Expr) -> str:
    match e:
        case RationalLit(num, den):
            return str(num) if den == 1 else f"{num}/{den}"
        case Var(name):
            return name
        case Mid(a, b):
            return f"mid({format_expr(a)}, {format_expr(b)})"
        case Mul(a, b):
            return f"mul({format_expr(a)}, {format_expr(b)})"
        case Neg(a):
            return f"neg({format_expr(a)})"
        case Halve(a):
            return f"half({format_expr(a)})"
        case Pow(a, n):
            return f"pow({format_expr(a)}, {n})"
    raise TypeError(f"not an expression: {e!r}")


def format_program(prog: ExprProgram) -> str:
    return "; ".join(format_expr(c) for c in prog.components)


# ---------------------------------------------------------------------------
# Evaluation on digit streams


def evaluate(prog: ExprProgram, env: dict[str, IReal]) -> list[IReal]:
    """Evaluate every component; shared subexpressions share streams."""
    for v in prog.variables:
        if v not in env:
            raise DomainError(f"missing binding for variable {v!r}")
    memo: dict = {}

    def ev(e: Expr) -> IReal:
        got = memo.get(e)
        if got is None:
            got = _eval_node(e, env, ev)
            memo[e] = got
        return got

    return [ev(c) for c in prog.components]


def _eval_node(e: Expr, env: dict[str, IReal], ev) -> IReal:
    match e:
        case RationalLit(num, den):
            return i_from_fraction(Fraction(num, den))
        case Var(name):
            return env[name]
        case Mid(a, b):
            return midpoint(ev(a), ev(b))
        case Mul(a, b):
            return multiply(ev(a), ev(b))
        case Neg(a):
            return negate(ev(a))
        case Halve(a):
            return halve(ev(a))
        case Pow(a, n):
            base = ev(a)
            acc = base
            for _ in range(n - 1):
                acc = multiply(base, acc)
            return acc
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Moduli of continuity (digit lookahead per variable)


def expr_modulus(e: Expr, n: int) -> dict[str, int]:
    """Input prefix lengths per variable sufficient to pin n output digits."""
    match e:
        case RationalLit():
            return {}
        case Var(name):
            return {name: n}
        case Mid(a, b):
            return _merge(expr_modulus(a, n + MIDPOINT_LOOKAHEAD), expr_modulus(b, n + MIDPOINT_LOOKAHEAD))
        case Mul(a, b):
            return _merge(expr_modulus(a, n + MULTIPLY_LOOKAHEAD), expr_modulus(b, n + MULTIPLY_LOOKAHEAD))
        case Neg(a):
            return expr_modulus(a, n)
        case Halve(a):
            return expr_modulus(a, max(n - 1, 0))
        case Pow(a, k):
            return expr_modulus(a, n + MULTIPLY_LOOKAHEAD * (k - 1))
    raise TypeError(f"not an expression: {e!r}")


def _merge(a: dict[str, int], b: dict[str, int]) -> dict[str, int]:
    out = dict(a)
    for k, v in b.items():
        out[k] = max(out.get(k, 0), v)
    return out


def modulus_of(prog: ExprProgram):
    """Per-output-precision variable requirements, maxed over components."""

    def at(n: int) -> dict[str, int]:
        need = {v: 0 for v in prog.variables}
        for comp in prog.components:
            for var, m in expr_modulus(comp, n).items():
                need[var] = max(need[var], m)
        return need

    return at


def program_domain(prog: ExprProgram) -> STypeDescriptor:
    """Right-nested product of [-1, 1] components, one per variable."""
    out: STypeDescriptor = I_DESC
    for _ in range(len(prog.variables) - 1):
        out = Product(I_DESC, out)
    return out


def program_map(prog: ExprProgram) -> ContinuousMap:
    """The program as a continuous map between searchable types, for the
    modulus-honesty harness.  Single-component programs only."""
    if len(prog.components) != 1:
        raise DomainError("program_map expects a single component")
    comp = prog.components[0]
    source = program_domain(prog)

    def apply(v: STypeValue) -> STypeValue:
        env = dict(zip(prog.variables, _unpack(source, v)))
        return ireal_to_value(evaluate(prog, env)[0])

    def modulus_for(p: Precision) -> Precision:
        need = expr_modulus(comp, p.length)
        precs = [SeqPrec(need.get(v, 0), UNIT) for v in prog.variables]
        out = precs[-1]
        for q in reversed(precs[:-1]):
            out = PairPrec(q, out)
        return out

    return ContinuousMap(apply=apply, source_desc=source, target_desc=I_DESC, modulus_for=modulus_for)


def _unpack(desc: STypeDescriptor, v: STypeValue) -> list[IReal]:
    if isinstance(desc, Product):
        return [value_to_ireal(v.first)] + _unpack(desc.right, v.second)
    return [value_to_ireal(v)]


# ---------------------------------------------------------------------------
# Exact interval evaluation (certified value bounds)

Interval = tuple[Fraction, Fraction]


def square_interval(iv: Interval) -> Interval:
    lo, hi = iv
    if lo >= 0:
        return lo * lo, hi * hi
    if hi <= 0:
        return hi * hi, lo * lo
    return Fraction(0), max(lo * lo, hi * hi)


def _pow_interval(iv: Interval, k: int) -> Interval:
    lo, hi = iv
    if k % 2 == 1:
        return lo**k, hi**k
    if lo >= 0:
        return lo**k, hi**k
    if hi <= 0:
        return hi**k, lo**k
    return Fraction(0), max(lo**k, hi**k)


def _mul_interval(a: Interval, b: Interval) -> Interval:
    products = [x * y for x in a for y in b]
    return min(products), max(products)


def interval_eval(prog: ExprProgram, boxes: dict[str, Interval]) -> list[Interval]:
    """Certified value intervals per component over rational variable boxes.

    Bounds are exact for the denoted values of every stream operation; the
    positive truncation applied by callers only raises values, so these
    intervals remain valid lower bounds through it.
    """
    memo: dict = {}

    def ev(e: Expr) -> Interval:
        got = memo.get(e)
        if got is None:
            got = _interval_node(e, boxes, ev)
            memo[e] = got
        return got

    return [ev(c) for c in prog.components]


def free_variables(e: Expr) -> frozenset[str]:
    match e:
        case RationalLit():
            return frozenset()
        case Var(name):
            return frozenset((name,))
        case Mid(a, b) | Mul(a, b):
            return free_variables(a) | free_variables(b)
        case Neg(a) | Halve(a) | Pow(a, _):
            return free_variables(a)
    raise TypeError(f"not an expression: {e!r}")


# Dyadic intervals: (lo_num, hi_num, scale) denoting [lo/2^scale, hi/2^scale].
# All endpoints stay plain integers; literals are enclosed outward at a fixed
# scale, so every result is a certified enclosure of the exact interval.

DyadicInterval = tuple[int, int, int]

_LITERAL_SCALE = 48


def _dyadic_literal(num: int, den: int) -> DyadicInterval:
    scaled = num << _LITERAL_SCALE
    return scaled // den, -((-scaled) // den), _LITERAL_SCALE


def _dyadic_align(a: DyadicInterval, b: DyadicInterval) -> tuple[int, int, int, int, int]:
    alo, ahi, sa = a
    blo, bhi, sb = b
    if sa < sb:
        shift = sb - sa
        return alo << shift, ahi << shift, blo, bhi, sb
    shift = sa - sb
    return alo, ahi, blo << shift, bhi << shift, sa


def _dyadic_node(e: Expr, boxes: dict[str, DyadicInterval], ev) -> DyadicInterval:
    match e:
        case RationalLit(num, den):
            return _dyadic_literal(num, den)
        case Var(name):
            return boxes[name]
        case Mid(a, b):
            alo, ahi, blo, bhi, s = _dyadic_align(ev(a), ev(b))
            return alo + blo, ahi + bhi, s + 1
        case Mul(a, b):
            alo, ahi, sa = ev(a)
            blo, bhi, sb = ev(b)
            products = (alo * blo, alo * bhi, ahi * blo, ahi * bhi)
            return min(products), max(products), sa + sb
        case Neg(a):
            lo, hi, s = ev(a)
            return -hi, -lo, s
        case Halve(a):
            lo, hi, s = ev(a)
            return lo, hi, s + 1
        case Pow(a, k):
            lo, hi, s = ev(a)
            if k % 2 == 1 or lo >= 0:
                return lo**k, hi**k, s * k
            if hi <= 0:
                return hi**k, lo**k, s * k
            return 0, max(lo**k, hi**k), s * k
    raise TypeError(f"not an expression: {e!r}")


def dyadic_square_lower(iv: DyadicInterval) -> tuple[int, int]:
    """Lower bound of the square of an interval, as (num, scale)."""
    lo, hi, s = iv
    if lo >= 0:
        return lo * lo, 2 * s
    if hi <= 0:
        return hi * hi, 2 * s
    return 0, 2 * s


def residual_loss_bound(prog: ExprProgram, tree_depth: int):
    """Certified lower bound, as (num, scale), on the truncated average of
    squared residuals over a dyadic variable box.

    Positive truncation only raises a stream's value, so the pre-truncation
    enclosure is a valid lower bound through it.  Per-component results are
    cached on the boxes of the variables the component mentions, making
    bound queries that move one variable cheap.
    """
    comp_vars = [sorted(free_variables(c)) for c in prog.components]
    caches: list[dict] = [{} for _ in prog.components]

    def bound(box: list[DyadicInterval]) -> tuple[int, int]:
        boxes = dict(zip(prog.variables, box))
        total_num, total_scale = 0, 0
        for comp, names, cache in zip(prog.components, comp_vars, caches):
            key = tuple(boxes[v] for v in names)
            got = cache.get(key)
            if got is None:
                memo: dict = {}

                def ev(e: Expr) -> DyadicInterval:
                    r = memo.get(e)
                    if r is None:
                        r = _dyadic_node(e, boxes, ev)
                        memo[e] = r
                    return r

                got = dyadic_square_lower(ev(comp))
                cache[key] = got
            num, scale = got
            if scale > total_scale:
                total_num <<= scale - total_scale
                total_scale = scale
            elif scale < total_scale:
                num <<= total_scale - scale
            total_num += num
        return total_num, total_scale + tree_depth

    return bound


def unit_objective_bound(prog: ExprProgram):
    """Certified lower bound, as (num, scale), of max(component value, 0)
    for a single-component program mapped through positive truncation."""
    if len(prog.components) != 1:
        raise DomainError("unit objective bound expects a single component")
    comp = prog.components[0]

    def bound(box: list[DyadicInterval]) -> tuple[int, int]:
        boxes = dict(zip(prog.variables, box))
        memo: dict = {}

        def ev(e: Expr) -> DyadicInterval:
            r = memo.get(e)
            if r is None:
                r = _dyadic_node(e, boxes, ev)
                memo[e] = r
            return r

        lo, _hi, s = ev(comp)
        return max(lo, 0), s

    return bound


def _interval_node(e: Expr, boxes: dict[str, Interval], ev) -> Interval:
    match e:
        case RationalLit(num, den):
            q = Fraction(num, den)
            return q, q
        case Var(name):
            return boxes[name]
        case Mid(a, b):
            (alo, ahi), (blo, bhi) = ev(a), ev(b)
            return (alo + blo) / 2, (ahi + bhi) / 2
        case Mul(a, b):
            return _mul_interval(ev(a), ev(b))
        case Neg(a):
            lo, hi = ev(a)
            return -hi, -lo
        case Halve(a):
            lo, hi = ev(a)
            return lo / 2, hi / 2
        case Pow(a, k):
            return _pow_interval(ev(a), k)
    raise TypeError(f"not an expression: {e!r}")

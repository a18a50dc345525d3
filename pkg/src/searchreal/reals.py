"""Computable reals as lazy digit streams.

Two representations are used for two jobs:

* ``UReal``: binary streams over {0, 1} denoting [0, 1].  Non-redundant
  (except dyadics), so precision-indexed orders behave well.  This is the
  codomain of loss functions.
* ``IReal``: signed-digit ternary streams over {-1, 0, 1} denoting [-1, 1].
  Redundant, which is exactly what makes midpoint and multiplication
  computable digit by digit.

A stream's denoted value is sum(d_i * 2^-(i+1)).  All arithmetic here is
exact on values: the output stream denotes exactly the midpoint / negation
/ product of the input values, and a length-n prefix is always within 2^-n
of the denoted value.  What is *not* preserved is representation: outputs
are generally non-canonical (mixed-sign digits), and positive truncation is
deliberately a function on codes, not on values.

Moduli of continuity are digit lookaheads: computing n output digits reads
at most n + LOOKAHEAD input digits.  Midpoint reads one digit ahead;
multiplication's helper stack reads five ahead (measured by
``multiply_needed_prefix``, which instruments the actual reads).
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from . import lazy
from .stype import Finite, FinVal, PairPrec, Precision, Product, Sequence, SeqPrec, SeqVal, UNIT, ContinuousMap


class DomainError(ValueError):
    """Numeric input outside the representable range."""


# ---------------------------------------------------------------------------
# Streams


class DigitStream:
    """A lazily evaluated, memoized infinite stream of integer digits."""

    __slots__ = ("_seq",)

    def __init__(self, seq: lazy.MemoSeq):
        self._seq = seq

    @classmethod
    def from_function(cls, f: Callable[[int], int]) -> "DigitStream":
        return cls(lazy.from_function(f))

    @classmethod
    def from_iter(cls, it: Iterator[int]) -> "DigitStream":
        return cls(lazy.MemoSeq(it))

    @classmethod
    def from_digits(cls, digits: Iterable[int], tail: int = 0) -> "DigitStream":
        items = list(digits)
        return cls.from_function(lambda i: items[i] if i < len(items) else tail)

    @classmethod
    def constant(cls, digit: int) -> "DigitStream":
        return cls(lazy.constant(digit))

    def at(self, i: int) -> int:
        return self._seq.at(i)

    def prefix(self, n: int) -> list[int]:
        return self._seq.prefix(n)

    def tail(self, k: int = 1) -> "DigitStream":
        src = self
        return DigitStream.from_function(lambda i: src.at(i + k))

    def __repr__(self):
        return f"{type(self).__name__}({self.prefix(8)}...)"


class UReal(DigitStream):
    """Binary stream over {0, 1} for [0, 1]."""


class IReal(DigitStream):
    """Signed-digit stream over {-1, 0, 1} for [-1, 1]."""


def u_zero() -> UReal:
    return UReal(lazy.constant(0))


def u_one() -> UReal:
    return UReal(lazy.constant(1))


def i_zero() -> IReal:
    return IReal(lazy.constant(0))


def i_one() -> IReal:
    return IReal(lazy.constant(1))


def i_cons(digit: int, tail: DigitStream) -> IReal:
    return IReal(lazy.cons(digit, tail._seq))


# ---------------------------------------------------------------------------
# Rational constructors (canonical expansions) and prefix evaluation


def u_from_rational(num: int, den: int) -> UReal:
    """Greedy binary expansion of num/den in [0, 1].

    Dyadic inputs get the terminating form (trailing zeros).
    """
    x = Fraction(num, den)
    if not 0 <= x <= 1:
        raise DomainError(f"{x} outside [0, 1]")

    def gen() -> Iterator[int]:
        r = x
        while True:
            r *= 2
            if r >= 1:
                r -= 1
                yield 1
            else:
                yield 0

    return UReal(lazy.MemoSeq(gen()))


def i_from_rational(num: int, den: int) -> IReal:
    """Canonical signed expansion of num/den in [-1, 1]: digits {0, 1} for
    nonnegative inputs, {0, -1} for negative ones."""
    x = Fraction(num, den)
    if not -1 <= x <= 1:
        raise DomainError(f"{x} outside [-1, 1]")
    sign = -1 if x < 0 else 1
    mag = u_from_rational(abs(x).numerator, abs(x).denominator)
    return IReal.from_function(lambda i: sign * mag.at(i))


def i_from_fraction(x: Fraction) -> IReal:
    return i_from_rational(x.numerator, x.denominator)


def eval_prefix(x: DigitStream, n: int) -> Fraction:
    """Value of the length-n prefix: sum(d_i * 2^-(i+1)) for i < n.

    The denoted value of the whole stream lies within 2^-n of this.
    """
    total = 0
    for d in x.prefix(n):
        total = 2 * total + d
    return Fraction(total, 2**n)


def decimal_string(q: Fraction) -> str:
    """Exact decimal rendering of a dyadic (or any 2^a*5^b-denominator) rational."""
    num, den = q.numerator, q.denominator
    twos = fives = 0
    d = den
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        raise ValueError(f"{q} has no terminating decimal form")
    places = max(twos, fives)
    scaled = num * 10**places // den
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    if places == 0:
        return f"{sign}{digits}"
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def render_decimal(x: DigitStream, n: int) -> str:
    """Decimal approximation with its certified error bound."""
    return f"{decimal_string(eval_prefix(x, n))} ± 2^-{n}"


# ---------------------------------------------------------------------------
# Precision-indexed orders on the unit interval


def u_lt(a: UReal, b: UReal, p: int) -> bool:
    """a < b observed at precision p: some k < p has equal prefixes up to k
    and a_k < b_k.  Inspects at most p digits."""
    for k in range(p):
        da, db = a.at(k), b.at(k)
        if da != db:
            return da < db
    return False


def u_leq(a: UReal, b: UReal, p: int) -> bool:
    """a <= b at precision p: a <_p b or the p-prefixes agree.  Total."""
    return not u_lt(b, a, p)


# ---------------------------------------------------------------------------
# Midpoint

MIDPOINT_LOOKAHEAD = 1


def _emit(m: int) -> int:
    # digit selection: -1 for m <= -2, 0 for -2 < m <= 1, 1 for m > 1
    if m <= -2:
        return -1
    if m <= 1:
        return 0
    return 1


def _mid_gen(x: DigitStream, y: DigitStream) -> Iterator[int]:
    # Nothing is read until the first digit is pulled; digit j reads inputs
    # up to index j + 1 and no further.
    carry = x.at(0) + y.at(0)
    for j in itertools.count(1):
        m = 2 * carry + x.at(j) + y.at(j)
        digit = _emit(m)
        carry = m - 4 * digit
        assert -2 <= carry <= 2, f"midpoint carry {carry} escaped [-2, 2]"
        yield digit


def midpoint(x: IReal, y: IReal) -> IReal:
    """The exact midpoint (val(x) + val(y)) / 2, digit by digit.

    The head digits seed the carry; each output digit then consumes one new
    digit of each tail, so n output digits read n + 1 input digits.
    """
    return IReal(lazy.MemoSeq(_mid_gen(x, y)))


def halve(x: IReal) -> IReal:
    """val / 2 by prepending a zero digit."""
    return i_cons(0, x)


def add3_scaled(u: IReal, v: IReal, w: IReal) -> IReal:
    """(u + v + w) / 4 as (u ⊕ v) ⊕ (w ⊕ 0); the factor 4 is the caller's
    bookkeeping."""
    return midpoint(midpoint(u, v), midpoint(w, i_zero()))


# ---------------------------------------------------------------------------
# Negation and positive truncation

NEGATE_LOOKAHEAD = 0
TRUNCATE_LOOKAHEAD = 0


def negate(x: IReal) -> IReal:
    """Digitwise sign flip; exact on prefixes."""
    return IReal.from_function(lambda i: -x.at(i))


def truncate(x: IReal) -> UReal:
    """Positive truncation: digits -1 become 0.

    This is a function on codes, not on values: val(truncate(x)) depends on
    the representation of x and always satisfies
    max(val(x), 0) <= val(truncate(x)).
    It preserves the zero stream and is continuous with lookahead 0.
    """
    return UReal.from_function(lambda i: max(x.at(i), 0))


def to_unit(x: IReal) -> UReal:
    """Code-level embedding of [-1, 1] into [0, 1] as truncate(x ⊕ 1).

    Order tests on embedded values are intensional (truncation is not a
    realiser) but total, deterministic, and continuous, which is all the
    piecewise interpolation oracle needs.
    """
    return truncate(midpoint(x, i_one()))


# ---------------------------------------------------------------------------
# Multiplication
#
# The product stream combines a "cross term" stream built from the first two
# digits of each factor with a per-output-index family of "head product"
# streams whose recursion depth matches the index being produced.  Writing
# x = a :: b :: xt and y = c :: d :: yt:
#
#   cross(x, y)   = cross1 ⊕ cross2
#   cross1        = (a*d) :: ((d ⊗ xt) ⊕ (b ⊗ yt))
#   cross2        = (c ⊗ xt) ⊕ (a ⊗ yt)
#   heads(0)      = [a*c, b*c, b*d] ++ zeros
#   heads(k)      = [a*c, b*c, b*d] ++ (cross(xt, yt) ⊕ heads(k-1 of xt, yt))
#   (x*y)[n]      = (cross(x, y) ⊕ heads(n))[n]
#
# where ⊗ scales a stream by a digit.  heads(k) agrees with its limit on
# digits 0..2k+2, which covers the n+1 digits the final midpoint reads, so
# the output equals the limit stream digitwise and denotes exactly
# val(x)*val(y).

MULTIPLY_LOOKAHEAD = 5


def _mid_stream(x: DigitStream, y: DigitStream) -> DigitStream:
    return DigitStream(lazy.MemoSeq(_mid_gen(x, y)))


class _MulContext:
    """Memoizes the helper streams of one factor pair, and the context of
    their double tails for the head-product recursion.

    All stream wiring is deferred until a digit is actually pulled, so the
    input prefix consumed is exactly what the recurrences require.

    The head-product family heads(k) agrees with its limit stream on digits
    0..2k+2, while output digit n only reads heads(n) up to digit n+1, so
    the product digits can equally be pulled from a single self-referential
    limit stream; that is what `digit` does, in O(prefix^2) rather than
    O(prefix^3) total work.  `per_index_digit` keeps the per-index family
    route; the two are digit-for-digit identical (tested).
    """

    __slots__ = ("x", "y", "_cross", "_heads", "_rests", "_out", "_child", "_limit", "_limit_rest", "_limit_out")

    def __init__(self, x: DigitStream, y: DigitStream):
        self.x = x
        self.y = y
        self._cross: DigitStream | None = None
        self._heads: dict[int, DigitStream] = {}
        self._rests: dict[int, DigitStream] = {}
        self._out: dict[int, DigitStream] = {}
        self._child: "_MulContext | None" = None
        self._limit: DigitStream | None = None
        self._limit_rest: DigitStream | None = None
        self._limit_out: DigitStream | None = None

    def child(self) -> "_MulContext":
        if self._child is None:
            self._child = _MulContext(self.x.tail(2), self.y.tail(2))
        return self._child

    def cross(self) -> DigitStream:
        if self._cross is None:
            x, y = self.x, self.y
            xt, yt = x.tail(2), y.tail(2)

            def cross1_at(i: int) -> int:
                if i == 0:
                    return x.at(0) * y.at(1)
                return self._cross1_rest().at(i - 1)

            cross1 = DigitStream.from_function(cross1_at)
            cross2 = _mid_stream(_LazyScaled(y, 0, xt), _LazyScaled(x, 0, yt))
            self._cross = _mid_stream(cross1, cross2)
        return self._cross

    def _cross1_rest(self) -> DigitStream:
        got = self._rests.get(-1)
        if got is None:
            xt, yt = self.x.tail(2), self.y.tail(2)
            got = _mid_stream(_LazyScaled(self.y, 1, xt), _LazyScaled(self.x, 1, yt))
            self._rests[-1] = got
        return got

    def _lead_digit(self, i: int) -> int:
        if i == 0:
            return self.x.at(0) * self.y.at(0)
        if i == 1:
            return self.x.at(1) * self.y.at(0)
        return self.x.at(1) * self.y.at(1)

    def heads(self, k: int) -> DigitStream:
        got = self._heads.get(k)
        if got is None:

            def at(i: int, k=k) -> int:
                if i < 3:
                    return self._lead_digit(i)
                if k == 0:
                    return 0
                return self._heads_rest(k).at(i - 3)

            got = DigitStream.from_function(at)
            self._heads[k] = got
        return got

    def _heads_rest(self, k: int) -> DigitStream:
        got = self._rests.get(k)
        if got is None:
            child = self.child()
            got = _mid_stream(child.cross(), child.heads(k - 1))
            self._rests[k] = got
        return got

    def heads_limit(self) -> DigitStream:
        if self._limit is None:

            def at(i: int) -> int:
                if i < 3:
                    return self._lead_digit(i)
                if self._limit_rest is None:
                    child = self.child()
                    self._limit_rest = _mid_stream(child.cross(), child.heads_limit())
                return self._limit_rest.at(i - 3)

            self._limit = DigitStream.from_function(at)
        return self._limit

    def digit(self, n: int) -> int:
        if self._limit_out is None:
            self._limit_out = _mid_stream(self.cross(), self.heads_limit())
        return self._limit_out.at(n)

    def per_index_digit(self, n: int) -> int:
        out = self._out.get(n)
        if out is None:
            out = _mid_stream(self.cross(), self.heads(n))
            self._out[n] = out
        return out.at(n)


class _LazyScaled(DigitStream):
    """A stream scaled by a digit of another stream, where even the scaling
    digit is read only when the first item is pulled."""

    __slots__ = ("_scaler", "_index", "_base")

    def __init__(self, scaler: DigitStream, index: int, base: DigitStream):
        self._scaler = scaler
        self._index = index
        self._base = base

    def at(self, i: int) -> int:
        return self._scaler.at(self._index) * self._base.at(i)

    def prefix(self, n: int) -> list[int]:
        return [self.at(i) for i in range(n)]


def multiply(x: IReal, y: IReal) -> IReal:
    """Exact product of signed-digit streams.

    A length-n prefix of the result is within 2^-n of val(x)*val(y); n
    output digits read at most n + 5 digits of each factor.
    """
    ctx = _MulContext(x, y)
    return IReal.from_function(ctx.digit)


def multiply_per_index(x: IReal, y: IReal) -> IReal:
    """The product with digit n drawn from the depth-n head-product family;
    digit-for-digit equal to `multiply`, quoted for testing the family."""
    ctx = _MulContext(x, y)
    return IReal.from_function(ctx.per_index_digit)


class _CountingStream(DigitStream):
    __slots__ = ("max_read",)

    def __init__(self, base: DigitStream):
        super().__init__(base._seq)
        self.max_read = -1

    def at(self, i: int) -> int:
        if i > self.max_read:
            self.max_read = i
        return super().at(i)


def multiply_needed_prefix(n: int) -> int:
    """Measured input prefix length used to produce n product digits.

    The read pattern is input-independent, so instrumenting one run answers
    the question for all inputs; this pins the multiplication lookahead.
    """
    cx = _CountingStream(i_zero())
    cy = _CountingStream(i_zero())
    multiply(cx, cy).prefix(n)
    return max(cx.max_read, cy.max_read) + 1


# ---------------------------------------------------------------------------
# Embeddings into the searchable universe

U_DESC = Sequence(Finite(2))
I_DESC = Sequence(Finite(3))

# Finite(3) index <-> signed digit; index 0 maps to digit 0 so the canonical
# default sequence denotes zero.
INDEX_TO_DIGIT = (0, 1, -1)
DIGIT_TO_INDEX = {0: 0, 1: 1, -1: 2}


def ureal_to_value(x: UReal) -> SeqVal:
    return SeqVal(lambda i: FinVal(x.at(i), 2))


def value_to_ureal(v: SeqVal) -> UReal:
    return UReal.from_function(lambda i: v.at(i).index)


def ireal_to_value(x: IReal) -> SeqVal:
    return SeqVal(lambda i: FinVal(DIGIT_TO_INDEX[x.at(i)], 3))


def value_to_ireal(v: SeqVal) -> IReal:
    return IReal.from_function(lambda i: INDEX_TO_DIGIT[v.at(i).index])


def _seq_prec(n: int) -> Precision:
    return SeqPrec(n, UNIT)


def negate_map() -> ContinuousMap:
    return ContinuousMap(
        apply=lambda v: ireal_to_value(negate(value_to_ireal(v))),
        source_desc=I_DESC,
        target_desc=I_DESC,
        modulus_for=lambda p: _seq_prec(p.length + NEGATE_LOOKAHEAD),
    )


def truncate_map() -> ContinuousMap:
    return ContinuousMap(
        apply=lambda v: ureal_to_value(truncate(value_to_ireal(v))),
        source_desc=I_DESC,
        target_desc=U_DESC,
        modulus_for=lambda p: _seq_prec(p.length + TRUNCATE_LOOKAHEAD),
    )


def midpoint_map() -> ContinuousMap:
    return ContinuousMap(
        apply=lambda v: ireal_to_value(
            midpoint(value_to_ireal(v.first), value_to_ireal(v.second))
        ),
        source_desc=Product(I_DESC, I_DESC),
        target_desc=I_DESC,
        modulus_for=lambda p: PairPrec(
            _seq_prec(p.length + MIDPOINT_LOOKAHEAD),
            _seq_prec(p.length + MIDPOINT_LOOKAHEAD),
        ),
    )


def multiply_map() -> ContinuousMap:
    return ContinuousMap(
        apply=lambda v: ireal_to_value(
            multiply(value_to_ireal(v.first), value_to_ireal(v.second))
        ),
        source_desc=Product(I_DESC, I_DESC),
        target_desc=I_DESC,
        modulus_for=lambda p: PairPrec(
            _seq_prec(p.length + MULTIPLY_LOOKAHEAD),
            _seq_prec(p.length + MULTIPLY_LOOKAHEAD),
        ),
    )

"""Independent ground truth for the test suite.

Everything here is exact rational arithmetic (`fractions.Fraction`) and
plain enumeration.  This module deliberately shares no algorithmic code
with the stream arithmetic or the searchers it is used to check; only the
value data types from `stype` are reused.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence as SequenceABC

from .stype import (
    Finite,
    FinVal,
    PairPrec,
    PairVal,
    Precision,
    Product,
    Sequence,
    SeqPrec,
    SeqVal,
    STypeDescriptor,
    STypeValue,
    StructuralError,
    Unit,
    default_value,
)

Rational = Fraction


class OracleBudgetError(Exception):
    """Candidate space larger than the enumeration budget."""


def rat_midpoint(a: Rational, b: Rational) -> Rational:
    return (a + b) / 2


def rat_compare(a: Rational, b: Rational) -> int:
    return (a > b) - (a < b)


def prefix_value(digits: SequenceABC[int]) -> Rational:
    """Value of a digit prefix under sum(d_i * 2^-(i+1))."""
    total = Fraction(0)
    for i, d in enumerate(digits):
        total += Fraction(d, 2 ** (i + 1))
    return total


# ---------------------------------------------------------------------------
# Brute-force search over precision-bounded candidate spaces


def candidate_count(desc: STypeDescriptor, p: Precision) -> int:
    match desc, p:
        case Finite(size), Unit():
            return size
        case Product(dl, dr), PairPrec(pl, pr):
            return candidate_count(dl, pl) * candidate_count(dr, pr)
        case Sequence(elem), SeqPrec(m, pe):
            return candidate_count(elem, pe) ** m
    raise StructuralError(f"precision {p!r} does not match descriptor {desc!r}")


def candidates(desc: STypeDescriptor, p: Precision) -> Iterator[STypeValue]:
    """All candidates distinguishable at precision p, lexicographically;
    sequences carry the constant default tail after the prefix."""
    match desc, p:
        case Finite(size), Unit():
            for i in range(size):
                yield FinVal(i, size)
        case Product(dl, dr), PairPrec(pl, pr):
            for a in candidates(dl, pl):
                for b in candidates(dr, pr):
                    yield PairVal(a, b)
        case Sequence(elem), SeqPrec(m, pe):
            filler = default_value(elem)

            def build(chosen: tuple) -> SeqVal:
                items = list(chosen)
                return SeqVal(lambda i: items[i] if i < len(items) else filler)

            def rec(k: int, chosen: tuple) -> Iterator[SeqVal]:
                if k == 0:
                    yield build(chosen)
                    return
                for e in candidates(elem, pe):
                    yield from rec(k - 1, chosen + (e,))

            yield from rec(m, ())
        case _:
            raise StructuralError(f"precision {p!r} does not match descriptor {desc!r}")


def brute_force_search(
    desc: STypeDescriptor,
    p: Precision,
    decide: Callable[[STypeValue], bool],
    budget: int = 10**7,
) -> Optional[STypeValue]:
    """First satisfying candidate in lexicographic scan order, or None."""
    if candidate_count(desc, p) > budget:
        raise OracleBudgetError(f"{candidate_count(desc, p)} candidates exceed budget {budget}")
    for x in candidates(desc, p):
        if decide(x):
            return x
    return None


def brute_force_min(
    desc: STypeDescriptor,
    p: Precision,
    key: Callable[[STypeValue], object],
    budget: int = 10**7,
) -> tuple[STypeValue, object]:
    """Earliest candidate (lexicographic) with the smallest key."""
    if candidate_count(desc, p) > budget:
        raise OracleBudgetError(f"{candidate_count(desc, p)} candidates exceed budget {budget}")
    best = None
    best_key = None
    for x in candidates(desc, p):
        k = key(x)
        if best is None or k < best_key:
            best, best_key = x, k
    return best, best_key


# ---------------------------------------------------------------------------
# Root finding


def bisect_root(
    f: Callable[[Rational], Rational],
    lo: Rational,
    hi: Rational,
    tol: Rational = Fraction(1, 2**20),
) -> Rational:
    """A root of f on [lo, hi] within tol, by exact bisection.

    Requires a sign change on the interval.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo < 0) == (fhi < 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return (lo + hi) / 2

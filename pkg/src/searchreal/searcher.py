"""Continuous searchers for every searchable type.

Finite types are scanned exhaustively, products search the left component
against an optimal right completion, and sequences use the prefix-induction
construction: the modulus of a predicate over sequences bounds how many
leading elements matter, and consing a head onto the sequence drops that
bound by one, which is the recursion measure.

A searcher always returns an element; `satisfied` reports whether the
predicate holds on it (the search condition).  When nothing satisfies the
predicate the witness is a fixed fallback, so results are deterministic.

The algorithms are exponential in the modulus.  Every predicate evaluation
is charged against a budget; when the count would exceed it, the search
fails loudly with `BudgetError` instead of running forever.
"""

from __future__ import annotations

from dataclasses import dataclass

from .stype import (
    ContinuousPredicate,
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
    precision_matches,
)

DEFAULT_NODE_BUDGET = 10**7


class BudgetError(Exception):
    """Raised when a search would exceed its predicate-evaluation budget."""

    def __init__(self, limit: int):
        super().__init__(f"predicate evaluation budget of {limit} exceeded")
        self.limit = limit


class Budget:
    """A runtime ceiling on predicate/objective evaluations.

    One instance is threaded through a whole search tree; `spent` doubles
    as the statistics counter reported by the CLI.
    """

    __slots__ = ("limit", "spent")

    def __init__(self, limit: int = DEFAULT_NODE_BUDGET):
        self.limit = limit
        self.spent = 0

    def charge(self, n: int = 1) -> None:
        self.spent += n
        if self.spent > self.limit:
            raise BudgetError(self.limit)


@dataclass(frozen=True)
class SearchResult:
    witness: STypeValue
    satisfied: bool


def search(desc: STypeDescriptor, pred: ContinuousPredicate, budget: Budget | None = None) -> SearchResult:
    """Search `desc` for a value satisfying `pred`.

    If any value distinguishable at pred.modulus satisfies the predicate,
    the returned witness does; otherwise the witness is the canonical
    fallback and `satisfied` is False.
    """
    if budget is None:
        budget = Budget()
    if not precision_matches(desc, pred.modulus):
        raise StructuralError(f"modulus {pred.modulus!r} does not match descriptor {desc!r}")
    return _search(desc, pred.modulus, pred.decide, budget)


def _search(desc, modulus, decide, budget) -> SearchResult:
    match desc:
        case Finite(size):
            return _search_finite(size, decide, budget)
        case Product(dl, dr):
            return _search_product(dl, dr, modulus, decide, budget)
        case Sequence(elem):
            return _search_sequence(elem, modulus, decide, budget)
    raise StructuralError(f"not a descriptor: {desc!r}")


def search_finite(cardinality: int, pred: ContinuousPredicate, budget: Budget | None = None) -> SearchResult:
    """Scan indices 0..n-1 in order; first hit wins, index n-1 is the fallback."""
    if cardinality < 1:
        raise StructuralError(f"cannot search an empty type (cardinality {cardinality})")
    return _search_finite(cardinality, pred.decide, budget or Budget())


def _search_finite(size, decide, budget) -> SearchResult:
    last = FinVal(size - 1, size)
    for i in range(size - 1):
        x = FinVal(i, size)
        budget.charge()
        if decide(x):
            return SearchResult(x, True)
    budget.charge()
    return SearchResult(last, decide(last))


def search_product(
    desc_left: STypeDescriptor,
    desc_right: STypeDescriptor,
    pred: ContinuousPredicate,
    budget: Budget | None = None,
) -> SearchResult:
    """Pair search: the right component is optimized per left candidate."""
    modulus = pred.modulus
    if not isinstance(modulus, PairPrec):
        raise StructuralError(f"product search needs a pair modulus, got {modulus!r}")
    return _search_product(desc_left, desc_right, modulus, pred.decide, budget or Budget())


def _search_product(dl, dr, modulus, decide, budget) -> SearchResult:
    pl, pr = modulus.first, modulus.second

    def best_right(x) -> SearchResult:
        return _search(dr, pr, lambda y: decide(PairVal(x, y)), budget)

    outer = _search(dl, pl, lambda x: best_right(x).satisfied, budget)
    inner = best_right(outer.witness)
    return SearchResult(PairVal(outer.witness, inner.witness), inner.satisfied)


def search_sequence(
    elem_desc: STypeDescriptor,
    pred: ContinuousPredicate,
    budget: Budget | None = None,
) -> SearchResult:
    """Prefix-induction search over infinite sequences of a searchable type."""
    modulus = pred.modulus
    if not isinstance(modulus, SeqPrec):
        raise StructuralError(f"sequence search needs a sequence modulus, got {modulus!r}")
    return _search_sequence(elem_desc, modulus, pred.decide, budget or Budget())


def _search_sequence(elem, modulus, decide, budget) -> SearchResult:
    n, pe = modulus.length, modulus.element
    if n == 0:
        # Any element vacuously matches a modulus-0 predicate when a witness
        # exists, so return the constant default without searching.
        witness = SeqVal.constant(default_value(elem))
        budget.charge()
        return SearchResult(witness, decide(witness))

    def best_head(alpha: SeqVal) -> SearchResult:
        return _search(elem, pe, lambda x: decide(SeqVal.cons(x, alpha)), budget)

    tail = _search_sequence(
        elem,
        SeqPrec(n - 1, pe),
        lambda alpha: best_head(alpha).satisfied,
        budget,
    )
    head = best_head(tail.witness)
    return SearchResult(SeqVal.cons(head.witness, tail.witness), head.satisfied)

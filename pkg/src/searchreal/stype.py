"""Searchable type descriptors, their values, precisions, and continuity data.

The searchable universe is built from three constructors: finite non-empty
types, binary products, and infinite sequences.  Descriptors and precisions
are runtime data; conformance between them is checked dynamically rather
than enforced by the host type system.

Equality is always *precision-indexed*: two values are compared only up to a
precision whose shape mirrors the descriptor (sequences are compared on a
finite prefix).  Predicates and maps carry explicit moduli stating how much
input precision suffices for their answers; honesty of a modulus is a
testable property, verified by the sampling harness at the bottom of this
module, and trusted at run time.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence as SequenceABC

from . import lazy


class StructuralError(Exception):
    """Descriptor / value / precision shapes do not line up (a caller bug)."""


# ---------------------------------------------------------------------------
# Descriptors


@dataclass(frozen=True)
class Finite:
    """A finite type with `size` elements, size >= 1."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise StructuralError(f"finite type must be non-empty, got size {self.size}")


@dataclass(frozen=True)
class Product:
    left: "STypeDescriptor"
    right: "STypeDescriptor"


@dataclass(frozen=True)
class Sequence:
    element: "STypeDescriptor"


STypeDescriptor = Finite | Product | Sequence


# ---------------------------------------------------------------------------
# Precisions (elements of the exactness type of a descriptor)


@dataclass(frozen=True)
class Unit:
    """The only precision for finite types."""


UNIT = Unit()


@dataclass(frozen=True)
class PairPrec:
    first: "Precision"
    second: "Precision"


@dataclass(frozen=True)
class SeqPrec:
    """Observe the first `length` elements, each at precision `element`."""

    length: int
    element: "Precision"

    def __post_init__(self):
        if self.length < 0:
            raise StructuralError(f"prefix length must be nonnegative, got {self.length}")


Precision = Unit | PairPrec | SeqPrec


def precision_matches(desc: STypeDescriptor, p: Precision) -> bool:
    match desc, p:
        case Finite(), Unit():
            return True
        case Product(left, right), PairPrec(pl, pr):
            return precision_matches(left, pl) and precision_matches(right, pr)
        case Sequence(elem), SeqPrec(_, pe):
            return precision_matches(elem, pe)
    return False


# ---------------------------------------------------------------------------
# Values


@dataclass(frozen=True)
class FinVal:
    index: int
    size: int

    def __post_init__(self):
        if not 0 <= self.index < self.size:
            raise StructuralError(f"finite value index {self.index} out of range for size {self.size}")


@dataclass(frozen=True)
class PairVal:
    first: "STypeValue"
    second: "STypeValue"


class SeqVal:
    """An infinite sequence of values, lazily evaluated and memoized.

    `at` is deterministic: repeated queries at an index return the same
    value object.  Construction takes either an index function or an
    existing memo sequence.
    """

    __slots__ = ("_seq",)

    def __init__(self, at: Callable[[int], "STypeValue"] | lazy.MemoSeq):
        self._seq = at if isinstance(at, lazy.MemoSeq) else lazy.from_function(at)

    def at(self, i: int) -> "STypeValue":
        return self._seq.at(i)

    def prefix(self, n: int) -> list["STypeValue"]:
        return self._seq.prefix(n)

    @staticmethod
    def constant(value: "STypeValue") -> "SeqVal":
        return SeqVal(lazy.constant(value))

    @staticmethod
    def cons(head: "STypeValue", tail: "SeqVal") -> "SeqVal":
        return SeqVal(lazy.cons(head, tail._seq))

    def __repr__(self):
        return f"SeqVal({self.prefix(8)!r}...)"


STypeValue = FinVal | PairVal | SeqVal


def default_value(desc: STypeDescriptor) -> STypeValue:
    """The canonical element of a descriptor: index 0, pairs of defaults,
    and the constant-default sequence."""
    match desc:
        case Finite(size):
            return FinVal(0, size)
        case Product(left, right):
            return PairVal(default_value(left), default_value(right))
        case Sequence(elem):
            return SeqVal.constant(default_value(elem))
    raise StructuralError(f"not a descriptor: {desc!r}")


def conforms(desc: STypeDescriptor, value: STypeValue, depth: int = 8) -> bool:
    """Check that `value` fits `desc`.  Total for Finite/Product; sequences
    are checked up to `depth` elements."""
    match desc, value:
        case Finite(size), FinVal(_, vsize):
            return size == vsize
        case Product(left, right), PairVal(a, b):
            return conforms(left, a, depth) and conforms(right, b, depth)
        case Sequence(elem), SeqVal() as s:
            return all(conforms(elem, s.at(i), depth) for i in range(depth))
    return False


# ---------------------------------------------------------------------------
# Precision-indexed equality


def eq_with_precision(desc: STypeDescriptor, x: STypeValue, y: STypeValue, p: Precision) -> bool:
    """Equality observed at precision `p`.

    Finite values compare by index; pairs componentwise; sequences on the
    first `p.length` elements.  Inspects only finitely many elements, so it
    always terminates.
    """
    match desc, x, y, p:
        case Finite(size), FinVal(i, si), FinVal(j, sj), Unit():
            if si != size or sj != size:
                raise StructuralError("finite value does not conform to descriptor")
            return i == j
        case Product(dl, dr), PairVal(xa, xb), PairVal(ya, yb), PairPrec(pl, pr):
            return eq_with_precision(dl, xa, ya, pl) and eq_with_precision(dr, xb, yb, pr)
        case Sequence(elem), SeqVal() as xs, SeqVal() as ys, SeqPrec(m, pe):
            return all(eq_with_precision(elem, xs.at(i), ys.at(i), pe) for i in range(m))
    raise StructuralError(
        f"descriptor/value/precision mismatch: {desc!r} with {type(x).__name__}, {type(y).__name__}, {p!r}"
    )


# ---------------------------------------------------------------------------
# Continuity wrappers


@dataclass(frozen=True)
class ContinuousPredicate:
    """A total boolean predicate bundled with its modulus of continuity.

    The modulus claims: values equal at `modulus` get equal decisions.
    The claim is testable (see `predicate_honesty_violations`) and trusted
    by the searchers.
    """

    decide: Callable[[STypeValue], bool]
    modulus: Precision


@dataclass(frozen=True)
class ContinuousMap:
    """A map between searchable types with an explicit modulus function.

    `modulus_for(p)` states how precisely the input must be known for the
    output to be pinned down at precision `p`.
    """

    apply: Callable[[STypeValue], STypeValue]
    source_desc: STypeDescriptor
    target_desc: STypeDescriptor
    modulus_for: Callable[[Precision], Precision]


def compose_continuous(f: ContinuousMap, g: ContinuousMap) -> ContinuousMap:
    """g after f, with the composed modulus f.modulus_for(g.modulus_for(p))."""
    if f.target_desc != g.source_desc:
        raise StructuralError(
            f"cannot compose: intermediate descriptors differ ({f.target_desc!r} vs {g.source_desc!r})"
        )
    return ContinuousMap(
        apply=lambda x: g.apply(f.apply(x)),
        source_desc=f.source_desc,
        target_desc=g.target_desc,
        modulus_for=lambda p: f.modulus_for(g.modulus_for(p)),
    )


def identity_map(desc: STypeDescriptor) -> ContinuousMap:
    return ContinuousMap(lambda x: x, desc, desc, lambda p: p)


def pred_equiv_with_precision(
    desc: STypeDescriptor,
    P: ContinuousPredicate,
    Q: ContinuousPredicate,
    p: Precision,
    samples: SequenceABC[STypeValue],
) -> bool:
    """Decide, on the supplied samples only, whether P and Q agree.

    This is the sampling stand-in for logical equivalence at precision `p`;
    callers draw the samples so that they represent the `p`-classes of
    interest.  Used by the test suite's searcher-continuity checks.
    """
    del desc, p
    return all(P.decide(x) == Q.decide(x) for x in samples)


# ---------------------------------------------------------------------------
# Enumeration of precision classes


def class_count(desc: STypeDescriptor, p: Precision) -> int:
    """Number of equivalence classes of eq_with_precision at (desc, p)."""
    match desc, p:
        case Finite(size), Unit():
            return size
        case Product(dl, dr), PairPrec(pl, pr):
            return class_count(dl, pl) * class_count(dr, pr)
        case Sequence(elem), SeqPrec(m, pe):
            return class_count(elem, pe) ** m
    raise StructuralError(f"precision {p!r} does not match descriptor {desc!r}")


def enumerate_representatives(desc: STypeDescriptor, p: Precision) -> Iterator[STypeValue]:
    """One representative per precision class, in lexicographic order.

    Leftmost product component and sequence index 0 vary slowest.  Sequence
    representatives are prefixes completed with the constant default tail.
    """
    match desc, p:
        case Finite(size), Unit():
            for i in range(size):
                yield FinVal(i, size)
        case Product(dl, dr), PairPrec(pl, pr):
            for a in enumerate_representatives(dl, pl):
                for b in enumerate_representatives(dr, pr):
                    yield PairVal(a, b)
        case Sequence(elem), SeqPrec(m, pe):
            tail = default_value(elem)
            for combo in _prefix_combinations(elem, pe, m):
                yield _prefix_seq(combo, tail)
        case _:
            raise StructuralError(f"precision {p!r} does not match descriptor {desc!r}")


def _prefix_combinations(elem, pe, m) -> Iterator[tuple]:
    if m == 0:
        yield ()
        return
    for head in enumerate_representatives(elem, pe):
        for rest in _prefix_combinations(elem, pe, m - 1):
            yield (head,) + rest


def _prefix_seq(prefix: tuple, tail_value: STypeValue) -> SeqVal:
    items = list(prefix)
    return SeqVal(lambda i: items[i] if i < len(items) else tail_value)


# ---------------------------------------------------------------------------
# Random sampling and the modulus-honesty harness

DEFAULT_SAMPLE_PREFIX = 20
DEFAULT_SAMPLE_COUNT = 100


def sample_value(desc: STypeDescriptor, rng: random.Random) -> STypeValue:
    """A random conforming value; sequence elements are derived from a seed
    so that repeated queries are deterministic."""
    match desc:
        case Finite(size):
            return FinVal(rng.randrange(size), size)
        case Product(left, right):
            return PairVal(sample_value(left, rng), sample_value(right, rng))
        case Sequence(elem):
            seed = rng.getrandbits(64)
            return SeqVal(lambda i: sample_value(elem, random.Random((seed, i))))
    raise StructuralError(f"not a descriptor: {desc!r}")


def perturb_beyond(desc: STypeDescriptor, x: STypeValue, p: Precision, rng: random.Random) -> STypeValue:
    """A value equal to `x` at precision `p` but resampled beyond it."""
    match desc, x, p:
        case Finite(), FinVal() as v, Unit():
            return v
        case Product(dl, dr), PairVal(a, b), PairPrec(pl, pr):
            return PairVal(perturb_beyond(dl, a, pl, rng), perturb_beyond(dr, b, pr, rng))
        case Sequence(elem), SeqVal() as s, SeqPrec(m, pe):
            kept = [perturb_beyond(elem, s.at(i), pe, rng) for i in range(m)]
            seed = rng.getrandbits(64)

            def at(i: int) -> STypeValue:
                if i < m:
                    return kept[i]
                return sample_value(elem, random.Random((seed, i)))

            return SeqVal(at)
    raise StructuralError(f"descriptor/value/precision mismatch in perturb_beyond")


def predicate_honesty_violations(
    desc: STypeDescriptor,
    pred: ContinuousPredicate,
    rng: random.Random,
    samples: int = DEFAULT_SAMPLE_COUNT,
) -> int:
    """Count sampled failures of the predicate's modulus claim."""
    bad = 0
    for _ in range(samples):
        x = sample_value(desc, rng)
        x2 = perturb_beyond(desc, x, pred.modulus, rng)
        if pred.decide(x) != pred.decide(x2):
            bad += 1
    return bad


def map_honesty_violations(
    f: ContinuousMap,
    p: Precision,
    rng: random.Random,
    samples: int = DEFAULT_SAMPLE_COUNT,
) -> int:
    """Count sampled failures of the map's modulus claim at target precision p."""
    q = f.modulus_for(p)
    bad = 0
    for _ in range(samples):
        x = sample_value(f.source_desc, rng)
        x2 = perturb_beyond(f.source_desc, x, q, rng)
        if not eq_with_precision(f.target_desc, f.apply(x), f.apply(x2), p):
            bad += 1
    return bad

"""Deterministic complete global argmin at a precision.

The core construction mirrors the searchers: finite domains are scanned
keeping the current minimum under the precision-indexed order (earliest
wins on ties), products optimize the right component per left candidate,
and sequences recurse on the first projection of the objective's modulus.
The returned point's value is <=_p the value at every point distinguishable
at the modulus; with several global minimizers the returned *argument* is
not stable across precisions, and nothing here pretends otherwise.

For objectives that can also report a certified rational lower bound over a
box of inputs (`interval_bound`), `argmin` switches to a branch-and-bound
scan over the same candidate grid.  Pruning discards only subtrees whose
certified bound exceeds the best certified value found, so the value-level
guarantee is identical to the exhaustive scan while visiting a tiny
fraction of the grid.  Only the tie-breaking argument may differ, which the
contract never promises anyway.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .reals import UReal, eval_prefix, u_lt
from .searcher import Budget, BudgetError, DEFAULT_NODE_BUDGET
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
    default_value,
    precision_matches,
)

# Box: one dyadic interval (lo_num, hi_num, scale) per sequence leaf of the
# domain, in left-to-right order, denoting [lo_num/2^scale, hi_num/2^scale].
Box = list[tuple[int, int, int]]

# Extra digits used to certify candidate values during branch and bound.
# Deep on purpose: tie regions shaped like high-order residual powers only
# pinch off once candidate values are resolved well below the grid scale.
BNB_VALUE_GUARD = 64


@dataclass(frozen=True)
class ObjectiveFunction:
    """A continuous map into the unit interval, with explicit moduli.

    `modulus_for(p)` bounds the domain precision that pins down p output
    digits.  `interval_bound`, when present, maps a box to a certified
    lower bound on the objective's value over every grid point in the box;
    it unlocks the branch-and-bound path.  `fast_prefix`, when present,
    must return the same digits `apply` would produce, computed from the
    grid point's digit lists; the branch-and-bound leaf evaluations use it
    to avoid lazy-stream overhead.
    """

    domain_desc: STypeDescriptor
    apply: Callable[[STypeValue], UReal]
    modulus_for: Callable[[int], Precision]
    interval_bound: Optional[Callable[[Box], tuple[int, int]]] = None
    fast_prefix: Optional[Callable[[list[list[int]], int], list[int]]] = None


def argmin(
    f: ObjectiveFunction,
    p: int,
    budget: Budget | None = None,
    stats: dict | None = None,
) -> STypeValue:
    """A point whose objective value is <=_p the value at every candidate
    distinguishable at f.modulus_for(p)."""
    if budget is None:
        budget = Budget()
    prec = f.modulus_for(p)
    if not precision_matches(f.domain_desc, prec):
        raise StructuralError(f"modulus {prec!r} does not match domain {f.domain_desc!r}")
    if f.interval_bound is not None and _bnb_supported(f.domain_desc):
        witness, _ = _argmin_bnb(f, prec, p, budget, stats)
        return witness
    witness, _ = _argmin(f.domain_desc, prec, f.apply, p, budget)
    return witness


def _argmin(desc, prec, g, p, budget) -> tuple[STypeValue, UReal]:
    match desc, prec:
        case Finite(size), _:
            best = FinVal(0, size)
            budget.charge()
            best_val = g(best)
            for i in range(1, size):
                x = FinVal(i, size)
                budget.charge()
                val = g(x)
                if u_lt(val, best_val, p):
                    best, best_val = x, val
            return best, best_val
        case Product(dl, dr), PairPrec(pl, pr):

            def best_right(x) -> tuple[STypeValue, UReal]:
                return _argmin(dr, pr, lambda y: g(PairVal(x, y)), p, budget)

            x0, _ = _argmin(dl, pl, lambda x: best_right(x)[1], p, budget)
            y0, val = best_right(x0)
            return PairVal(x0, y0), val
        case Sequence(elem), SeqPrec(n, pe):
            if n == 0:
                witness = SeqVal.constant(default_value(elem))
                budget.charge()
                return witness, g(witness)

            def best_head(alpha) -> tuple[STypeValue, UReal]:
                return _argmin(elem, pe, lambda x: g(SeqVal.cons(x, alpha)), p, budget)

            tail, _ = _argmin(
                Sequence(elem), SeqPrec(n - 1, pe), lambda alpha: best_head(alpha)[1], p, budget
            )
            head, val = best_head(tail)
            return SeqVal.cons(head, tail), val
    raise StructuralError(f"modulus {prec!r} does not match descriptor {desc!r}")


def min_loss_parameter(
    model,
    oracle_fn,
    loss,
    p: int,
    budget: Budget | None = None,
    interval_bound: Optional[Callable[[Box], Fraction]] = None,
    fast_prefix: Optional[Callable[[list[list[int]], int], list[int]]] = None,
    stats: dict | None = None,
) -> STypeValue:
    """Argmin of k -> loss(oracle, model(k)) with the composed modulus.

    `interval_bound`, when supplied, must lower-bound the composed loss
    value over a parameter box; it enables the branch-and-bound path.
    """
    objective = ObjectiveFunction(
        domain_desc=model.param_desc,
        apply=lambda k: loss.apply(oracle_fn, model.instantiate(k)),
        modulus_for=lambda q: model.weak_modulus_for(loss.modulus_for(q)),
        interval_bound=interval_bound,
        fast_prefix=fast_prefix,
    )
    return argmin(objective, p, budget, stats)


# ---------------------------------------------------------------------------
# Branch and bound over dyadic boxes


def _bnb_supported(desc: STypeDescriptor) -> bool:
    match desc:
        case Sequence(Finite(3)):
            return True
        case Product(dl, dr):
            return _bnb_supported(dl) and _bnb_supported(dr)
    return False


def _leaf_lengths(desc: STypeDescriptor, prec: Precision) -> list[int]:
    match desc, prec:
        case Sequence(Finite(3)), SeqPrec(m, _):
            return [m]
        case Product(dl, dr), PairPrec(pl, pr):
            return _leaf_lengths(dl, pl) + _leaf_lengths(dr, pr)
    raise StructuralError(f"unsupported branch-and-bound domain {desc!r}")


_BNB_DIGITS = (Fraction(0), Fraction(1), Fraction(-1))  # scan order of Finite(3) indices
_DIGIT_OF_INDEX = (0, 1, -1)


def _assemble(desc: STypeDescriptor, prefixes: list[list[int]], pos: int = 0) -> tuple[STypeValue, int]:
    match desc:
        case Sequence(Finite(3)):
            items = list(prefixes[pos])
            return (
                SeqVal(lambda i, it=items: FinVal(it[i], 3) if i < len(it) else FinVal(0, 3)),
                pos + 1,
            )
        case Product(dl, dr):
            left, pos = _assemble(dl, prefixes, pos)
            right, pos = _assemble(dr, prefixes, pos)
            return PairVal(left, right), pos
    raise StructuralError(f"unsupported branch-and-bound domain {desc!r}")


def _prefix_int(val: UReal, p: int) -> int:
    out = 0
    for d in val.prefix(p):
        out = 2 * out + d
    return out


def _argmin_bnb(
    f: ObjectiveFunction,
    prec: Precision,
    p: int,
    budget: Budget,
    stats: dict | None = None,
) -> tuple[STypeValue, UReal]:
    # Incumbent key: (p-digit prefix integer, certified value upper bound) of
    # the best leaf, compared lexicographically.  A subtree with certified
    # value lower bound lo cannot contain a leaf whose key beats
    # (max(0, ceil(lo * 2^p) - 1), lo), so it is skipped when that bound is
    # already >= the incumbent key; skipped leaves therefore satisfy
    # int(leaf) >= best_int, which is exactly the <=_p completeness contract.
    #
    # All interval endpoints are dyadic and kept as plain integers at an
    # explicit scale; nothing here normalizes a fraction.
    lengths = _leaf_lengths(f.domain_desc, prec)
    nleaves = len(lengths)
    prefixes: list[list[int]] = [[] for _ in range(nleaves)]
    nums: list[int] = [0] * nleaves  # prefix value numerator at scale len(prefix)
    guard = p + BNB_VALUE_GUARD
    if stats is None:
        stats = {}
    stats.setdefault("nodes", 0)
    stats.setdefault("bound_calls", 0)
    stats.setdefault("deep_evals", 0)

    best_int: int | None = None
    best_upper_num = 1 << (guard + 1)  # upper bound numerator at scale `guard`
    best_witness: STypeValue | None = None
    best_value: UReal | None = None

    def box_for(leaf: int) -> Box:
        box: Box = []
        for j in range(nleaves):
            s = len(prefixes[j])
            if j < leaf:
                box.append((nums[j], nums[j], s))
            elif j == leaf:
                box.append((nums[j] - 1, nums[j] + 1, s))
            else:
                box.append((-1, 1, 0))
        return box

    def evaluate_leafpoint() -> None:
        nonlocal best_int, best_upper_num, best_witness, best_value
        budget.charge()
        if f.fast_prefix is not None:
            digit_lists = [[_DIGIT_OF_INDEX[i] for i in pre] for pre in prefixes]
            out = f.fast_prefix(digit_lists, p)
            prefix_int = 0
            for d in out:
                prefix_int = 2 * prefix_int + d
            if best_int is not None and prefix_int > best_int:
                return
            stats["deep_evals"] += 1
            out = f.fast_prefix(digit_lists, guard)
            total = 0
            for d in out:
                total = 2 * total + d
            upper_num = total + 1
            if best_int is None or (prefix_int, upper_num) < (best_int, best_upper_num):
                best_int, best_upper_num = prefix_int, upper_num
                best_witness, _ = _assemble(f.domain_desc, prefixes)
                best_value = None
            return
        witness, _ = _assemble(f.domain_desc, prefixes)
        val = f.apply(witness)
        prefix_int = _prefix_int(val, p)
        if best_int is not None and prefix_int > best_int:
            return
        stats["deep_evals"] += 1
        upper_num = eval_prefix(val, guard).numerator * (2**guard // eval_prefix(val, guard).denominator) + 1
        if best_int is None or (prefix_int, upper_num) < (best_int, best_upper_num):
            best_int, best_upper_num = prefix_int, upper_num
            best_witness, best_value = witness, val

    def prunable(lo_num: int, lo_scale: int) -> bool:
        # int_floor = max(0, ceil(lo * 2^p) - 1); compare (int_floor, lo)
        # against (best_int, best_upper) without leaving the integers.
        if best_int is None:
            return False
        if lo_num <= 0:
            int_floor = 0
            lo_nonneg = 0
        else:
            shift = lo_scale - p
            if shift >= 0:
                int_floor = max(0, -((-lo_num) >> shift) - 1)
            else:
                int_floor = max(0, (lo_num << -shift) - 1)
            lo_nonneg = lo_num
        if int_floor != best_int:
            return int_floor > best_int
        # equal prefix-int floor: compare lo against best_upper at scale guard
        if lo_scale <= guard:
            return (lo_nonneg << (guard - lo_scale)) >= best_upper_num
        return lo_nonneg >= (best_upper_num << (lo_scale - guard))

    def descend(leaf: int) -> None:
        if leaf == nleaves:
            evaluate_leafpoint()
            return
        if len(prefixes[leaf]) == lengths[leaf]:
            descend(leaf + 1)
            return
        stats["nodes"] += 1
        for idx, digit in ((0, 0), (1, 1), (2, -1)):
            prefixes[leaf].append(idx)
            old = nums[leaf]
            nums[leaf] = 2 * old + digit
            stats["bound_calls"] += 1
            lo_num, lo_scale = f.interval_bound(box_for(leaf))
            if not prunable(lo_num, lo_scale):
                descend(leaf)
            prefixes[leaf].pop()
            nums[leaf] = old

    descend(0)
    assert best_witness is not None
    if best_value is None:
        best_value = f.apply(best_witness)
    return best_witness, best_value

"""Models, oracles, losses, distortions, and the convergence-guaranteed
regressors.

A regression problem is: given a parameterised model and a (possibly
distorted) oracle, find a parameter whose loss against the oracle is below
a target.  The regressors here are searchers over the parameter space, so
they stop at the first acceptable parameter in scan order; the theorems
they realize guarantee a witness exists whenever the distorted oracle is
itself within the target of the true one.  Callers must always run
`validate` on the result; "no witness" is an answer, not an error.

The least-squares style loss works on signed-digit streams: half-difference
via midpoint and negation (so identical streams cancel digit by digit and
the loss vanishes exactly), squared, averaged over the sample points with a
balanced midpoint tree, then positively truncated into the unit interval.
Truncation acts on digit representations, which makes the loss a function
on codes rather than a realiser; it is continuous and vanishing, which is
all the theory requires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence as SequenceABC

from .optimize import Box, min_loss_parameter
from .reals import (
    I_DESC,
    IReal,
    MULTIPLY_LOOKAHEAD,
    UReal,
    eval_prefix,
    i_zero,
    ireal_to_value,
    midpoint,
    multiply,
    negate,
    to_unit,
    truncate,
    u_lt,
    u_leq,
    value_to_ireal,
)
from .reals import DomainError
from .searcher import Budget, BudgetError, search
from .stype import (
    ContinuousPredicate,
    Finite,
    FinVal,
    PairPrec,
    PairVal,
    Precision,
    Product,
    SeqPrec,
    STypeDescriptor,
    STypeValue,
    UNIT,
    class_count,
    enumerate_representatives,
    eq_with_precision,
)


@dataclass(frozen=True)
class OracleFunction:
    """A deterministic map between searchable types; the thing regression
    tries to recover."""

    domain_desc: STypeDescriptor
    codomain_desc: STypeDescriptor
    apply: Callable[[STypeValue], STypeValue]
    modulus_for: Optional[Callable[[Precision], Precision]] = None


@dataclass(frozen=True)
class Model:
    """A parameterised family of oracle functions.

    `weak_modulus_for(p)` is the parameter precision under which instantiated
    functions agree pointwise at output precision p.
    """

    param_desc: STypeDescriptor
    instantiate: Callable[[STypeValue], OracleFunction]
    weak_modulus_for: Callable[[Precision], Precision]


@dataclass(frozen=True)
class LossFunction:
    """Continuous, vanishing-on-the-diagonal disagreement measure into [0,1].

    `modulus_for(p)` is the precision on the oracles' *outputs* under which
    the loss value is pinned at precision p.
    """

    apply: Callable[[OracleFunction, OracleFunction], UReal]
    modulus_for: Callable[[int], Precision]


@dataclass(frozen=True)
class Distortion:
    """A transformation of oracles, modelling noise or model mismatch."""

    apply: Callable[[OracleFunction], OracleFunction]
    modulus_for: Optional[Callable[[Precision], Precision]] = None


@dataclass(frozen=True)
class RegressionProblem:
    model: Model
    oracle: OracleFunction
    loss: LossFunction
    epsilon: UReal
    precision: int
    sample_points: SequenceABC[STypeValue] = ()


def identity_distortion() -> Distortion:
    return Distortion(apply=lambda f: f, modulus_for=lambda p: p)


# ---------------------------------------------------------------------------
# Approximate function equality


def approx_equal_functions(
    f: OracleFunction,
    g: OracleFunction,
    q: Precision,
    domain_modulus: Precision,
    budget: Budget | None = None,
) -> bool:
    """Decide pointwise equality at output precision q by checking one
    representative of every domain_modulus class.

    Sound when domain_modulus bounds both functions' input sensitivity at
    output precision q; that continuity is what makes finitely many
    representatives enough.
    """
    if budget is None:
        budget = Budget()
    n = class_count(f.domain_desc, domain_modulus)
    if n > budget.limit - budget.spent:
        raise BudgetError(budget.limit)
    for x in enumerate_representatives(f.domain_desc, domain_modulus):
        budget.charge()
        if not eq_with_precision(f.codomain_desc, f.apply(x), g.apply(x), q):
            return False
    return True


# ---------------------------------------------------------------------------
# Least-squares style loss

# Output digits demanded of the oracles per loss output digit, beyond the
# averaging tree depth: one midpoint for the half-difference plus the
# multiplication lookahead for the square.
LOSS_MODULUS_SLACK = 1 + MULTIPLY_LOOKAHEAD


def _tree_depth(n: int) -> int:
    return max(0, math.ceil(math.log2(n))) if n > 1 else 0


def average_tree(streams: list[IReal]) -> IReal:
    """Balanced midpoint average; pads to a power of two with zeros, so the
    result denotes sum(s_i) / 2^depth."""
    if not streams:
        raise DomainError("cannot average zero streams")
    level = list(streams)
    while len(level) > 1:
        if len(level) % 2:
            level.append(i_zero())
        level = [midpoint(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def least_squares_loss(sample_points: SequenceABC[IReal]) -> LossFunction:
    """Loss comparing two oracles on fixed sample points.

    Per point: half-difference d = (f(x) - g(x)) / 2 via midpoint and
    negation, squared exactly, then balanced-averaged and truncated into
    [0, 1].  Vanishes digit-for-digit when f and g produce identical
    streams.
    """
    if not sample_points:
        raise DomainError("least-squares loss needs at least one sample point")
    xs = [ireal_to_value(x) for x in sample_points]
    depth = _tree_depth(len(xs))

    def apply(f: OracleFunction, g: OracleFunction) -> UReal:
        squares = []
        for xv in xs:
            d = midpoint(value_to_ireal(f.apply(xv)), negate(value_to_ireal(g.apply(xv))))
            squares.append(multiply(d, d))
        return truncate(average_tree(squares))

    def modulus_for(p: int) -> Precision:
        return SeqPrec(p + depth + LOSS_MODULUS_SLACK, UNIT)

    return LossFunction(apply=apply, modulus_for=modulus_for)


# ---------------------------------------------------------------------------
# Regressors


def _loss_predicate(problem: RegressionProblem, distorted: OracleFunction) -> ContinuousPredicate:
    loss, model, p = problem.loss, problem.model, problem.precision

    def decide(k: STypeValue) -> bool:
        return u_lt(loss.apply(distorted, model.instantiate(k)), problem.epsilon, p)

    return ContinuousPredicate(decide=decide, modulus=model.weak_modulus_for(loss.modulus_for(p)))


def regress_imperfect(
    problem: RegressionProblem,
    distorted_oracle: OracleFunction,
    budget: Budget | None = None,
) -> STypeValue:
    """Search the parameter space for loss(distorted, model(k)) < epsilon.

    Returns the searcher's witness whether or not it satisfies the
    predicate; run `validate` on the result.  If the distorted oracle is
    within epsilon of a representable instantiation, the witness satisfies
    the predicate.
    """
    result = search(problem.model.param_desc, _loss_predicate(problem, distorted_oracle), budget)
    return result.witness


def regress_exact(
    problem: RegressionProblem,
    distorted_oracle: OracleFunction,
    q: Precision,
    domain_modulus: Precision,
    budget: Budget | None = None,
) -> STypeValue:
    """Search for a parameter whose instantiation equals the distorted
    oracle pointwise at output precision q."""
    if budget is None:
        budget = Budget()
    model = problem.model

    def decide(k: STypeValue) -> bool:
        return approx_equal_functions(distorted_oracle, model.instantiate(k), q, domain_modulus, budget)

    pred = ContinuousPredicate(decide=decide, modulus=model.weak_modulus_for(q))
    return search(model.param_desc, pred, budget).witness


def validate(
    loss: LossFunction,
    distorted_oracle: OracleFunction,
    candidate: OracleFunction,
    epsilon: UReal,
    p: int,
) -> bool:
    """The separate post-regression check: loss(distorted, candidate) <_p epsilon."""
    return u_lt(loss.apply(distorted_oracle, candidate), epsilon, p)


# ---------------------------------------------------------------------------
# Piecewise-constant interpolation: oracles from data


def piecewise_constant_oracle(
    points: SequenceABC[tuple[IReal, IReal]],
    p: int,
) -> OracleFunction:
    """A step-function oracle through sorted (x, y) data.

    Cases are tested top to bottom against the midpoints of consecutive
    sample abscissae, using the precision-p order on unit-embedded streams;
    an input indistinguishable from a boundary takes the left segment.  The
    value past the last boundary is the last sample's ordinate, so the
    oracle is total and deterministic.
    """
    pts = list(points)
    if not pts:
        fallback = ireal_to_value(i_zero())
        return OracleFunction(
            domain_desc=I_DESC,
            codomain_desc=I_DESC,
            apply=lambda _x: fallback,
            modulus_for=lambda _q: SeqPrec(0, UNIT),
        )
    approx = [eval_prefix(x, p + 2) for x, _ in pts]
    if any(a > b for a, b in zip(approx, approx[1:])):
        raise DomainError("interpolation points must be sorted by x")
    boundaries = [
        to_unit(midpoint(pts[i][0], pts[i + 1][0])) for i in range(len(pts) - 1)
    ]
    ys = [ireal_to_value(y) for _, y in pts]

    def apply(xv: STypeValue) -> STypeValue:
        embedded = to_unit(value_to_ireal(xv))
        for boundary, y in zip(boundaries, ys):
            if u_leq(embedded, boundary, p):
                return y
        return ys[-1]

    # The case tests read p digits of the embedding, hence p + 1 digits of
    # the input, independent of the output precision demanded.
    return OracleFunction(
        domain_desc=I_DESC,
        codomain_desc=I_DESC,
        apply=apply,
        modulus_for=lambda _q: SeqPrec(p + 1, UNIT),
    )


def offline_regress(
    model: Model,
    points: SequenceABC[tuple[IReal, IReal]],
    epsilon: UReal,
    p: int,
    budget: Budget | None = None,
) -> STypeValue:
    """Regression from data: interpolate the points into a synthetic
    distorted oracle, build the least-squares loss at the same abscissae,
    and regress against it."""
    pts = list(points)
    distorted = piecewise_constant_oracle(pts, p)
    loss = least_squares_loss([x for x, _ in pts])
    problem = RegressionProblem(
        model=model,
        oracle=distorted,
        loss=loss,
        epsilon=epsilon,
        precision=p,
        sample_points=[ireal_to_value(x) for x, _ in pts],
    )
    return regress_imperfect(problem, distorted, budget)


# ---------------------------------------------------------------------------
# Equation solving as degenerate regression


def solve_system(program, p: int, budget: Budget | None = None, stats: dict | None = None) -> tuple[IReal, ...]:
    """Solve a system of residual expressions over [-1, 1] variables.

    Degenerate regression: the model instantiates each variable assignment
    to the constant tuple of residual values, the oracle is the constant
    zero tuple, and the loss is the truncated balanced average of the
    squared residuals.  Returns one stream per declared variable; callers
    should check the residual loss, since a point is returned whether or
    not a root exists.
    """
    from . import expr as expr_mod
    from . import kernels

    if budget is None:
        budget = Budget()
    nvars = len(program.variables)
    ncomp = len(program.components)
    if nvars < 1 or ncomp < 1:
        raise DomainError("system needs at least one variable and one component")

    param_desc = _nested_product([I_DESC] * nvars)
    codomain = _nested_product([I_DESC] * ncomp)
    depth = _tree_depth(ncomp)

    def instantiate(k: STypeValue) -> OracleFunction:
        env = dict(zip(program.variables, _unpack_ireals(param_desc, k)))
        outs = [ireal_to_value(r) for r in expr_mod.evaluate(program, env)]
        const = _pack_values(codomain, outs)
        return OracleFunction(
            domain_desc=Finite(1),
            codomain_desc=codomain,
            apply=lambda _x: const,
        )

    def weak_modulus_for(q: Precision) -> Precision:
        lengths = _unpack_seq_lengths(codomain, q)
        need: dict[str, int] = {v: 0 for v in program.variables}
        for comp, n in zip(program.components, lengths):
            for var, m in expr_mod.expr_modulus(comp, n).items():
                need[var] = max(need[var], m)
        return _nested_pair_prec([SeqPrec(need[v], UNIT) for v in program.variables])

    model = Model(param_desc=param_desc, instantiate=instantiate, weak_modulus_for=weak_modulus_for)

    def loss_apply(_f: OracleFunction, g: OracleFunction) -> UReal:
        outs = _unpack_ireals(codomain, g.apply(FinVal(0, 1)))
        return truncate(average_tree([multiply(r, r) for r in outs]))

    loss = LossFunction(
        apply=loss_apply,
        modulus_for=lambda q: _nested_pair_prec(
            [SeqPrec(q + depth + MULTIPLY_LOOKAHEAD, UNIT)] * ncomp
        ),
    )

    zero_oracle = OracleFunction(
        domain_desc=Finite(1),
        codomain_desc=codomain,
        apply=lambda _x: _pack_values(codomain, [ireal_to_value(i_zero())] * ncomp),
    )

    interval_bound = expr_mod.residual_loss_bound(program, depth)

    def fast_prefix(digit_lists: list[list[int]], n: int) -> list[int]:
        env = dict(zip(program.variables, digit_lists))
        return kernels.residual_loss_prefix(program, env, n)

    k = min_loss_parameter(
        model, zero_oracle, loss, p, budget,
        interval_bound=interval_bound, fast_prefix=fast_prefix, stats=stats,
    )
    return tuple(_unpack_ireals(param_desc, k))


def _nested_product(descs: list[STypeDescriptor]) -> STypeDescriptor:
    if len(descs) == 1:
        return descs[0]
    return Product(descs[0], _nested_product(descs[1:]))


def _nested_pair_prec(precs: list[Precision]) -> Precision:
    if len(precs) == 1:
        return precs[0]
    return PairPrec(precs[0], _nested_pair_prec(precs[1:]))


def _unpack_ireals(desc: STypeDescriptor, value: STypeValue) -> list[IReal]:
    if isinstance(desc, Product):
        return [value_to_ireal(value.first)] + _unpack_ireals(desc.right, value.second)
    return [value_to_ireal(value)]


def _unpack_seq_lengths(desc: STypeDescriptor, p: Precision) -> list[int]:
    if isinstance(desc, Product):
        return [p.first.length] + _unpack_seq_lengths(desc.right, p.second)
    return [p.length]


def _pack_values(desc: STypeDescriptor, values: list[STypeValue]) -> STypeValue:
    if isinstance(desc, Product):
        return PairVal(values[0], _pack_values(desc.right, values[1:]))
    return values[0]

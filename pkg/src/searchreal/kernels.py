"""Eager digit-list kernels for grid points.

Candidates visited by searches are always a finite digit prefix followed by
the constant zero tail, so their arithmetic can be run eagerly on plain
integer lists instead of lazy streams.  Each kernel reproduces the stream
recurrences exactly and is tested digit-for-digit against them; extending
inputs with zeros is exact, not an approximation, because the true tails
are zeros.

Every function takes the desired output length and reads only the input
prefix the corresponding stream operation would read.
"""

from __future__ import annotations

from fractions import Fraction

from .reals import MULTIPLY_LOOKAHEAD, i_from_fraction


def extend(xs: list[int], n: int) -> list[int]:
    """The list grown to at least n entries with the exact zero tail."""
    if len(xs) >= n:
        return xs
    return xs + [0] * (n - len(xs))


def mid_list(a: list[int], b: list[int], n: int) -> list[int]:
    """First n digits of the midpoint; reads n + 1 digits of each input."""
    if n <= 0:
        return []
    a = extend(a, n + 1)
    b = extend(b, n + 1)
    out = []
    carry = a[0] + b[0]
    for j in range(1, n + 1):
        m = 2 * carry + a[j] + b[j]
        if m <= -2:
            digit = -1
        elif m <= 1:
            digit = 0
        else:
            digit = 1
        carry = m - 4 * digit
        out.append(digit)
    return out


def neg_list(a: list[int], n: int) -> list[int]:
    return [-d for d in extend(a, n)[:n]]


def halve_list(a: list[int], n: int) -> list[int]:
    return extend([0] + list(a), n)[:n]


def trunc_list(a: list[int], n: int) -> list[int]:
    return [max(d, 0) for d in extend(a, n)[:n]]


def _scaled(d: int, xs: list[int]) -> list[int]:
    if d == 0:
        return [0] * len(xs)
    if d == 1:
        return xs
    return [-v for v in xs]


def _cross_list(xs: list[int], ys: list[int], n: int) -> list[int]:
    if n <= 0:
        return []
    xs = extend(xs, n + 4)
    ys = extend(ys, n + 4)
    xt, yt = xs[2:], ys[2:]
    cross1 = [xs[0] * ys[1]] + mid_list(_scaled(ys[1], xt), _scaled(xs[1], yt), n)
    cross2 = mid_list(_scaled(ys[0], xt), _scaled(xs[0], yt), n + 1)
    return mid_list(cross1, cross2, n)


def _heads_list(xs: list[int], ys: list[int], n: int) -> list[int]:
    if n <= 0:
        return []
    xs = extend(xs, 2)
    ys = extend(ys, 2)
    lead = [xs[0] * ys[0], xs[1] * ys[0], xs[1] * ys[1]][:n]
    if n <= 3:
        return lead
    xt, yt = xs[2:], ys[2:]
    rest = mid_list(_cross_list(xt, yt, n - 2), _heads_list(xt, yt, n - 2), n - 3)
    return lead + rest


def mul_list(xs: list[int], ys: list[int], n: int) -> list[int]:
    """First n digits of the product; reads n + 5 digits of each factor."""
    if n <= 0:
        return []
    return mid_list(_cross_list(xs, ys, n + 1), _heads_list(xs, ys, n + 1), n)


def _tree_levels(count: int) -> int:
    levels = 0
    while count > 1:
        count = (count + 1) // 2
        levels += 1
    return levels


def avg_tree_list(items: list[list[int]], n: int) -> list[int]:
    """Balanced midpoint average over digit lists: sum / 2^levels."""
    if not items:
        raise ValueError("cannot average zero streams")
    level = list(items)
    need = n + _tree_levels(len(level))
    while len(level) > 1:
        need -= 1
        if len(level) % 2:
            level.append([])
        level = [mid_list(level[i], level[i + 1], need) for i in range(0, len(level), 2)]
    return extend(level[0], n)[:n]


_LIT_CACHE: dict[tuple[int, int], list[int]] = {}


def literal_digits(num: int, den: int, n: int) -> list[int]:
    key = (num, den)
    got = _LIT_CACHE.get(key)
    if got is None or len(got) < n:
        got = i_from_fraction(Fraction(num, den)).prefix(max(n, 32))
        _LIT_CACHE[key] = got
    return got[:n]


def prefix_value(digits: list[int]) -> Fraction:
    total = 0
    for d in digits:
        total = 2 * total + d
    return Fraction(total, 2 ** len(digits)) if digits else Fraction(0)


def eval_expr_list(e, env: dict[str, list[int]], n: int, memo: dict | None = None) -> list[int]:
    """Digit-prefix evaluation of an expression over digit-list bindings.

    Identical digits to evaluating on streams built from the same prefixes
    with zero tails.
    """
    from . import expr as expr_mod

    if memo is None:
        memo = {}
    key = (id(e), n)
    got = memo.get(key)
    if got is not None:
        return got

    match e:
        case expr_mod.RationalLit(num=num, den=den):
            out = literal_digits(num, den, n)
        case expr_mod.Var(name=name):
            out = extend(env[name], n)[:n]
        case expr_mod.Mid(left=a, right=b):
            out = mid_list(
                eval_expr_list(a, env, n + 1, memo), eval_expr_list(b, env, n + 1, memo), n
            )
        case expr_mod.Mul(left=a, right=b):
            out = mul_list(
                eval_expr_list(a, env, n + MULTIPLY_LOOKAHEAD, memo),
                eval_expr_list(b, env, n + MULTIPLY_LOOKAHEAD, memo),
                n,
            )
        case expr_mod.Neg(arg=a):
            out = neg_list(eval_expr_list(a, env, n, memo), n)
        case expr_mod.Halve(arg=a):
            out = halve_list(eval_expr_list(a, env, max(n - 1, 0), memo), n)
        case expr_mod.Pow(base=a, exponent=k):
            out = _pow_list(a, k, env, n, memo)
        case _:
            raise TypeError(f"not an expression: {e!r}")
    memo[key] = out
    return out


def _pow_list(a, k: int, env, n: int, memo) -> list[int]:
    # Right-nested repeated multiplication, matching the stream evaluator.
    if k == 1:
        return eval_expr_list(a, env, n, memo)
    base = eval_expr_list(a, env, n + MULTIPLY_LOOKAHEAD, memo)
    inner = _pow_list(a, k - 1, env, n + MULTIPLY_LOOKAHEAD, memo)
    return mul_list(base, inner, n)


def residual_loss_prefix(prog, env: dict[str, list[int]], n: int) -> list[int]:
    """First n digits of the truncated balanced average of the squared
    residual components, matching the stream pipeline digit for digit."""
    levels = _tree_levels(len(prog.components))
    memo: dict = {}
    comp_len = n + levels
    squares = []
    for comp in prog.components:
        r = eval_expr_list(comp, env, comp_len + MULTIPLY_LOOKAHEAD, memo)
        squares.append(mul_list(r, r, comp_len))
    return trunc_list(avg_tree_list(squares, n), n)

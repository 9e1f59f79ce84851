"""Exact Lucas/Fibonacci sequences of O_D, Pell membership, r1-convolution.

L_D(n) = Tr(eps^n) and F_D(n) = Tr(eps^n / sqrt(q)) are integers for every
n >= 1; with eps = (x + y sqrt(D))/2^(0 or 1) the trace divided by sqrt(q)
collapses to the y-coordinate of eps^n in both integral-basis shapes, so
F_D(n) needs no floating arithmetic at all.  Both sequences satisfy
x(n+1) = L_D(1) x(n) + x(n-1), the norm -1 form of the recurrence.
"""

from __future__ import annotations

from .arith import is_square, r1
from .errors import DomainError
from .qfield import FieldContext
from .special import CNum, as_cnum, exp, log

_TABLE_CACHE: dict[tuple[int, str], "SeqTable"] = {}


class SeqTable:
    """Cached 1-indexed table of L_D(n) or F_D(n), grown by the recurrence.

    Seeds come from exact QuadInt powering; growth appends via
    x(n+1) = L_D(1) x(n) + x(n-1).  Extension is append-only, so shared
    readers always see a consistent prefix.
    """

    def __init__(self, ctx: FieldContext, kind: str):
        if kind not in ("lucas", "fibonacci"):
            raise DomainError(f"kind must be lucas or fibonacci, got {kind!r}")
        self.D = ctx.D
        self.kind = kind
        e1 = ctx.eps
        e2 = e1 * e1
        if kind == "lucas":
            self.values = [e1.trace(), e2.trace()]
        else:
            self.values = [e1.y, e2.y]
        self._l1 = e1.trace()

    def extend_to(self, n: int) -> None:
        while len(self.values) < n:
            self.values.append(self._l1 * self.values[-1] + self.values[-2])

    def value(self, n: int) -> int:
        if n < 1:
            raise DomainError(f"sequence index must be >= 1, got {n}")
        self.extend_to(n)
        return self.values[n - 1]


def _table(ctx: FieldContext, kind: str) -> SeqTable:
    key = (ctx.D, kind)
    tab = _TABLE_CACHE.get(key)
    if tab is None:
        tab = SeqTable(ctx, kind)
        _TABLE_CACHE[key] = tab
    return tab


def lucas(ctx: FieldContext, n: int) -> int:
    """L_D(n) = Tr(eps^n), exactly."""
    return _table(ctx, "lucas").value(n)


def fibonacci(ctx: FieldContext, n: int) -> int:
    """F_D(n) = Tr(eps^n / sqrt(q)), exactly.  F_5 is the classical sequence."""
    return _table(ctx, "fibonacci").value(n)


def lucas_direct(ctx: FieldContext, n: int) -> int:
    """L_D(n) by binary powering of the exact unit (recurrence-free path)."""
    if n < 1:
        raise DomainError(f"sequence index must be >= 1, got {n}")
    return (ctx.eps ** n).trace()


def fibonacci_direct(ctx: FieldContext, n: int) -> int:
    """F_D(n) by binary powering of the exact unit (recurrence-free path)."""
    if n < 1:
        raise DomainError(f"sequence index must be >= 1, got {n}")
    return (ctx.eps ** n).y


def is_odd_indexed_fib(ctx: FieldContext, n: int) -> bool:
    """True iff n = F_D(2k-1) for some k: q n^2 - 4 is a perfect square."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return is_square(ctx.q * n * n - 4)


def is_even_indexed_fib(ctx: FieldContext, n: int) -> bool:
    """True iff n = F_D(2k) for some k: q n^2 + 4 is a perfect square."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return is_square(ctx.q * n * n + 4)


def convolution_partial_sum(ctx: FieldContext, s, N: int, parity: str) -> CNum:
    """(1/4) sum_{n<=N} r1(n) r1(D n -+ ell) n^(-s/2), - for odd, + for even.

    This is the square-counting form of the zeta series: r1(n) vanishes off
    perfect squares, so only n = j^2 contribute and the sweep costs
    O(sqrt(N)) exact square tests.
    """
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be odd or even, got {parity!r}")
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    sign = -1 if parity == "odd" else 1
    sc = as_cnum(s, max(getattr(s, "precision", 0), ctx.precision))
    prec = sc.precision
    total = CNum(0, precision=prec)
    j = 1
    while j * j <= N:
        n = j * j
        weight = 2 * r1(ctx.D * n + sign * ctx.ell)  # r1(n) = 2 for n = j^2 >= 1
        if weight:
            n_pow = exp(log(CNum(n, precision=prec)) * (sc / (-2)))
            total = total + (weight * n_pow)
        j += 1
    return total / 4

import pytest
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from fibzeta.errors import DomainError
from fibzeta.sequences import (
    convolution_partial_sum,
    fibonacci,
    fibonacci_direct,
    is_even_indexed_fib,
    is_odd_indexed_fib,
    lucas,
    lucas_direct,
)

FIB_5 = [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
LUC_5 = [1, 3, 4, 7, 11, 18, 29, 47, 76, 123]
FIB_2 = [1, 2, 5, 12, 29, 70, 169, 408]          # Pell numbers
LUC_2 = [2, 6, 14, 34, 82, 198, 478, 1154]       # companion Pell


def test_frozen_sequences(ctx5, ctx2):
    assert [fibonacci(ctx5, n) for n in range(1, 11)] == FIB_5
    assert [lucas(ctx5, n) for n in range(1, 11)] == LUC_5
    assert [fibonacci(ctx2, n) for n in range(1, 9)] == FIB_2
    assert [lucas(ctx2, n) for n in range(1, 9)] == LUC_2


def test_direct_matches_table(contexts):
    for ctx in contexts:
        for n in (1, 2, 3, 17, 64, 201):
            assert fibonacci_direct(ctx, n) == fibonacci(ctx, n)
            assert lucas_direct(ctx, n) == lucas(ctx, n)


def test_index_validation(ctx5):
    for fn in (fibonacci, lucas, is_odd_indexed_fib, is_even_indexed_fib):
        with pytest.raises(DomainError):
            fn(ctx5, 0)


@settings(max_examples=40)
@given(st.integers(min_value=1, max_value=400))
def test_unit_power_coordinates(n):
    # closed recurrence vs exact unit powering, D = 13
    from fibzeta import make_context
    ctx = make_context(13, 128)
    u = ctx.eps ** n
    # eps^n = (L(n) + F(n) sqrt(q))/2 for q = D = 13
    assert u.x == lucas(ctx, n)
    assert u.y == fibonacci(ctx, n)


@settings(max_examples=40)
@given(st.integers(min_value=1, max_value=300))
def test_trace_norm_identity(n):
    # L(n)^2 - q F(n)^2 = 4 (-1)^n  (norm of eps^n is (-1)^n)
    from fibzeta import make_context
    for D in (5, 2):
        ctx = make_context(D, 128)
        l, f = lucas(ctx, n), fibonacci(ctx, n)
        assert l * l - ctx.q * f * f == 4 * (-1) ** n


@settings(max_examples=30)
@given(st.integers(min_value=1, max_value=150))
def test_index_doubling(n):
    # eps^(2n) = (eps^n)^2 gives F(2n) = F(n) L(n)
    from fibzeta import make_context
    ctx = make_context(5, 128)
    assert fibonacci(ctx, 2 * n) == fibonacci(ctx, n) * lucas(ctx, n)


def test_pell_sets_below_60(ctx5):
    odd = {n for n in range(1, 60) if is_odd_indexed_fib(ctx5, n)}
    even = {n for n in range(1, 60) if is_even_indexed_fib(ctx5, n)}
    assert odd == {1, 2, 5, 13, 34}
    assert even == {1, 3, 8, 21, 55}


def test_pell_predicates_match_enumeration(contexts):
    limit = 3000
    for ctx in contexts:
        odd_vals, even_vals = set(), set()
        n = 1
        while True:
            f = fibonacci(ctx, n)
            if f > limit:
                break
            (odd_vals if n % 2 else even_vals).add(f)
            n += 1
        for m in range(1, limit + 1):
            assert is_odd_indexed_fib(ctx, m) == (m in odd_vals)
            assert is_even_indexed_fib(ctx, m) == (m in even_vals)


def test_convolution_small_cases(ctx5):
    # N = 4 covers odd-indexed values 1 and 2: 1^-2 + 2^-2 = 1.25
    v = convolution_partial_sum(ctx5, 2, 4, "odd")
    assert v.imag == 0
    assert abs(v - mpfr("1.25")) < mpfr(2) ** -120
    assert abs(convolution_partial_sum(ctx5, 2, 0, "odd")) == 0


def test_convolution_matches_direct_partial(ctx5):
    # squares up to N = 2000 cover odd-indexed F values {1, 2, 5, 13, 34}
    import gmpy2
    from fibzeta import z_direct
    gctx = gmpy2.context(precision=140)
    s = 3
    conv = convolution_partial_sum(ctx5, s, 2000, "odd")
    partial = mpfr(0, 140)
    for f in (1, 2, 5, 13, 34):
        partial = gctx.add(partial, gctx.pow(mpfr(f, 140), -s))
    assert abs(conv - partial) < mpfr(2) ** -110
    # and the full series differs only by the tail beyond F = 89
    full = z_direct(ctx5, s, "odd", tol=1e-30).value
    gap = abs(full - conv)
    first_omitted = gctx.pow(mpfr(89, 140), -3)
    assert first_omitted < gap < 2 * first_omitted


def test_convolution_validation(ctx5):
    with pytest.raises(DomainError):
        convolution_partial_sum(ctx5, 2, -1, "odd")
    with pytest.raises(DomainError):
        convolution_partial_sum(ctx5, 2, 10, "both")

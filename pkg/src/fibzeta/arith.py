"""Exact integer utilities: squares, squarefree tests, divisors, Kronecker symbol.

Leaf dependencies of every other module.  All functions operate on Python
ints (arbitrary precision) and are pure.
"""

from __future__ import annotations

import math

from .errors import DomainError


def isqrt(n: int) -> int:
    """Floor of the square root of a nonnegative integer, exactly."""
    if n < 0:
        raise DomainError("isqrt requires n >= 0")
    return math.isqrt(n)


def is_square(n: int) -> bool:
    """True iff n is a perfect square (n >= 0)."""
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


def r1(n: int) -> int:
    """Number of integer square roots of n.

    r1(n) = #{x in Z : x^2 = n}: 2 for positive perfect squares, 1 at n = 0,
    0 otherwise.  This is the coefficient function of the theta-style series
    sum_x q^(x^2), which encodes square detection in the convolution form of
    the zeta series.
    """
    if n < 0:
        return 0
    if n == 0:
        return 1
    return 2 if is_square(n) else 0


def factorize(n: int) -> list[tuple[int, int]]:
    """Factor n >= 1 by trial division; returns [(p, e), ...] with p ascending.

    Deterministic and exact; fine at desk scale (n up to ~1e12).
    """
    if n < 1:
        raise DomainError("factorize requires n >= 1")
    pairs: list[tuple[int, int]] = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        pairs.append((m, 1))
    return pairs


def is_squarefree(n: int) -> bool:
    """True iff no prime square divides n.  Requires n > 1."""
    if n <= 1:
        raise DomainError("is_squarefree requires n > 1")
    return all(e == 1 for _, e in factorize(n))


def divisor_count(n: int) -> int:
    """Number of positive divisors d(n), n >= 1."""
    if n < 1:
        raise DomainError("divisor_count requires n >= 1")
    count = 1
    for _, e in factorize(n):
        count *= e + 1
    return count


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), the full extension of the Jacobi symbol.

    Conventions: (a/0) = 1 iff a = +-1 else 0; (a/-1) = -1 iff a < 0;
    (a/2) = 0 for even a, +1 for a = +-1 mod 8, -1 for a = +-3 mod 8.
    Completely multiplicative in both arguments.
    """
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -1
    # strip factors of 2 from n, applying the (a/2) rule per factor
    t = 0
    while n % 2 == 0:
        n //= 2
        t += 1
    if t:
        if a % 2 == 0:
            return 0
        if t % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # n now odd and positive: classical Jacobi loop with quadratic reciprocity
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0

"""Real quadratic field context: fundamental unit, class number, L(1, chi_q).

For squarefree D > 1 the ring of integers O_D has integral basis {1, omega}
with omega = (1 + sqrt(D))/2 when D = 1 mod 4 and omega = sqrt(D) otherwise.
QuadInt stores elements exactly; the fundamental unit comes from the periodic
continued fraction of omega; the class number from reduced indefinite binary
quadratic forms of discriminant q; L(1, chi_q) from the finite log-sine
closed form.  Everything here assumes nothing about norms except where
stated: make_context is the gate that enforces N(eps) = -1.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr

from .arith import divisor_count, is_squarefree, isqrt, kronecker
from .errors import DomainError, UnsupportedFieldError

# guard bits on top of the requested precision for regulator / L-value work
REAL_GUARD_BITS = 32


class QuadInt:
    """Element of O_D, stored exactly.

    Represents (x + y*sqrt(D))/2 with x = y (mod 2) when D = 1 mod 4, and
    x + y*sqrt(D) otherwise.  Immutable; arithmetic is exact.
    """

    __slots__ = ("D", "x", "y", "half")

    def __init__(self, D: int, x: int, y: int):
        self.D = D
        self.x = x
        self.y = y
        self.half = D % 4 == 1
        if self.half and (x - y) % 2 != 0:
            raise DomainError(f"(x + y*sqrt({D}))/2 needs x = y mod 2, got {x}, {y}")

    def norm(self) -> int:
        n = self.x * self.x - self.D * self.y * self.y
        return n // 4 if self.half else n

    def trace(self) -> int:
        return self.x if self.half else 2 * self.x

    def conjugate(self) -> "QuadInt":
        return QuadInt(self.D, self.x, -self.y)

    def __mul__(self, other: "QuadInt") -> "QuadInt":
        if not isinstance(other, QuadInt) or other.D != self.D:
            return NotImplemented
        x1, y1, x2, y2 = self.x, self.y, other.x, other.y
        if self.half:
            # ((x1 + y1 rD)/2)((x2 + y2 rD)/2): the half-integer parities
            # guarantee both divisions are exact
            return QuadInt(self.D, (x1 * x2 + self.D * y1 * y2) // 2,
                           (x1 * y2 + x2 * y1) // 2)
        return QuadInt(self.D, x1 * x2 + self.D * y1 * y2, x1 * y2 + x2 * y1)

    def __pow__(self, n: int) -> "QuadInt":
        if n < 0:
            raise DomainError("QuadInt powering requires n >= 0")
        result = QuadInt(self.D, 2, 0) if self.half else QuadInt(self.D, 1, 0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def embed(self, precision: int) -> mpfr:
        """Real embedding x -> x + y*sqrt(D) (over 2 if applicable)."""
        ctx = gmpy2.context(precision=precision)
        v = ctx.add(mpfr(self.x, precision),
                    ctx.mul(mpfr(self.y, precision),
                            ctx.sqrt(mpfr(self.D, precision))))
        return ctx.div(v, 2) if self.half else v

    def __eq__(self, other):
        return (isinstance(other, QuadInt) and self.D == other.D
                and self.x == other.x and self.y == other.y)

    def __hash__(self):
        return hash((self.D, self.x, self.y))

    def __repr__(self):
        if self.half:
            return f"({self.x}+{self.y}*sqrt({self.D}))/2"
        return f"{self.x}+{self.y}*sqrt({self.D})"

    def to_json_dict(self) -> dict:
        return {"x": str(self.x), "y": str(self.y),
                "denominator": "2" if self.half else "1"}


def fundamental_unit(D: int) -> QuadInt:
    """Fundamental unit eps > 1 of O_D via the continued fraction of omega.

    Runs the exact (P, Q) state machine for omega = (P0 + sqrt(D))/Q0 and
    forms convergents p_i/q_i; the first u_i = p_i - q_i*conj(omega) with
    |N(u_i)| = 1 is the fundamental unit (period end of the expansion).
    """
    if D <= 1 or not is_squarefree(D):
        raise DomainError(f"D must be squarefree and > 1, got {D}")
    a0 = isqrt(D)
    if D % 4 == 1:
        P, Q = 1, 2
    else:
        P, Q = 0, 1
    p_prev, p = 1, (P + a0) // Q
    q_prev, q = 0, 1
    # u_i in QuadInt coordinates: p - q*conj(omega)
    for _ in range(20 * D + 100):
        if D % 4 == 1:
            u = QuadInt(D, 2 * p - q, q)
        else:
            u = QuadInt(D, p, q)
        if abs(u.norm()) == 1:
            return u
        P = ((P + a0) // Q) * Q - P
        Q = (D - P * P) // Q
        a = (P + a0) // Q
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    raise RuntimeError(f"continued fraction period not found for D={D}")


def conductor(D: int) -> int:
    """q = D for D = 1 mod 4, else 4D (the field's fundamental discriminant)."""
    return D if D % 4 == 1 else 4 * D


def _reduced_forms(delta: int) -> list[tuple[int, int, int]]:
    """All reduced indefinite forms (a, b, c) of discriminant delta > 0.

    Reduced means 0 < b < sqrt(delta) and sqrt(delta) - b < 2|a| < sqrt(delta) + b,
    tested exactly via squared comparisons (delta is never a perfect square
    for field discriminants).
    """
    r0 = isqrt(delta)
    forms = []
    for b in range(2 - delta % 2, r0 + 1, 2):
        m4 = delta - b * b
        if m4 % 4 != 0:
            continue
        m = m4 // 4  # = -a*c > 0
        u = 1
        while u * u <= m:
            if m % u == 0:
                for aa in {u, m // u}:
                    # reduced test on |a| = aa: delta < (2aa+b)^2 and (2aa-b)^2 < delta
                    if (2 * aa + b) ** 2 > delta and (2 * aa - b) ** 2 < delta:
                        forms.append((aa, b, -(m // aa)))
                        forms.append((-aa, b, m // aa))
            u += 1
    return forms


def _rho(form: tuple[int, int, int], delta: int, r0: int) -> tuple[int, int, int]:
    """Reduction/cycle step on reduced indefinite forms."""
    _, b, c = form
    ac = abs(c)
    b2 = r0 - (r0 + b) % (2 * ac)
    c2 = (b2 * b2 - delta) // (4 * c)
    return (c, b2, c2)


def form_class_number(delta: int) -> int:
    """Number of classes of primitive indefinite forms of discriminant delta.

    Counts rho-cycles among the reduced forms.  For a fundamental
    discriminant this equals the narrow class number h+.
    """
    forms = _reduced_forms(delta)
    r0 = isqrt(delta)
    seen: set[tuple[int, int, int]] = set()
    cycles = 0
    for f in forms:
        if f in seen:
            continue
        cycles += 1
        g = f
        while g not in seen:
            seen.add(g)
            g = _rho(g, delta, r0)
    return cycles


def class_number(D: int) -> int:
    """Wide class number h(D) of Q(sqrt(D)), exactly.

    Computed as the number of rho-cycles of reduced forms of discriminant q
    (the narrow class number h+), divided by 2 when the fundamental unit has
    norm +1; under the norm -1 hypothesis enforced elsewhere, h = h+.
    """
    if D <= 1 or not is_squarefree(D):
        raise DomainError(f"D must be squarefree and > 1, got {D}")
    h_plus = form_class_number(conductor(D))
    if fundamental_unit(D).norm() == -1:
        return h_plus
    return h_plus // 2


def L1_direct(D: int, precision_bits: int) -> mpfr:
    """L(1, chi_q) by the finite closed form for even primitive characters.

    L(1, chi) = -(1/sqrt(q)) * sum_{a=1}^{q-1} chi(a) * log(sin(pi a / q)),
    with chi = (q/.) the Kronecker symbol.  Evaluated with guard bits and
    rounded to the requested precision.
    """
    if D <= 1 or not is_squarefree(D):
        raise DomainError(f"D must be squarefree and > 1, got {D}")
    q = conductor(D)
    wp = precision_bits + REAL_GUARD_BITS
    ctx = gmpy2.context(precision=wp)
    pi_q = ctx.div(gmpy2.const_pi(wp), q)
    total = mpfr(0, wp)
    for a in range(1, q):
        chi = kronecker(q, a)
        if chi == 0:
            continue
        term = ctx.log(ctx.sin(ctx.mul(pi_q, a)))
        total = ctx.add(total, ctx.mul(term, chi))
    # note: bare operators on mpfr round at the 53-bit global context, so
    # even the final negation must go through ctx
    val = ctx.div(ctx.sub(0, total), ctx.sqrt(mpfr(q, wp)))
    return mpfr(val, precision_bits)


@functools.lru_cache(maxsize=None)
def _regulator_cached(D: int, x: int, y: int, precision: int) -> mpfr:
    ctx = gmpy2.context(precision=precision)
    return ctx.log(QuadInt(D, x, y).embed(precision))


def regulator(eps: QuadInt, precision: int) -> mpfr:
    """log of the real embedding of eps, at the requested precision (cached)."""
    wp = precision + REAL_GUARD_BITS
    return mpfr(_regulator_cached(eps.D, eps.x, eps.y, wp), precision)


@dataclass(frozen=True)
class FieldContext:
    """Everything the continuation formulas consume about Q(sqrt(D)).

    Immutable; safe to share.  log_eps and L1_chi_q are stored at
    `precision` bits (computed with guard bits); eps is exact.
    """

    D: int
    q: int
    ell: int
    eps: QuadInt
    norm_eps: int
    log_eps: mpfr
    class_number: int
    divisor_count_D: int
    L1_chi_q: mpfr
    precision: int

    def log_eps_at(self, precision: int) -> mpfr:
        """Regulator recomputed from the exact unit at any precision."""
        return regulator(self.eps, precision)

    def to_json_dict(self) -> dict:
        return {
            "D": str(self.D),
            "q": str(self.q),
            "ell": str(self.ell),
            "eps": self.eps.to_json_dict(),
            "norm_eps": str(self.norm_eps),
            "log_eps": {"decimal": str(self.log_eps),
                        "precision_bits": self.precision},
            "class_number": str(self.class_number),
            "divisor_count_D": str(self.divisor_count_D),
            "L1_chi_q": {"decimal": str(self.L1_chi_q),
                         "precision_bits": self.precision},
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_json_dict(), indent=indent)


def make_context(D: int, precision_bits: int = 128) -> FieldContext:
    """Build the full FieldContext, enforcing the norm -1 hypothesis.

    Raises DomainError for non-squarefree D and UnsupportedFieldError when
    N(eps) = +1 (e.g. D = 3).  The stored L(1, chi_q) is the direct
    character-sum value, cross-checked against 2 h log(eps) / sqrt(q); a
    mismatch beyond 2^(-precision/2) indicates an internal inconsistency and
    raises RuntimeError.
    """
    if D <= 1 or not is_squarefree(D):
        raise DomainError(f"D must be squarefree and > 1, got {D}")
    eps = fundamental_unit(D)
    n_eps = eps.norm()
    if n_eps != -1:
        raise UnsupportedFieldError(
            f"N(eps) = +1 for D={D}; this field is outside the norm -1 hypothesis")
    q = conductor(D)
    ell = 4 * D // q
    log_eps = regulator(eps, precision_bits)
    h = class_number(D)
    l1 = L1_direct(D, precision_bits)

    wp = precision_bits + REAL_GUARD_BITS
    ctx = gmpy2.context(precision=wp)
    rhs = ctx.div(ctx.mul(regulator(eps, wp), 2 * h), ctx.sqrt(mpfr(q, wp)))
    if abs(ctx.sub(mpfr(l1, wp), rhs)) >= mpfr(2, wp) ** (-(precision_bits // 2)):
        raise RuntimeError(
            f"class number formula cross-check failed for D={D}: "
            f"L(1,chi)={l1} vs 2h*log(eps)/sqrt(q)={rhs}")

    return FieldContext(D=D, q=q, ell=ell, eps=eps, norm_eps=n_eps,
                        log_eps=log_eps, class_number=h,
                        divisor_count_D=divisor_count(D), L1_chi_q=l1,
                        precision=precision_bits)

"""Arbitrary-precision complex arithmetic and the gamma machinery.

CNum is a thin wrapper over gmpy2's mpc that pins every value to an explicit
binary precision; binary operations evaluate at the max of the operand
precisions, so precision never silently degrades mid-formula.

log_gamma implements the principal branch by recurrence-shifting Re z above a
Stirling threshold and applying the Stirling asymptotic series with exact
Bernoulli coefficients.  The error model is a documented heuristic bound
(guard bits + validated defect against a higher-precision self-reference),
not interval arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import DomainError, PoleError

_CTX_CACHE: dict[int, gmpy2.context] = {}

# guard bits used internally by log_gamma/gamma on top of the argument precision
GAMMA_GUARD_BITS = 64


def _ctx(precision: int) -> gmpy2.context:
    """Shared rounding context for a given precision."""
    ctx = _CTX_CACHE.get(precision)
    if ctx is None:
        if precision < 2:
            raise DomainError("precision must be >= 2 bits")
        ctx = gmpy2.context(precision=precision)
        _CTX_CACHE[precision] = ctx
    return ctx


class CNum:
    """Complex number carrying its working precision in bits."""

    __slots__ = ("val", "precision")

    def __init__(self, real, imag=None, precision: int | None = None):
        if precision is None:
            if isinstance(real, CNum):
                precision = real.precision
            elif isinstance(real, (mpfr, mpc)):
                p = real.precision
                precision = max(p) if isinstance(p, tuple) else p
            else:
                raise TypeError("precision required unless the input carries one")
        _ctx(precision)  # validates precision early
        if isinstance(real, CNum):
            real = real.val
        if imag is None:
            val = mpc(real, precision=precision)
        else:
            if isinstance(imag, CNum):
                imag = imag.val.real
            val = mpc(mpfr(real, precision), mpfr(imag, precision),
                      precision=precision)
        self.val = val
        self.precision = precision

    # -- accessors ---------------------------------------------------------

    @property
    def real(self) -> mpfr:
        return self.val.real

    @property
    def imag(self) -> mpfr:
        return self.val.imag

    def __complex__(self) -> complex:
        return complex(self.val)

    def conjugate(self) -> "CNum":
        # mpc.conjugate() rounds at the global context; rebuild explicitly
        ctx = _ctx(self.precision)
        return CNum(mpc(self.val.real, ctx.minus(self.val.imag),
                        precision=self.precision), precision=self.precision)

    def is_finite(self) -> bool:
        return gmpy2.is_finite(self.val)

    def to_precision(self, precision: int) -> "CNum":
        """Round (or zero-pad) to a new working precision."""
        return CNum(mpc(self.val, precision=precision), precision=precision)

    def to_json_dict(self) -> dict:
        return {"re": str(self.val.real), "im": str(self.val.imag),
                "precision_bits": self.precision}

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def _coerce(other):
        """Return (raw value, precision or 0 for exact operands)."""
        if isinstance(other, CNum):
            return other.val, other.precision
        if isinstance(other, int):
            return other, 0
        if isinstance(other, float):
            return other, 53
        if isinstance(other, mpfr):
            return other, other.precision
        if isinstance(other, mpc):
            return other, max(other.precision)
        return None, None

    def _bin(self, other, op, reverse=False):
        raw, p = self._coerce(other)
        if raw is None:
            return NotImplemented
        prec = max(self.precision, p)
        ctx = _ctx(prec)
        a, b = (raw, self.val) if reverse else (self.val, raw)
        return CNum(getattr(ctx, op)(a, b), precision=prec)

    def __add__(self, other):
        return self._bin(other, "add")

    __radd__ = __add__

    def __sub__(self, other):
        return self._bin(other, "sub")

    def __rsub__(self, other):
        return self._bin(other, "sub", reverse=True)

    def __mul__(self, other):
        return self._bin(other, "mul")

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._bin(other, "div")

    def __rtruediv__(self, other):
        return self._bin(other, "div", reverse=True)

    def __pow__(self, other):
        return self._bin(other, "pow")

    def __rpow__(self, other):
        return self._bin(other, "pow", reverse=True)

    def __neg__(self):
        # bare operators on mpc round at the global 53-bit context; negate
        # through the pinned context instead
        return CNum(_ctx(self.precision).sub(0, self.val),
                    precision=self.precision)

    def __abs__(self) -> mpfr:
        return _ctx(self.precision).abs(self.val)

    def __eq__(self, other):
        raw, _ = self._coerce(other)
        if raw is None:
            return NotImplemented
        return self.val == raw

    def __hash__(self):
        return hash(self.val)

    def __repr__(self):
        return f"CNum({str(self.val)!r}, precision={self.precision})"


def as_cnum(value, precision: int) -> CNum:
    """Coerce ints/floats/strings/mpfr/mpc/CNum to a CNum at the given precision."""
    if isinstance(value, CNum):
        return value if value.precision == precision else value.to_precision(precision)
    return CNum(value, precision=precision)


# -- elementary functions ---------------------------------------------------

def _unary(z: CNum, name: str) -> CNum:
    return CNum(getattr(_ctx(z.precision), name)(z.val), precision=z.precision)


def exp(z: CNum) -> CNum:
    return _unary(z, "exp")


def log(z: CNum) -> CNum:
    """Principal branch, Im in (-pi, pi]."""
    return _unary(z, "log")


def sqrt(z: CNum) -> CNum:
    return _unary(z, "sqrt")


def sin(z: CNum) -> CNum:
    return _unary(z, "sin")


def cos(z: CNum) -> CNum:
    return _unary(z, "cos")


def pi(precision: int) -> CNum:
    return CNum(gmpy2.const_pi(precision), precision=precision)


# -- Bernoulli numbers (exact) ----------------------------------------------

_BERNOULLI: list[Fraction] = [Fraction(1)]


def bernoulli(n: int) -> Fraction:
    """Exact Bernoulli number B_n (B_1 = -1/2 convention), cached."""
    if n < 0:
        raise DomainError("bernoulli requires n >= 0")
    while len(_BERNOULLI) <= n:
        m = len(_BERNOULLI)
        # B_m = -1/(m+1) * sum_{k<m} C(m+1, k) B_k
        acc = Fraction(0)
        for k in range(m):
            acc += math.comb(m + 1, k) * _BERNOULLI[k]
        _BERNOULLI.append(-acc / (m + 1))
    return _BERNOULLI[n]


# -- log Gamma ----------------------------------------------------------------

_STIRLING_COEFFS: dict[tuple[int, int], mpfr] = {}


def _stirling_coeff(j: int, wp: int) -> mpfr:
    """B_2j / (2j (2j-1)) at wp bits; cached, the big-int division is slow."""
    key = (j, wp)
    c = _STIRLING_COEFFS.get(key)
    if c is None:
        b = bernoulli(2 * j)
        c = _ctx(wp).div(b.numerator, b.denominator * (2 * j) * (2 * j - 1))
        _STIRLING_COEFFS[key] = c
    return c


def _nearest_nonpositive_int(z: CNum) -> int | None:
    """Nearest nonpositive integer if Re z is in its neighborhood, else None."""
    re = z.val.real
    if re > mpfr(0.5):
        return None
    ctx = _ctx(z.precision)
    k = int(ctx.floor(ctx.add(re, mpfr(0.5))))
    return k if k <= 0 else None


def _pole_check(z: CNum) -> None:
    k = _nearest_nonpositive_int(z)
    if k is None:
        return
    ctx = _ctx(z.precision)
    dre = ctx.sub(z.val.real, k)
    d2 = ctx.add(ctx.mul(dre, dre), ctx.mul(z.val.imag, z.val.imag))
    # threshold 2^(-precision/2) on the distance, i.e. 2^(-precision) squared
    if d2 < mpfr(2) ** (-z.precision):
        raise PoleError(f"log_gamma argument within 2^-{z.precision // 2} "
                        f"of the pole at {k}")


def log_gamma(z: CNum) -> CNum:
    """Principal branch of log Gamma(z).

    Strategy: raise Re z above the Stirling threshold 20 + wp/8 using
    log Gamma(z) = log Gamma(z+n) - sum_j log(z+j) with principal logs (this
    recurrence reproduces the standard branch), then apply the Stirling
    series with exact Bernoulli coefficients at wp = precision + 64 guard
    bits, rounding back to the argument's precision.
    """
    _pole_check(z)
    prec = z.precision
    wp = prec + GAMMA_GUARD_BITS
    ctx = _ctx(wp)
    w = mpc(z.val, precision=wp)

    threshold = 20 + wp / 8
    shift_total = mpc(0, precision=wp)
    re = w.real
    if re < threshold:
        n = int(math.ceil(threshold - float(re)))
        acc = mpc(0, precision=wp)
        for j in range(n):
            acc = ctx.add(acc, ctx.log(ctx.add(w, j)))
        shift_total = acc
        w = ctx.add(w, n)

    # Stirling: (w - 1/2) log w - w + log(2 pi)/2 + sum B_2j / (2j(2j-1) w^(2j-1))
    log_w = ctx.log(w)
    half = ctx.div(mpfr(1, wp), 2)
    result = ctx.sub(ctx.mul(ctx.sub(w, half), log_w), w)
    two_pi = ctx.mul(gmpy2.const_pi(wp), 2)
    result = ctx.add(result, ctx.div(ctx.log(two_pi), 2))

    w2_inv = ctx.div(1, ctx.mul(w, w))
    w_pow = ctx.div(1, w)  # w^-(2j-1), starting at j=1
    eps_stop = mpfr(2, wp) ** (-wp)
    j = 1
    prev_mag = None
    while True:
        term = ctx.mul(_stirling_coeff(j, wp), w_pow)
        result = ctx.add(result, term)
        mag = abs(term)
        if mag < eps_stop:
            break
        if prev_mag is not None and mag >= prev_mag:
            # asymptotic series started diverging; threshold keeps this
            # below target accuracy, stop at the smallest term
            break
        prev_mag = mag
        w_pow = ctx.mul(w_pow, w2_inv)
        j += 1

    result = ctx.sub(result, shift_total)
    return CNum(result, precision=wp).to_precision(prec)


def gamma(z: CNum) -> CNum:
    """Gamma(z) = exp(log_gamma(z)); same pole contract as log_gamma."""
    _pole_check(z)
    wp = z.precision + GAMMA_GUARD_BITS
    lg = log_gamma(as_cnum(z, wp))
    return exp(lg).to_precision(z.precision)


def rgamma(z: CNum) -> CNum:
    """1/Gamma(z), entire: vanishes at nonpositive integers, never raises.

    For Re z > 1/2 this is exp(-log Gamma(z)); otherwise the reflection
    1/Gamma(z) = Gamma(1-z) sin(pi z) / pi keeps every Gamma argument in
    the pole-free half plane.
    """
    if z.val.real > 0.5:
        return exp(-log_gamma(z))
    wp = z.precision + GAMMA_GUARD_BITS
    zw = as_cnum(z, wp)
    p = pi(wp)
    val = gamma(1 - zw) * sin(p * zw) / p
    return val.to_precision(z.precision)


def binom_rising(s, k: int, precision: int | None = None) -> CNum:
    """Generalized binomial coefficient C(s+k-1, k) = Gamma(s+k)/(Gamma(s) k!).

    Computed as the stable finite product prod_{j=0..k-1} (s+j)/(j+1); exact
    for integer s, poles of Gamma never enter.
    """
    if k < 0:
        raise DomainError("binom_rising requires k >= 0")
    if isinstance(s, CNum):
        sc = s
    elif precision is not None:
        sc = as_cnum(s, precision)
    else:
        raise TypeError("pass s as CNum or supply precision=")
    result = CNum(1, precision=sc.precision)
    for j in range(k):
        result = result * (sc + j) / (j + 1)
    return result

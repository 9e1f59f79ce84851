"""The three evaluators of Z_D^odd and Z_D^even, poles and residues.

Z_D^odd(s) = sum_{n>=1} F_D(2n-1)^(-s) and Z_D^even(s) = sum_{n>=1}
F_D(2n)^(-s) converge for Re s > 0.  Three independent routes are
implemented and cross-checked:

* z_direct: partial sums with a geometric tail bound (Re s > 0 only).
* z_binomial: the everywhere-convergent expansion obtained from the exact
  closed forms F_D(2n-1) = (eps^(2n-1) + eps^(1-2n))/sqrt(q) and
  F_D(2n) = (eps^(2n) - eps^(-2n))/sqrt(q) (both consequences of
  N(eps) = -1, since the conjugate of eps is -1/eps):

      Z_odd(s)  = q^(s/2) sum_{k>=0} (-1)^k C(s+k-1,k) / (eps^(s+2k) - eps^(-(s+2k)))
      Z_even(s) = q^(s/2) sum_{k>=0}        C(s+k-1,k) / (eps^(2(s+2k)) - 1)

  valid for all s off the pole lattice; this is the designated oracle.
* z_spectral: the Gamma-series continuation

      Z_odd(s)  = q^(s/2) / (8 Gamma(s) log eps)
                  * sum_{m in Z} (-1)^m Gamma(s/2 + i t_m) Gamma(s/2 - i t_m)
      Z_even(s) = q^(s/2) Gamma(1-s) / (4 log eps)
                  * sum_{m in Z} Gamma(s/2 - i t_m) / Gamma(1 - s/2 - i t_m)

  with t_m = pi m / (2 log eps); the even form is used only for Re s < 0.

Both functions continue meromorphically with simple poles exactly on the
lattice s = -2k + pi i m / log eps (k >= 0, m in Z).

Truncation control: the odd Gamma-series terms decay like
exp(-pi^2 m / (2 log eps)) and are summed adaptively.  The even series
terms decay only polynomially (the Gamma ratio behaves like
(tau m)^(s-1)), so after a central window |m| <= M the tail is evaluated
analytically: the ratio's asymptotic expansion Gamma(v+a)/Gamma(v+b) =
v^(a-b) (1 + sum_j C_j v^-j) with Bernoulli-polynomial coefficients turns
the tail into a short linear combination of Hurwitz zeta values
zeta(1+j-s, M+1), themselves computed by Euler-Maclaurin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, NearPoleError, NoConvergence
from .qfield import FieldContext
from .sequences import fibonacci
from .special import (
    CNum,
    as_cnum,
    bernoulli,
    cos,
    exp,
    gamma,
    log,
    log_gamma,
    pi,
    rgamma,
    sin,
)

# extra working bits on top of the context/argument precision
EVAL_GUARD_BITS = 64


# ---------------------------------------------------------------------------
# result and pole records
# ---------------------------------------------------------------------------

@dataclass
class EvalResult:
    """One zeta evaluation: value plus truncation metadata.

    tail_bound is the evaluator's bound on its own truncation error
    (absolute); terms_used counts summed terms.
    """

    value: CNum
    method: str
    terms_used: int
    tail_bound: mpfr
    nearest_pole_distance: mpfr

    def to_json_dict(self, D: int, s: CNum, parity: str) -> dict:
        return {
            "D": str(D),
            "s_re": str(s.real),
            "s_im": str(s.imag),
            "parity": parity,
            "method": self.method,
            "value_re": str(self.value.real),
            "value_im": str(self.value.imag),
            "tail_bound": str(self.tail_bound),
            "terms_used": self.terms_used,
        }


@dataclass(frozen=True)
class PoleSpec:
    """Lattice pole s = -2k + pi i m / log eps."""

    k: int
    m: int
    location: CNum

    def __eq__(self, other):
        return (isinstance(other, PoleSpec)
                and self.k == other.k and self.m == other.m)

    def __hash__(self):
        return hash((self.k, self.m))


def pole_location(ctx: FieldContext, k: int, m: int,
                  precision: int | None = None) -> CNum:
    """Exact-grid arithmetic for the pole at (k, m) at the given precision."""
    if k < 0:
        raise DomainError("pole index k must be >= 0")
    prec = precision or ctx.precision
    gctx = gmpy2.context(precision=prec)
    im = gctx.div(gctx.mul(gmpy2.const_pi(prec), m), ctx.log_eps_at(prec))
    return CNum(mpfr(-2 * k, prec), im, precision=prec)


def pole_spec(ctx: FieldContext, k: int, m: int,
              precision: int | None = None) -> PoleSpec:
    return PoleSpec(k=k, m=m, location=pole_location(ctx, k, m, precision))


def nearest_pole(ctx: FieldContext, s: CNum) -> tuple[PoleSpec, mpfr]:
    """Closest lattice pole to s and the distance, at s's precision."""
    prec = s.precision
    gctx = gmpy2.context(precision=prec)
    spacing = gctx.div(gmpy2.const_pi(prec), ctx.log_eps_at(prec))
    sigma, t = s.real, s.imag
    k_star = int(gctx.floor(gctx.add(gctx.div(sigma, -2), mpfr(0.5, prec))))
    m_star = int(gctx.floor(gctx.add(gctx.div(t, spacing), mpfr(0.5, prec))))
    best = None
    best_d2 = None
    for k in {max(0, k_star - 1), max(0, k_star), max(0, k_star + 1)}:
        for m in (m_star - 1, m_star, m_star + 1):
            dre = gctx.add(sigma, 2 * k)
            dim = gctx.sub(t, gctx.mul(spacing, m))
            d2 = gctx.add(gctx.mul(dre, dre), gctx.mul(dim, dim))
            if best_d2 is None or d2 < best_d2:
                best_d2 = d2
                best = (k, m)
    spec = pole_spec(ctx, best[0], best[1], prec)
    return spec, gctx.sqrt(best_d2)


def pole_grid(ctx: FieldContext, re_range: tuple[float, float],
              im_range: tuple[float, float]) -> list[PoleSpec]:
    """All lattice poles inside the closed rectangle, sorted by (k, m)."""
    re_lo, re_hi = re_range
    im_lo, im_hi = im_range
    if re_lo > re_hi or im_lo > im_hi:
        raise DomainError("empty range: lo must not exceed hi")
    prec = ctx.precision
    gctx = gmpy2.context(precision=prec)
    spacing = gctx.div(gmpy2.const_pi(prec), ctx.log_eps_at(prec))
    out = []
    k_lo = max(0, math.ceil(-re_hi / 2))
    k_hi = math.floor(-re_lo / 2)
    m_lo = int(gctx.ceil(gctx.div(mpfr(im_lo, prec), spacing)))
    m_hi = int(gctx.floor(gctx.div(mpfr(im_hi, prec), spacing)))
    for k in range(k_lo, k_hi + 1):
        for m in range(m_lo, m_hi + 1):
            out.append(pole_spec(ctx, k, m, prec))
    return out


# ---------------------------------------------------------------------------
# shared plumbing
# ---------------------------------------------------------------------------

def _prep(ctx: FieldContext, s, tol) -> tuple[CNum, int, int]:
    """Working-precision copy of s plus (base precision, working precision)."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    prec = max(ctx.precision, getattr(s, "precision", 0))
    tol_bits = int(-math.log2(float(tol))) + 1 if float(tol) < 1 else 1
    wp = max(prec, tol_bits + 16) + EVAL_GUARD_BITS
    return as_cnum(s, wp), prec, wp


def _near_pole_guard(ctx: FieldContext, s_w: CNum, prec: int) -> mpfr:
    """Distance to the pole lattice; raises NearPoleError under threshold."""
    spec, dist = nearest_pole(ctx, s_w)
    threshold = mpfr(2, prec) ** (-(prec // 4))
    if dist <= threshold:
        raise NearPoleError(
            f"s within 2^-{prec // 4} of the pole (k={spec.k}, m={spec.m})")
    return dist


def _q_pow(ctx: FieldContext, s_half: CNum, wp: int) -> CNum:
    """q^(s_half) as exp(s_half * log q)."""
    return exp(s_half * log(CNum(ctx.q, precision=wp)))


# ---------------------------------------------------------------------------
# direct summation (Re s > 0)
# ---------------------------------------------------------------------------

def z_direct(ctx: FieldContext, s, parity: str, tol: float = 1e-20) -> EvalResult:
    """Partial sum of the defining Dirichlet series with a geometric tail bound.

    The bound uses F_D(2n-1) >= eps^(2n-1)/sqrt(q) and
    F_D(2n) >= eps^(2n)(1 - eps^-4)/sqrt(q): the tail after N terms is below

        odd:  q^(sigma/2) eps^(-(2N+1) sigma) / (1 - eps^(-2 sigma))
        even: (sqrt(q)/(1-eps^-4))^sigma eps^(-(2N+2) sigma) / (1 - eps^(-2 sigma))

    Requires Re s > 0 (the series diverges otherwise).
    """
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be odd or even, got {parity!r}")
    s_w, prec, wp = _prep(ctx, s, tol)
    sigma = s_w.real
    if sigma <= 0:
        raise DomainError("direct series requires Re s > 0")
    gctx = gmpy2.context(precision=wp)
    L = ctx.log_eps_at(wp)
    # per-term decay factor eps^(-2 sigma) and constant prefactors of the bound
    dec = gctx.exp(gctx.mul(gctx.mul(sigma, -2), L))
    geom = gctx.div(1, gctx.sub(1, dec))
    if parity == "odd":
        c = gctx.exp(gctx.mul(sigma, gctx.div(gctx.log(mpfr(ctx.q, wp)), 2)))
        gap = gctx.exp(gctx.mul(gctx.mul(sigma, -1), L))  # eps^(-sigma)
    else:
        one_m = gctx.sub(1, gctx.exp(gctx.mul(mpfr(-4, wp), L)))
        base = gctx.div(gctx.sqrt(mpfr(ctx.q, wp)), one_m)
        c = gctx.exp(gctx.mul(sigma, gctx.log(base)))
        gap = gctx.exp(gctx.mul(gctx.mul(sigma, -2), L))  # eps^(-2 sigma)
    # tail(N) = c * gap * dec^N * geom
    tail = gctx.mul(gctx.mul(c, gap), geom)

    total = CNum(0, precision=wp)
    n = 0
    while tail >= mpfr(tol):
        n += 1
        if n > 10 ** 6:
            raise NoConvergence("direct series did not reach tol (Re s too small?)")
        idx = 2 * n - 1 if parity == "odd" else 2 * n
        f = fibonacci(ctx, idx)
        total = total + exp(log(CNum(f, precision=wp)) * (-s_w))
        tail = gctx.mul(tail, dec)

    _, dist = nearest_pole(ctx, s_w)
    return EvalResult(value=total.to_precision(prec), method="direct",
                      terms_used=n, tail_bound=mpfr(tail, prec),
                      nearest_pole_distance=mpfr(dist, prec))


# ---------------------------------------------------------------------------
# binomial continuation (everywhere off the pole lattice)
# ---------------------------------------------------------------------------

def z_binomial(ctx: FieldContext, s, parity: str, tol: float = 1e-20,
               K_max: int = 20000) -> EvalResult:
    """Everywhere-oracle: binomial expansion of the exact closed forms.

    Denominators vanish exactly on the pole lattice (eps^(2(s+2k)) = 1 iff
    s = -2k + pi i m / log eps), so inputs within 2^(-precision/4) of the
    lattice raise NearPoleError.
    """
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be odd or even, got {parity!r}")
    s_w, prec, wp = _prep(ctx, s, tol)
    dist = _near_pole_guard(ctx, s_w, prec)
    gctx = gmpy2.context(precision=wp)
    L = CNum(ctx.log_eps_at(wp), precision=wp)
    abs_s = abs(s_w)
    sigma = s_w.real

    eps2 = gctx.exp(gctx.mul(mpfr(2, wp), L.real))   # eps^2
    eps4 = gctx.mul(eps2, eps2)
    # the break test must see the final q^(sigma/2) scaling
    qmag = gctx.exp(gctx.mul(sigma, gctx.div(gctx.log(mpfr(ctx.q, wp)), 2)))
    total = CNum(0, precision=wp)
    binom = CNum(1, precision=wp)      # C(s+k-1, k), updated multiplicatively
    bound = mpfr(1, wp)                # |binom| upper bound, same recurrence on |s|
    tail = None
    k = 0
    while True:
        if k > K_max:
            raise NoConvergence(f"binomial expansion needs more than {K_max} terms")
        sk = s_w + 2 * k
        if parity == "odd":
            u = exp(sk * L)
            denom = u - 1 / u
            term = binom / denom
            if k % 2:
                term = -term
        else:
            u2 = exp((2 * sk) * L)
            denom = u2 - 1
            term = binom / denom
        total = total + term

        # geometric tail once the exponent sigma+2k is safely positive:
        # |binom| <= bound and |denom| >= its value at s = sigma.
        # (|s|+k')/(k'+1) approaches 1 monotonically, so later binomial
        # ratios never exceed max(ratio_b, 1).
        sig2k = gctx.add(sigma, 2 * k)
        ratio_b = gctx.div(gctx.add(abs_s, k), k + 1)
        ratio_sup = ratio_b if ratio_b > 1 else mpfr(1, wp)
        if parity == "odd":
            r = gctx.div(ratio_sup, eps2)
        else:
            r = gctx.div(ratio_sup, eps4)
        if sig2k > 1 and r < mpfr(0.7):
            if parity == "odd":
                e = gctx.exp(gctx.mul(sig2k, L.real))
                low = gctx.sub(e, gctx.div(1, e))
            else:
                low = gctx.sub(gctx.exp(gctx.mul(gctx.mul(sig2k, 2), L.real)), 1)
            term_bound = gctx.div(bound, low)
            tail = gctx.mul(qmag, gctx.div(gctx.mul(term_bound, r),
                                           gctx.sub(1, r)))
            if tail < mpfr(tol):
                break
        binom = binom * (s_w + k) / (k + 1)
        bound = gctx.mul(bound, ratio_b)
        k += 1

    qfac = _q_pow(ctx, s_w / 2, wp)
    value = qfac * total
    tail_abs = tail
    return EvalResult(value=value.to_precision(prec), method="binomial",
                      terms_used=k + 1, tail_bound=mpfr(tail_abs, prec),
                      nearest_pole_distance=mpfr(dist, prec))


# ---------------------------------------------------------------------------
# Gamma-series continuation, odd parity
# ---------------------------------------------------------------------------

def _tau(ctx: FieldContext, wp: int) -> mpfr:
    """Spectral grid step tau = pi / (2 log eps); t_m = tau * m."""
    gctx = gmpy2.context(precision=wp)
    return gctx.div(gmpy2.const_pi(wp), gctx.mul(mpfr(2, wp), ctx.log_eps_at(wp)))


def _spectral_odd_prefactor(ctx: FieldContext, s_w: CNum, wp: int) -> CNum:
    """A(s) = q^(s/2) / (8 Gamma(s) log eps), via the entire 1/Gamma."""
    L = CNum(ctx.log_eps_at(wp), precision=wp)
    return _q_pow(ctx, s_w / 2, wp) * rgamma(s_w) / (8 * L)


def _spectral_odd_sum(ctx: FieldContext, s_w: CNum, wp: int,
                      term_tol: mpfr, M_max: int,
                      skip_m: int | None = None) -> tuple[CNum, int, mpfr]:
    """sum_m (-1)^m Gamma(s/2 + i tau m) Gamma(s/2 - i tau m), adaptively.

    Pairs +-m (the two terms are equal).  Stops once the geometric tail
    estimate drops below term_tol.  skip_m omits the +-skip_m pair (used by
    the factored evaluator).  Returns (sum, M used, tail estimate).
    """
    gctx = gmpy2.context(precision=wp)
    tau = _tau(ctx, wp)
    half = s_w / 2
    if skip_m == 0:
        total = CNum(0, precision=wp)
    else:
        g0 = gamma(half)
        total = g0 * g0
    sigma_f = float(s_w.real)
    t_f = abs(float(s_w.imag))
    # decay kicks in once tau*m clears both |Im s|/2 and the Re s scale
    m_min = 3 + math.ceil((t_f / 2 + max(sigma_f, 1.0)) / float(tau))
    decay = math.exp(-math.pi * float(tau))
    prev_mag = None
    m = 0
    while True:
        m += 1
        if m > M_max:
            raise NoConvergence(f"odd Gamma-series needs more than M={M_max}")
        if skip_m is not None and m == abs(skip_m):
            continue
        it = CNum(0, gctx.mul(tau, m), precision=wp)
        pair = 2 * gamma(half + it) * gamma(half - it)
        if m % 2:
            pair = -pair
        total = total + pair
        mag = abs(pair)
        # ratio of consecutive term bounds: exp(-pi tau) * poly correction
        r = decay * ((m + 1) / m) ** max(sigma_f - 1, 0.0)
        if prev_mag is not None and prev_mag > 0:
            r = max(r, min(float(gctx.div(mag, prev_mag)), 0.95))
        prev_mag = mag
        if m >= m_min and r < 0.95:
            tail = gctx.div(gctx.mul(mag, mpfr(r, wp)), mpfr(1 - r, wp))
            if tail < term_tol:
                return total, m, tail


def z_spectral(ctx: FieldContext, s, parity: str, tol: float = 1e-20,
               M_max: int = 100000) -> EvalResult:
    """Gamma-series continuation of Z_D (odd anywhere, even for Re s < 0)."""
    if parity not in ("odd", "even"):
        raise DomainError(f"parity must be odd or even, got {parity!r}")
    if parity == "even":
        return _z_spectral_even(ctx, s, tol, M_max)
    s_w, prec, wp = _prep(ctx, s, tol)
    dist = _near_pole_guard(ctx, s_w, prec)
    gctx = gmpy2.context(precision=wp)
    A = _spectral_odd_prefactor(ctx, s_w, wp)
    A_mag = abs(A)
    # inner tolerance so that |A| * inner tail < tol/2; if A ~ 0 (zeros of
    # 1/Gamma at negative odd integers) any modest inner accuracy suffices
    floor_mag = mpfr(1e-6, wp)
    denom_mag = A_mag if A_mag > floor_mag else floor_mag
    term_tol = gctx.div(gctx.div(mpfr(tol, wp), 2), denom_mag)
    total, M, tail_inner = _spectral_odd_sum(ctx, s_w, wp, term_tol, M_max)
    value = A * total
    tail_abs = gctx.mul(A_mag, tail_inner)
    return EvalResult(value=value.to_precision(prec), method="spectral",
                      terms_used=2 * M + 1, tail_bound=mpfr(tail_abs, prec),
                      nearest_pole_distance=mpfr(dist, prec))


# ---------------------------------------------------------------------------
# Gamma-series continuation, even parity (Re s < 0): central window +
# analytic tail via the Gamma-ratio asymptotic series and Hurwitz zeta
# ---------------------------------------------------------------------------

_BPOLY_CACHE: dict[tuple[int, int], list[mpfr]] = {}
_EM_COEFFS: dict[tuple[int, int], mpfr] = {}


def _bernoulli_poly_coeffs(n: int, wp: int) -> list[mpfr]:
    """Coefficients of B_n(x) in descending powers [x^n, ..., x^0], at wp bits."""
    key = (n, wp)
    coeffs = _BPOLY_CACHE.get(key)
    if coeffs is None:
        gctx = gmpy2.context(precision=wp)
        coeffs = []
        for k in range(n + 1):
            c = Fraction(math.comb(n, k)) * bernoulli(k)
            coeffs.append(gctx.div(c.numerator, c.denominator))
        _BPOLY_CACHE[key] = coeffs
    return coeffs


def _bernoulli_poly(n: int, x: CNum) -> CNum:
    """B_n(x) by Horner with exact rational coefficients."""
    acc = CNum(0, precision=x.precision)
    for c in _bernoulli_poly_coeffs(n, x.precision):
        acc = acc * x + CNum(c, precision=x.precision)
    return acc


def _em_coeff(k: int, wp: int) -> mpfr:
    """B_2k / (2k)! at wp bits for the Euler-Maclaurin corrections; cached."""
    key = (k, wp)
    c = _EM_COEFFS.get(key)
    if c is None:
        frac = bernoulli(2 * k) / math.factorial(2 * k)
        c = gmpy2.context(precision=wp).div(frac.numerator, frac.denominator)
        _EM_COEFFS[key] = c
    return c


def _gamma_ratio_coeffs(s_w: CNum, J: int) -> list[CNum]:
    """C_0..C_J with Gamma(v+s/2)/Gamma(v+1-s/2) = v^(s-1) sum_j C_j v^-j.

    From log Gamma(v+c) ~ ... the log of the ratio is (s-1) log v +
    sum_n d_n v^-n with d_n = (-1)^(n+1) (B_{n+1}(s/2) - B_{n+1}(1-s/2)) /
    (n(n+1)); exponentiating the series gives the C_j.
    """
    a = s_w / 2
    b = 1 - s_w / 2
    d = [CNum(0, precision=s_w.precision)]
    for n in range(1, J + 1):
        num = _bernoulli_poly(n + 1, a) - _bernoulli_poly(n + 1, b)
        dn = num / (n * (n + 1))
        if n % 2 == 0:
            dn = -dn
        d.append(dn)
    C = [CNum(1, precision=s_w.precision)]
    for k in range(1, J + 1):
        acc = CNum(0, precision=s_w.precision)
        for i in range(1, k + 1):
            acc = acc + (i * d[i]) * C[k - i]
        C.append(acc / k)
    return C


def _hurwitz_zeta(z: CNum, a: int, target_abs: mpfr) -> tuple[CNum, mpfr]:
    """zeta(z, a) = sum_{n>=0} (a+n)^(-z) by Euler-Maclaurin, a >= 1.

    Shifts the offset with an explicit partial sum until the correction
    series converges fast enough, then applies the Bernoulli corrections.
    Returns (value, error estimate ~ first omitted term).
    """
    wp = z.precision
    gctx = gmpy2.context(precision=wp)
    z_mag = float(abs(z))
    # choose offset A so the term ratio ((|z|+2k)/(2 pi A))^2 stays below
    # ~1/16 for the whole planned run of k (roughly bits/4 corrections);
    # get_exp reads the binary exponent without float under/overflow
    bits = max(0, -gmpy2.get_exp(target_abs))
    k_need = 10 + bits // 4
    A = max(a, math.ceil(0.7 * (z_mag + 2 * k_need)))
    partial = CNum(0, precision=wp)
    for n in range(a, A):
        partial = partial + exp(log(CNum(n, precision=wp)) * (-z))

    Ac = CNum(A, precision=wp)
    lnA = log(Ac)
    A_pow = exp(lnA * (-z))            # A^(-z)
    result = A_pow * Ac / (z - 1) + A_pow / 2
    rising = z                          # (z)_{2k-1}, starts at k=1
    apow = A_pow / Ac                   # A^(-z-2k+1), starts at k=1
    inv_A2 = 1 / (Ac * Ac)
    err = mpfr(0, wp)
    k = 1
    prev_mag = None
    while True:
        term = CNum(_em_coeff(k, wp), precision=wp) * rising * apow
        mag = abs(term)
        if prev_mag is not None and mag >= prev_mag:
            err = mag  # asymptotic turnaround: stop before adding
            break
        result = result + term
        err = mag
        if mag < target_abs or k > 120:
            break
        prev_mag = mag
        rising = rising * (z + (2 * k - 1)) * (z + 2 * k)
        apow = apow * inv_A2
        k += 1
    return partial + result, err


def _z_spectral_even(ctx: FieldContext, s, tol: float,
                     M_max: int) -> EvalResult:
    s_w, prec, wp = _prep(ctx, s, tol)
    if s_w.real >= 0:
        raise DomainError("even Gamma-series formula is valid only for Re s < 0")
    dist = _near_pole_guard(ctx, s_w, prec)
    gctx = gmpy2.context(precision=wp)
    tau = _tau(ctx, wp)
    tau_f = float(tau)
    half = s_w / 2
    one_minus_half = 1 - half
    L = CNum(ctx.log_eps_at(wp), precision=wp)
    B = _q_pow(ctx, half, wp) * gamma(1 - s_w) / (4 * L)
    B_mag = abs(B)
    inner_tol = gctx.div(gctx.div(mpfr(tol, wp), 4), B_mag)

    abs_s = float(abs(s_w))
    digits = max(10.0, -math.log10(float(tol)) + 4)
    J = int(digits) + 8
    M = math.ceil(max(2.5 * J, 10 * (abs_s / 2 + 2)) / tau_f)

    for attempt in range(3):
        if 2 * M + 1 > M_max:
            raise NoConvergence(f"even Gamma-series needs more than M={M_max}")
        # central window
        central = gamma(half) * rgamma(one_minus_half)
        for m in range(1, M + 1):
            it = CNum(0, gctx.mul(tau, m), precision=wp)
            central = central + gamma(half - it) * rgamma(one_minus_half - it)
            central = central + gamma(half + it) * rgamma(one_minus_half + it)

        # analytic tail: sum_{|m|>M} = sum_j C_j tau^(s-1-j)
        #                 * 2 cos(pi (s-1-j)/2) * zeta(1+j-s, M+1)
        C = _gamma_ratio_coeffs(s_w, J)
        tau_c = CNum(tau, precision=wp)
        ln_tau = log(tau_c)
        half_pi = pi(wp) / 2
        tail_sum = CNum(0, precision=wp)
        zeta_err_total = mpfr(0, wp)
        last_term_mag = mpfr(0, wp)
        # each zeta error enters scaled; split the budget across the J+1 terms
        zeta_target = gctx.div(inner_tol, 8 * (J + 1))
        for j in range(J + 1):
            w_exp = s_w - 1 - j
            hz, hz_err = _hurwitz_zeta(1 + j - s_w, M + 1, zeta_target)
            front = C[j] * exp(ln_tau * w_exp) * (2 * cos(half_pi * w_exp))
            term = front * hz
            tail_sum = tail_sum + term
            zeta_err_total = gctx.add(zeta_err_total, gctx.mul(abs(front), hz_err))
            last_term_mag = abs(term)

        series_err = gctx.add(gctx.mul(last_term_mag, 2), zeta_err_total)
        if series_err < inner_tol * 2 or attempt == 2:
            break
        M *= 2
        J += 10

    if series_err >= inner_tol * 4:
        raise NoConvergence("even Gamma-series tail did not reach tolerance")

    value = B * (central + tail_sum)
    tail_abs = gctx.mul(B_mag, series_err)
    return EvalResult(value=value.to_precision(prec), method="spectral",
                      terms_used=2 * M + 1 + J + 1, tail_bound=mpfr(tail_abs, prec),
                      nearest_pole_distance=mpfr(dist, prec))


# ---------------------------------------------------------------------------
# factored evaluation near a pole, and residues
# ---------------------------------------------------------------------------

def _singular_numerator(ctx: FieldContext, s_w: CNum, pole: PoleSpec,
                        wp: int) -> CNum:
    """N(s) with Z_odd(s) = regular(s) + N(s)/(s - s0) near s0.

    For m0 = 0 (s0 = -2k) the double pole of Gamma(s/2)^2 merges with the
    simple zero of 1/Gamma(s); writing z = (s-s0)/2 and reducing all Gamma
    factors to arguments near 1:

        A(s) Gamma(s/2)^2 = [q^(s/2)/(8 log eps)] * (4/(s-s0))
            * Gamma(z+1)^2/Gamma(2z+1)
            * prod_{j<=2k}(2z-j) / prod_{j<=k}(z-j)^2.

    For m0 != 0 the terms m = +-m0 are equal and carry a simple pole from
    Gamma(s/2 - i tau m0) = Gamma(z+1)/(z prod_{j<=k}(z-j)):

        A(s)(term_{m0} + term_{-m0}) = A(s) (-1)^m0 Gamma(s/2 + i tau m0)
            * Gamma(z+1) * (4/(s-s0)) / prod_{j<=k}(z-j).
    """
    k0, m0 = pole.k, pole.m
    s0 = pole_location(ctx, k0, m0, wp)
    z = (s_w - s0) / 2
    if m0 == 0:
        L = CNum(ctx.log_eps_at(wp), precision=wp)
        front = _q_pow(ctx, s_w / 2, wp) / (8 * L)
        num = gamma(z + 1) * gamma(z + 1) * rgamma(2 * z + 1)
        for j in range(1, 2 * k0 + 1):
            num = num * (2 * z - j)
        for j in range(1, k0 + 1):
            num = num / ((z - j) * (z - j))
        return 4 * front * num
    A = _spectral_odd_prefactor(ctx, s_w, wp)
    tau = _tau(ctx, wp)
    gctx = gmpy2.context(precision=wp)
    it0 = CNum(0, gctx.mul(tau, m0), precision=wp)
    num = A * gamma(s_w / 2 + it0) * gamma(z + 1) * 4
    if m0 % 2:
        num = -num
    for j in range(1, k0 + 1):
        num = num / (z - j)
    return num


def _spectral_split(ctx: FieldContext, s_w: CNum, pole: PoleSpec, wp: int,
                    tol: float) -> tuple[CNum, CNum]:
    """(regular part, singular numerator N) with Z = regular + N/(s-s0)."""
    gctx = gmpy2.context(precision=wp)
    A = _spectral_odd_prefactor(ctx, s_w, wp)
    A_mag = abs(A)
    floor_mag = mpfr(1e-6, wp)
    denom_mag = A_mag if A_mag > floor_mag else floor_mag
    term_tol = gctx.div(gctx.div(mpfr(tol, wp), 2), denom_mag)
    skip = pole.m if pole.m != 0 else 0
    total, _, _ = _spectral_odd_sum(ctx, s_w, wp, term_tol, 10 ** 6,
                                    skip_m=skip)
    return A * total, _singular_numerator(ctx, s_w, pole, wp)


def z_spectral_factored(ctx: FieldContext, s, pole: PoleSpec,
                        tol: float = 1e-24) -> CNum:
    """Z_odd(s) with the singular term at `pole` factored analytically.

    Usable arbitrarily close to the pole (the 1/(s-s0) factor is exact);
    still raises NearPoleError if s crowds a DIFFERENT lattice pole.
    """
    s_w, prec, wp = _prep(ctx, s, tol)
    spec, dist = nearest_pole(ctx, s_w)
    if spec != pole:
        threshold = mpfr(2, prec) ** (-(prec // 4))
        if dist <= threshold:
            raise NearPoleError(
                f"s within 2^-{prec // 4} of a different pole "
                f"(k={spec.k}, m={spec.m})")
    regular, num = _spectral_split(ctx, s_w, pole, wp, tol)
    s0 = pole_location(ctx, pole.k, pole.m, wp)
    return (regular + num / (s_w - s0)).to_precision(prec)


def residue_closed_form(ctx: FieldContext, pole: PoleSpec,
                        precision: int | None = None) -> CNum:
    """Exact-formula residue N(s0); the analytic limit of (s-s0) Z_odd(s).

    m0 = 0: q^(-k) binom(2k, k) / (2 log eps).
    m0 != 0: A(s0) (-1)^m0 Gamma(-k + 2 i tau m0) * 4 (-1)^k / k!.
    """
    prec = precision or ctx.precision
    wp = prec + EVAL_GUARD_BITS
    k0, m0 = pole.k, pole.m
    if m0 == 0:
        gctx = gmpy2.context(precision=wp)
        L = ctx.log_eps_at(wp)
        val = gctx.div(math.comb(2 * k0, k0),
                       gctx.mul(gctx.mul(mpfr(2, wp), L),
                                gctx.pow(mpfr(ctx.q, wp), k0)))
        return CNum(val, precision=wp).to_precision(prec)
    s0 = pole_location(ctx, k0, m0, wp)
    s0_w = as_cnum(s0, wp)
    A0 = _spectral_odd_prefactor(ctx, s0_w, wp)
    tau = _tau(ctx, wp)
    arg = CNum(mpfr(-k0, wp), gmpy2.context(precision=wp).mul(tau, 2 * m0),
               precision=wp)
    val = A0 * gamma(arg) * 4 / math.factorial(k0)
    if (m0 + k0) % 2:
        val = -val
    return val.to_precision(prec)


def residue_at(ctx: FieldContext, pole: PoleSpec, parity: str = "odd",
               method: str = "limit") -> CNum:
    """Numerical residue of Z_odd at a lattice pole.

    method="limit": Richardson-extrapolated symmetric samples of
    (s-s0) Z_odd(s) on shrinking circles, with the singular term factored
    analytically; averaging 4 symmetric points kills all Laurent terms
    except powers = -1 mod 4, so the extrapolation runs in r^4.

    method="circle": trapezoidal contour integral (1/2 pi i) oint Z ds on a
    fixed circle, using the plain (unfactored) spectral evaluator; spectral
    accuracy of the trapezoid rule on analytic integrands applies.
    """
    if parity != "odd":
        raise DomainError("residues are implemented for the odd series only")
    prec = ctx.precision
    wp = prec + EVAL_GUARD_BITS
    gctx = gmpy2.context(precision=wp)
    s0 = pole_location(ctx, pole.k, pole.m, wp)
    spacing = gctx.div(gmpy2.const_pi(wp), ctx.log_eps_at(wp))
    tol = float(mpfr(2, wp) ** (-(prec // 2 + 40)))

    if method == "limit":
        r0 = min(0.0625, float(spacing) / 16, 0.125)
        depth = 4
        samples = []
        for i in range(depth):
            r = mpfr(r0, wp) / (2 ** i)
            acc = CNum(0, precision=wp)
            for j, (dre, dim) in enumerate(((1, 0), (0, 1), (-1, 0), (0, -1))):
                sp = CNum(gctx.add(s0.real, gctx.mul(r, dre)),
                          gctx.add(s0.imag, gctx.mul(r, dim)), precision=wp)
                regular, num = _spectral_split(ctx, sp, pole, wp, tol)
                g = (sp - as_cnum(s0, wp)) * regular + num
                acc = acc + g
            samples.append(acc / 4)
        # Richardson in r^4 with radius halving: ratio 16 per level
        table = list(samples)
        for level in range(1, depth):
            f = 16 ** level
            table = [table[i] + (table[i] - table[i - 1]) / (f - 1)
                     for i in range(1, len(table))]
        return table[0].to_precision(prec)

    if method == "circle":
        n = 32
        rho = min(0.25, float(spacing) / 8)
        two_pi = gctx.mul(gmpy2.const_pi(wp), 2)
        acc = CNum(0, precision=wp)
        for j in range(n):
            theta = gctx.div(gctx.mul(two_pi, j), n)
            w = CNum(gctx.mul(mpfr(rho, wp), gctx.cos(theta)),
                     gctx.mul(mpfr(rho, wp), gctx.sin(theta)), precision=wp)
            sp = as_cnum(s0, wp) + w
            zval = z_spectral(ctx, sp, "odd", tol=tol).value
            acc = acc + as_cnum(zval, wp) * w
        return (acc / n).to_precision(prec)

    raise DomainError(f"unknown residue method {method!r}")


# ---------------------------------------------------------------------------
# cross-checks
# ---------------------------------------------------------------------------

@dataclass
class CrossCheckEntry:
    s: CNum
    parity: str
    pair: tuple[str, str]
    delta: mpfr | None
    skipped: bool = False
    reason: str = ""

    def to_json_dict(self) -> dict:
        return {
            "s_re": str(self.s.real), "s_im": str(self.s.imag),
            "parity": self.parity, "pair": list(self.pair),
            "delta": None if self.delta is None else str(self.delta),
            "skipped": self.skipped, "reason": self.reason,
        }


@dataclass
class CrossCheckReport:
    tol: float
    entries: list[CrossCheckEntry]

    @property
    def max_delta(self) -> float:
        vals = [float(e.delta) for e in self.entries if e.delta is not None]
        return max(vals) if vals else 0.0

    @property
    def all_pass(self) -> bool:
        return all(e.skipped or (e.delta is not None and e.delta < mpfr(self.tol))
                   for e in self.entries)

    def to_json_dict(self) -> dict:
        return {"tol": self.tol, "max_delta": self.max_delta,
                "all_pass": self.all_pass,
                "entries": [e.to_json_dict() for e in self.entries]}


def cross_check(ctx: FieldContext, s_grid, tol: float = 1e-20) -> CrossCheckReport:
    """Evaluate every applicable method pair on each grid point.

    Pairs: direct/binomial for Re s > 0 (both parities); binomial/spectral
    everywhere for odd; binomial/spectral for Re s < 0 for even.  Points
    that sit too close to the pole lattice are reported skipped.
    """
    entries: list[CrossCheckEntry] = []
    wp = ctx.precision + EVAL_GUARD_BITS
    gctx = gmpy2.context(precision=wp)
    for s in s_grid:
        s_c = as_cnum(s, ctx.precision)
        sigma = s_c.real
        for parity in ("odd", "even"):
            jobs = []
            if sigma > 0:
                jobs.append(("direct", "binomial"))
            if parity == "odd":
                jobs.append(("binomial", "spectral"))
            elif sigma < 0:
                jobs.append(("binomial", "spectral"))
            for pair in jobs:
                try:
                    vals = []
                    for meth in pair:
                        fn = {"direct": z_direct, "binomial": z_binomial,
                              "spectral": z_spectral}[meth]
                        vals.append(fn(ctx, s_c, parity, tol=tol / 4))
                    delta = gctx.abs(
                        gctx.sub(as_cnum(vals[0].value, wp).val,
                                 as_cnum(vals[1].value, wp).val))
                    entries.append(CrossCheckEntry(s=s_c, parity=parity,
                                                   pair=pair, delta=delta))
                except NearPoleError as e:
                    entries.append(CrossCheckEntry(s=s_c, parity=parity,
                                                   pair=pair, delta=None,
                                                   skipped=True, reason=str(e)))
    return CrossCheckReport(tol=tol, entries=entries)

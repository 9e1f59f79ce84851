"""Mechanical verification of the finite supporting identities.

The meromorphic continuation rests on a handful of exact finite facts: the
3x3 linear algebra that orthogonalizes the oldform span {mu, B2 mu, B4 mu}
(Fricke involution W, Hecke operator T_2 and its adjoint, Gram matrix), two
scalar assembly identities, and two classical Gamma-function identities.
Each one is checked numerically over random parameter samples: lambda is a
free real parameter (the identities hold identically in it) and chi ranges
over {-1, +1}, the two values the character can take at 2 for squarefree
odd-conductor cases; the manipulations use (2+chi)(2-chi) = 3, exact when
chi^2 = 1.

residual := |lhs - rhs| / max(|lhs|, |rhs|, 1)  (entrywise max for matrices)
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass, field

from gmpy2 import mpfr

from .errors import DomainError, NearPoleError, PoleError
from .qfield import FieldContext, make_context
from .special import CNum, as_cnum, exp, gamma, pi, sin, sqrt

# residual tolerances as bits below working precision
GRAM_TOL_BITS = 16
BASIS_TOL_BITS = 16
ASSEMBLY_TOL_BITS = 16
GAMMA_TOL_BITS = 20
DUPLICATION_TOL_BITS = 20
EIGENVALUE_TOL_BITS = 16

DEFAULT_SEED = 1729


@dataclass
class IdentityReport:
    name: str
    samples: list[dict] = field(default_factory=list)
    max_residual: float = 0.0
    tolerance: float = 0.0
    passed: bool = True
    worst_sample: dict | None = None

    def absorb(self, other: "IdentityReport") -> None:
        """Merge a single-sample report into this accumulator."""
        assert other.name == self.name
        self.samples.extend(other.samples)
        if other.max_residual > self.max_residual:
            self.max_residual = other.max_residual
            self.worst_sample = other.worst_sample
        self.tolerance = other.tolerance
        self.passed = self.passed and other.passed

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "n_samples": len(self.samples),
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_sample": self.worst_sample,
        }


def _tol(precision: int, bits: int) -> mpfr:
    return mpfr(2, precision) ** (-(precision - bits))


def _residual(lhs: CNum, rhs: CNum) -> mpfr:
    scale = max(abs(lhs), abs(rhs), mpfr(1, lhs.precision))
    return abs(lhs - rhs) / scale


def _report(name: str, params: dict, residual, precision: int,
            tol_bits: int) -> IdentityReport:
    tol = _tol(precision, tol_bits)
    res_f = float(residual)
    return IdentityReport(name=name, samples=[params], max_residual=res_f,
                          tolerance=float(tol), passed=residual < tol,
                          worst_sample=params)


# ---------------------------------------------------------------------------
# 3x3 matrices over CNum
# ---------------------------------------------------------------------------

class Mat3:
    """Row-major 3x3 matrix of CNum entries; just enough for the checks."""

    def __init__(self, rows):
        self.rows = [list(r) for r in rows]
        assert len(self.rows) == 3 and all(len(r) == 3 for r in self.rows)

    @staticmethod
    def identity(precision: int) -> "Mat3":
        one = CNum(1, precision=precision)
        zero = CNum(0, precision=precision)
        return Mat3([[one if i == j else zero for j in range(3)]
                     for i in range(3)])

    def __matmul__(self, other: "Mat3") -> "Mat3":
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                acc = self.rows[i][0] * other.rows[0][j]
                for k in (1, 2):
                    acc = acc + self.rows[i][k] * other.rows[k][j]
                row.append(acc)
            rows.append(row)
        return Mat3(rows)

    def transpose(self) -> "Mat3":
        return Mat3([[self.rows[j][i] for j in range(3)] for i in range(3)])

    def apply(self, vec):
        return [self.rows[i][0] * vec[0] + self.rows[i][1] * vec[1]
                + self.rows[i][2] * vec[2] for i in range(3)]

    def max_residual(self, other: "Mat3") -> mpfr:
        worst = mpfr(0)
        for i in range(3):
            for j in range(3):
                r = _residual(self.rows[i][j], other.rows[i][j])
                if r > worst:
                    worst = r
        return worst


def _orth_matrices(lam: float, chi: int, precision: int):
    """W, T2, T2*, G on the span {mu, B2 mu, B4 mu}, norm of mu set to 1."""
    if chi not in (-1, 1):
        raise DomainError("chi must be -1 or +1")
    c = lambda v: as_cnum(v, precision)  # noqa: E731 - local shorthand
    lam_c = c(lam)
    half = c(1) / 2
    W = Mat3([[c(0), c(0), half],
              [c(0), c(1), c(0)],
              [c(2), c(0), c(0)]])
    T2 = Mat3([[lam_c, c(1), c(0)],
               [c(-chi), c(0), c(1)],
               [c(0), c(0), c(0)]])
    T2s = Mat3([[c(0), c(0), c(0)],
                [c(2), c(0), c(-chi) / 2],
                [c(0), c(2), lam_c]])
    g01 = 4 * lam_c / (2 + chi)
    g02 = 2 * lam_c * lam_c / (2 + chi) - chi
    g12 = 2 * lam_c / (2 + chi)
    G = Mat3([[c(4), g01, g02],
              [g01, c(2), g12],
              [g02, g12, c(1)]])
    quarter = c(1) / 4
    G = Mat3([[quarter * e for e in row] for row in G.rows])
    return W, T2, T2s, G


def check_gram(lam: float, chi: int, precision: int = 128) -> IdentityReport:
    """T2^t G = G T2* and T2* = W T2 W^(-1) (W is an involution, so W^-1 = W)."""
    W, T2, T2s, G = _orth_matrices(lam, chi, precision)
    r1 = (T2.transpose() @ G).max_residual(G @ T2s)
    r2 = (W @ T2 @ W).max_residual(T2s)
    r3 = (W @ W).max_residual(Mat3.identity(precision))
    res = max(r1, r2, r3)
    return _report("gram_intertwine", {"lambda": lam, "chi": chi}, res,
                   precision, GRAM_TOL_BITS)


def check_orthogonal_basis(lam: float, chi: int,
                           precision: int = 128) -> IdentityReport:
    """The shifted vectors are G-orthogonal with the stated norm ratios."""
    _, _, _, G = _orth_matrices(lam, chi, precision)
    c = lambda v: as_cnum(v, precision)  # noqa: E731
    lam_c = c(lam)
    v1 = [c(1), c(0), c(0)]
    v2 = [-lam_c / (2 + chi), c(1), c(0)]
    v3 = [c(chi) / 4, -lam_c / 2, c(1)]
    vecs = (v1, v2, v3)

    def dot(u, v):
        gv = G.apply(v)
        return u[0] * gv[0] + u[1] * gv[1] + u[2] * gv[2]

    n1 = c(1)
    n2 = c(1) / 2 - lam_c * lam_c / (5 + 4 * chi)
    n3 = c(3) / 16 - (2 - chi) * lam_c * lam_c / (8 * (2 + chi))
    res = mpfr(0)
    for i in range(3):
        for j in range(i + 1, 3):
            r = _residual(dot(vecs[i], vecs[j]), c(0))
            res = max(res, r)
    for v, n in zip(vecs, (n1, n2, n3)):
        res = max(res, _residual(dot(v, v), n))
    return _report("orthogonal_basis", {"lambda": lam, "chi": chi}, res,
                   precision, BASIS_TOL_BITS)


def check_assembly_scalar(lam: float, chi: int,
                          precision: int = 128) -> IdentityReport:
    """lambda^2 - chi + (3 - (2-chi) lambda^2)/(2-chi) = 2 when chi^2 = 1."""
    if chi not in (-1, 1):
        raise DomainError("chi must be -1 or +1")
    lam_c = as_cnum(lam, precision)
    lam2 = lam_c * lam_c
    lhs = lam2 - chi + (3 - (2 - chi) * lam2) / (2 - chi)
    res = _residual(lhs, as_cnum(2, precision))
    return _report("assembly_scalar", {"lambda": lam, "chi": chi}, res,
                   precision, ASSEMBLY_TOL_BITS)


def check_gamma_identities(s, t: float, precision: int = 128) -> IdentityReport:
    """The two Gamma identities behind the even-series simplification.

    (a) Gamma(1/2 - s/2)/Gamma(s/2) = 2^s Gamma(1-s) sin(pi s/2)/sqrt(pi)
    (b) 2 Gamma(s/2-it) Gamma(s/2+it) sin(pi s/2)
          / (Gamma(1/2-it) Gamma(1/2+it))
        = Gamma(s/2-it)/Gamma(1-s/2-it) + Gamma(s/2+it)/Gamma(1-s/2+it)
    """
    wp = precision + 32
    s_c = as_cnum(s, wp)
    t_c = as_cnum(t, wp)
    p = pi(wp)
    sin_half = sin(p * s_c / 2)
    if abs(sin_half) < mpfr(2, wp) ** (-(precision // 4)):
        raise NearPoleError("sample too close to a zero of sin(pi s/2)")
    try:
        lhs_a = gamma((1 - s_c) / 2) / gamma(s_c / 2)
        rhs_a = exp(s_c * _ln2(wp)) * gamma(1 - s_c) * sin_half / sqrt(p)
        it = CNum(0, t_c.real, precision=wp)
        g_minus = gamma(s_c / 2 - it)
        g_plus = gamma(s_c / 2 + it)
        lhs_b = (2 * g_minus * g_plus * sin_half
                 / (gamma(as_cnum(0.5, wp) - it) * gamma(as_cnum(0.5, wp) + it)))
        rhs_b = (g_minus / gamma(1 - s_c / 2 - it)
                 + g_plus / gamma(1 - s_c / 2 + it))
    except PoleError as e:
        raise NearPoleError(f"sample hits a Gamma pole: {e}") from e
    res = max(_residual(lhs_a.to_precision(precision),
                        rhs_a.to_precision(precision)),
              _residual(lhs_b.to_precision(precision),
                        rhs_b.to_precision(precision)))
    s_f = as_cnum(s, 53)
    return _report("gamma_pair",
                   {"s_re": float(s_f.real), "s_im": float(s_f.imag), "t": t},
                   res, precision, GAMMA_TOL_BITS)


def _ln2(precision: int) -> CNum:
    from .special import log
    return log(as_cnum(2, precision))


def check_duplication_assembly(s, ctx: FieldContext,
                               precision: int = 128) -> IdentityReport:
    """(4 D pi)^s sqrt(pi) / (4 Gamma(s) (4 pi l)^s Gamma(s+1/2)) = q^s/(8 Gamma(2s))."""
    from .special import log
    wp = precision + 32
    s_c = as_cnum(s, wp)
    p = pi(wp)
    try:
        lhs = (exp(s_c * log(4 * ctx.D * p)) * sqrt(p)
               / (4 * gamma(s_c) * exp(s_c * log(4 * p * ctx.ell))
                  * gamma(s_c + as_cnum(0.5, wp))))
        rhs = exp(s_c * log(as_cnum(ctx.q, wp))) / (8 * gamma(2 * s_c))
    except PoleError as e:
        raise NearPoleError(f"sample hits a Gamma pole: {e}") from e
    res = _residual(lhs.to_precision(precision), rhs.to_precision(precision))
    s_f = as_cnum(s, 53)
    return _report("duplication_assembly",
                   {"s_re": float(s_f.real), "s_im": float(s_f.imag),
                    "D": ctx.D}, res, precision, DUPLICATION_TOL_BITS)


def check_eigenvalue_sign(m: int, ctx: FieldContext,
                          precision: int = 128) -> IdentityReport:
    """exp((i m pi / log eps) * log eps) = (-1)^m.

    Trivial after cancellation; the check exercises the rounded quotient
    pi*m/log(eps) actually used to place the spectral grid.
    """
    wp = precision + 32
    L = CNum(ctx.log_eps_at(wp), precision=wp)
    ratio = CNum(0, pi(wp).real, precision=wp) * m / L
    val = exp(ratio * L)
    expect = as_cnum(-1 if m % 2 else 1, wp)
    res = _residual(val.to_precision(precision), expect.to_precision(precision))
    return _report("eigenvalue_sign", {"m": m, "D": ctx.D}, res, precision,
                   EIGENVALUE_TOL_BITS)


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

def _off_nonpositive_int(u: complex, margin: float) -> bool:
    k = round(u.real)
    if k > 0:
        return True
    return abs(u - k) >= margin


def _sample_s_t(rng: random.Random) -> tuple[complex, float]:
    """Random (s, t) with every Gamma argument kept safely off the poles.

    Guards: sin(pi s/2) away from 0, s away from the poles of Gamma(1-s)
    and Gamma((1-s)/2) at positive integers, and the shifted arguments
    1 - s/2 -+ it away from nonpositive integers.
    """
    while True:
        s = complex(rng.uniform(0.2, 2.8), rng.uniform(-1.5, 1.5))
        t = rng.uniform(-2.0, 2.0)
        if abs(cmath.sin(cmath.pi * s / 2)) < 0.05:
            continue
        if min(abs(s - n) for n in (1, 2, 3)) < 0.1:
            continue
        if not _off_nonpositive_int(1 - s / 2 - 1j * t, 0.05):
            continue
        if not _off_nonpositive_int(1 - s / 2 + 1j * t, 0.05):
            continue
        return s, t


def run_identity_suite(precision: int = 128, n_samples: int = 100,
                       seed: int = DEFAULT_SEED,
                       field_ds=(2, 5, 13, 29)) -> dict:
    """Run all six identity checks over seeded random samples.

    Deterministic for a fixed (precision, n_samples, seed).  Returns
    {"seed": ..., "precision": ..., "all_pass": ..., "reports": {name: IdentityReport}}.
    """
    rng = random.Random(seed)
    ctxs = [make_context(d, precision) for d in field_ds]
    reports: dict[str, IdentityReport] = {}

    def fold(rep: IdentityReport):
        if rep.name not in reports:
            reports[rep.name] = IdentityReport(name=rep.name)
        reports[rep.name].absorb(rep)

    for i in range(n_samples):
        lam = rng.uniform(-2.5, 2.5)
        chi = rng.choice((-1, 1))
        fold(check_gram(lam, chi, precision))
        fold(check_orthogonal_basis(lam, chi, precision))
        fold(check_assembly_scalar(lam, chi, precision))
        ctx = ctxs[i % len(ctxs)]
        for attempt in range(20):
            s, t = _sample_s_t(rng)
            try:
                rep_g = check_gamma_identities(s, t, precision)
                rep_d = check_duplication_assembly(s, ctx, precision)
                break
            except NearPoleError:
                continue  # guards should prevent this; resample if not
        else:
            raise RuntimeError("could not draw a pole-free gamma sample")
        fold(rep_g)
        fold(rep_d)
        m = rng.randint(-64, 64)
        fold(check_eigenvalue_sign(m, ctx, precision))

    all_pass = all(r.passed for r in reports.values())
    return {"seed": seed, "precision": precision, "n_samples": n_samples,
            "all_pass": all_pass, "reports": reports}

import mpmath
import pytest
from gmpy2 import mpfr

from fibzeta.arith import is_square, is_squarefree, isqrt, kronecker
from fibzeta.errors import DomainError, UnsupportedFieldError
from fibzeta.qfield import (
    FieldContext,
    L1_direct,
    QuadInt,
    class_number,
    conductor,
    fundamental_unit,
    make_context,
    regulator,
)

# all squarefree D <= 200 whose fundamental unit has norm -1
NORM_MINUS_ONE_DS = [
    2, 5, 10, 13, 17, 26, 29, 37, 41, 53, 58, 61, 65, 73, 74, 82, 85, 89,
    97, 101, 106, 109, 113, 122, 130, 137, 145, 149, 157, 170, 173, 181,
    185, 193, 197,
]


# -- QuadInt exact arithmetic -------------------------------------------------

def test_quadint_norm_trace():
    eps5 = QuadInt(5, 1, 1)          # (1+sqrt5)/2
    assert eps5.norm() == -1
    assert eps5.trace() == 1
    eps2 = QuadInt(2, 1, 1)          # 1+sqrt2
    assert eps2.norm() == -1
    assert eps2.trace() == 2


def test_quadint_half_parity_enforced():
    with pytest.raises(DomainError):
        QuadInt(5, 1, 2)


def test_quadint_squares():
    eps5 = QuadInt(5, 1, 1)
    assert eps5 * eps5 == QuadInt(5, 3, 1)      # (3+sqrt5)/2
    assert eps5 ** 3 == QuadInt(5, 4, 2)        # 2+sqrt5
    assert eps5 ** 0 == QuadInt(5, 2, 0)        # 1 in half form
    eps2 = QuadInt(2, 1, 1)
    assert eps2 ** 2 == QuadInt(2, 3, 2)        # 3+2sqrt2


def test_quadint_pow_matches_repeated_mul():
    for D, x, y in ((5, 1, 1), (2, 1, 1), (13, 3, 1)):
        u = QuadInt(D, x, y)
        acc = QuadInt(D, 2, 0) if D % 4 == 1 else QuadInt(D, 1, 0)
        for n in range(12):
            assert u ** n == acc
            acc = acc * u


def test_quadint_norm_multiplicative():
    a = QuadInt(13, 3, 1)
    b = QuadInt(13, 11, 3)
    assert (a * b).norm() == a.norm() * b.norm()


# -- fundamental units --------------------------------------------------------

FROZEN_UNITS = {
    2: (1, 1),    # 1+sqrt2
    5: (1, 1),    # (1+sqrt5)/2
    13: (3, 1),   # (3+sqrt13)/2
    29: (5, 1),   # (5+sqrt29)/2
    10: (3, 1),   # 3+sqrt10
    65: (16, 2),  # 8+sqrt65 in half-integral form
    3: (2, 1),    # 2+sqrt3, norm +1
}


def test_fundamental_unit_frozen():
    for D, (x, y) in FROZEN_UNITS.items():
        assert fundamental_unit(D) == QuadInt(D, x, y)


def _brute_minimal_unit(D):
    """Smallest unit > 1 by direct search on the y coordinate."""
    if D % 4 == 1:
        for y in range(1, 200000):
            for c in (-4, 4):
                t = D * y * y + c
                if t > 0 and is_square(t):
                    return QuadInt(D, isqrt(t), y)
    else:
        for y in range(1, 200000):
            for c in (-1, 1):
                t = D * y * y + c
                if t > 0 and is_square(t):
                    return QuadInt(D, isqrt(t), y)
    raise AssertionError(f"no unit found for D={D}")


def test_fundamental_unit_minimal_small_fields():
    for D in range(2, 60):
        if not is_squarefree(D):
            continue
        assert fundamental_unit(D) == _brute_minimal_unit(D)


def test_fundamental_unit_norm_sign_census():
    got = [D for D in range(2, 201)
           if is_squarefree(D) and fundamental_unit(D).norm() == -1]
    assert got == NORM_MINUS_ONE_DS


# -- conductor, class number, L-value ------------------------------------------

def test_conductor():
    assert conductor(5) == 5
    assert conductor(13) == 13
    assert conductor(2) == 8
    assert conductor(10) == 40
    assert conductor(29) == 29


def test_class_number_frozen():
    for D, h in ((2, 1), (5, 1), (13, 1), (29, 1), (10, 2), (65, 2), (85, 2)):
        assert class_number(D) == h


def test_L1_frozen_decimals():
    # regression anchors at 128 bits
    l1_5 = L1_direct(5, 128)
    assert abs(l1_5 - mpfr("0.4304089409640040388894332329506054254244", 160)) \
        < mpfr(2) ** -125
    l1_2 = L1_direct(2, 128)
    assert abs(l1_2 - mpfr("0.62322524014023051339402", 160)) < mpfr(10) ** -22


@pytest.mark.parametrize("D", [2, 5, 13, 17, 29])
def test_L1_matches_digamma_form(D):
    # independent oracle: L(1, chi) = -(1/q) sum_a chi(a) psi(a/q)
    q = conductor(D)
    with mpmath.workprec(160):
        ref = -sum(kronecker(q, a) * mpmath.psi(0, mpmath.mpf(a) / q)
                   for a in range(1, q)) / q
        mine = mpmath.mpf(str(L1_direct(D, 128)))
        assert abs(mine - ref) < mpmath.mpf(2) ** -120


def test_regulator_frozen_and_scales():
    L128 = regulator(fundamental_unit(5), 128)
    assert abs(L128 - mpfr("0.4812118250596034474977589134243684231358", 160)) \
        < mpfr(2) ** -126
    L256 = regulator(fundamental_unit(5), 256)
    assert abs(mpfr(L256, 320) - mpfr(L128, 320)) < mpfr(2) ** -126


# -- make_context gate ----------------------------------------------------------

def test_make_context_fields():
    ctx = make_context(5, 128)
    assert isinstance(ctx, FieldContext)
    assert (ctx.D, ctx.q, ctx.ell) == (5, 5, 4)
    assert ctx.norm_eps == -1
    assert ctx.class_number == 1
    assert ctx.divisor_count_D == 2
    assert ctx.precision == 128
    ctx2 = make_context(2, 192)
    assert (ctx2.q, ctx2.ell) == (8, 1)
    assert ctx2.precision == 192


def test_make_context_rejects_norm_plus_one():
    for D in (3, 6, 7, 11):
        with pytest.raises(UnsupportedFieldError, match="norm -1"):
            make_context(D)


def test_make_context_rejects_bad_D():
    for D in (12, 1, 0, -5, 50):
        with pytest.raises(DomainError):
            make_context(D)


def test_make_context_all_norm_minus_one_fields():
    # the constructor cross-checks L(1, chi_q) = 2 h log eps / sqrt(q)
    for D in NORM_MINUS_ONE_DS:
        ctx = make_context(D, 128)
        assert ctx.norm_eps == -1


def test_context_json_roundtrip():
    d = make_context(5, 128).to_json_dict()
    assert d["q"] == "5" and d["ell"] == "4" and d["class_number"] == "1"
    assert d["eps"] == {"x": "1", "y": "1", "denominator": "2"}
    assert d["log_eps"]["decimal"].startswith("0.481211825059603447497")

"""Ring laws, canonical text, and exact division for sparse polynomials."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algprog.polycore import (
    InexactDivision,
    MultiPoly,
    PolyError,
    VarRegistry,
    divexact,
    gcd_in_main_var,
    grlex_leading,
    homogenize_in_quotient,
    integer_normalize,
    poly_gcd,
    primitive_part_in,
    square_free_part,
    try_divexact,
)

REG = VarRegistry(["x", "y", "z"])
X, Y, Z = (MultiPoly.var(REG, REG.id_of(n)) for n in ("x", "y", "z"))


# -- hypothesis strategies --------------------------------------------------

coeffs = st.fractions(
    min_value=-6, max_value=6, max_denominator=4
).filter(lambda c: c != 0)


@st.composite
def polys(draw, max_terms=5, max_exp=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        mono = []
        for vid in range(3):
            e = draw(st.integers(0, max_exp))
            if e:
                mono.append((vid, e))
        terms[tuple(mono)] = draw(coeffs)
    return MultiPoly(REG, terms)


@st.composite
def points(draw):
    return {
        vid: draw(st.fractions(min_value=-5, max_value=5, max_denominator=3))
        for vid in range(3)
    }


# -- ring laws ---------------------------------------------------------------


@given(polys(), polys(), polys())
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p + MultiPoly.zero(REG) == p
    assert p * MultiPoly.const(REG, 1) == p
    assert p - p == MultiPoly.zero(REG)


@given(polys(), polys(), points())
def test_eval_is_ring_homomorphism(p, q, a):
    assert (p + q).eval(a) == p.eval(a) + q.eval(a)
    assert (p * q).eval(a) == p.eval(a) * q.eval(a)
    assert (p - q).eval(a) == p.eval(a) - q.eval(a)


@given(polys(), st.integers(0, 3))
def test_power_matches_repeated_product(p, k):
    expected = MultiPoly.const(REG, 1)
    for _ in range(k):
        expected = expected * p
    assert p**k == expected


@given(polys(), polys())
def test_derivative_product_rule(p, q):
    v = REG.id_of("x")
    lhs = (p * q).derivative(v)
    assert lhs == p.derivative(v) * q + p * q.derivative(v)


@given(polys())
def test_substitute_agrees_with_eval(p):
    v = REG.id_of("y")
    a = Fraction(3, 2)
    point = {REG.id_of("x"): Fraction(1), v: a, REG.id_of("z"): Fraction(-2)}
    assert p.substitute(v, a).eval(point) == p.eval(point)


@given(polys())
def test_coeffs_round_trip(p):
    v = REG.id_of("z")
    assert MultiPoly.from_coeffs(REG, v, p.coeffs_in(v)) == p


# -- canonical text -----------------------------------------------------------


def test_to_text_grlex_order():
    p = (Z**2 - X) * (Z**2 - X) * (Z**2 + 2 * X * Z - X)  # arbitrary product
    # grlex: highest total degree first, stable and re-parseable
    from algprog.radicals import polynomial_from_text

    text = p.to_text()
    assert polynomial_from_text(text, REG) == p


def test_to_text_golden():
    p = Z**6 - 3 * X * Z**4 - 2 * X * Z**3 + 3 * X**2 * Z**2 - 6 * X**2 * Z - X**3 + X**2
    assert p.to_text() == "z^6 - 3*x*z^4 - 2*x*z^3 + 3*x^2*z^2 - 6*x^2*z - x^3 + x^2"
    assert MultiPoly.zero(REG).to_text() == "0"
    assert (X - X).to_text() == "0"
    assert MultiPoly.const(REG, Fraction(-3, 4)).to_text() == "-3/4"
    assert (X * Y - 1).to_text() == "x*y - 1"


def test_registry_mismatch_rejected():
    other = VarRegistry(["x"])
    with pytest.raises(PolyError):
        X + MultiPoly.var(other, 0)


def test_registry_fresh_names():
    reg = VarRegistry(["x", "z"])
    assert reg.fresh("z") == "z2"
    reg.add("z2")
    assert reg.fresh("z") == "z3"


# -- division, gcd, square-free ----------------------------------------------


@given(polys(), polys())
def test_divexact_inverts_product(p, q):
    if q.is_zero():
        return
    assert divexact(p * q, q) == p


def test_divexact_rejects_inexact():
    with pytest.raises(InexactDivision):
        divexact(X * Y + 1, X)
    assert try_divexact(X * Y + 1, X) is None
    assert try_divexact(X * Y + X, X) == Y + 1


@given(polys())
def test_integer_normalize_is_proportional(p):
    if p.is_zero():
        return
    q = integer_normalize(p)
    from conftest import proportional

    assert proportional(p, q)
    assert q.terms[grlex_leading(q.terms)] > 0
    # integer coefficients with gcd 1
    cs = [c for c in q.terms.values()]
    assert all(c.denominator == 1 for c in cs)


@given(polys(), polys(), polys())
def test_gcd_common_factor(p, q, r):
    if p.is_zero() or q.is_zero() or r.is_zero():
        return
    g = poly_gcd(p * r, q * r)
    assert try_divexact(g, r) is not None or try_divexact(r, g) is not None
    assert try_divexact(p * r, g) is not None
    assert try_divexact(q * r, g) is not None


def test_gcd_in_main_var_golden():
    v = REG.id_of("x")
    g = gcd_in_main_var((X - Y) * (X + 1), (X - Y) * (X - 1), v)
    from conftest import proportional

    assert proportional(g, X - Y)


def test_square_free_part_strips_multiplicity():
    v = REG.id_of("x")
    p = (X - 1) ** 2 * (X - 2) * (X + Y) ** 3
    sf = square_free_part(p, v)
    from conftest import proportional

    assert proportional(sf, (X - 1) * (X - 2) * (X + Y))


def test_primitive_part_in_main_var():
    v = REG.id_of("z")
    p = (Y**2) * Z**2 - (Y**2) * X
    from conftest import proportional

    assert proportional(primitive_part_in(p, v), Z**2 - X)


# -- homogenization in the quotient variable ----------------------------------


def test_homogenize_in_quotient():
    v, t = REG.id_of("z"), REG.id_of("x")
    p = Z**2 + Z + 1
    h = homogenize_in_quotient(p, v, t, 2)
    assert h == Z**2 + Z * X + X**2
    with pytest.raises(PolyError):
        homogenize_in_quotient(p, v, t, 3)  # wrong degree
    with pytest.raises(PolyError):
        homogenize_in_quotient(Z + X, v, t, 1)  # t occurs already


@given(polys())
def test_homogenize_evaluates_as_quotient(p):
    v, t = REG.id_of("z"), REG.id_of("y")
    q = MultiPoly.from_coeffs(
        REG, v, {e: c.substitute(REG.id_of("y"), 1) for e, c in p.coeffs_in(v).items()}
    )
    if q.degree_in(v) < 1:
        return
    d = q.degree_in(v)
    h = homogenize_in_quotient(q, v, t, d)
    a, b = Fraction(5, 3), Fraction(7, 2)  # z = a/b with t = b
    point = {REG.id_of("x"): Fraction(2), v: a, t: b}
    lhs = h.eval(point)
    rhs = (b**d) * q.eval({REG.id_of("x"): Fraction(2), v: a / b, t: Fraction(0)})
    assert lhs == rhs

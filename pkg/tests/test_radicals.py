"""Parsing, normal form, and certified interval evaluation of radical
expressions."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algprog.polycore import VarRegistry
from algprog.radicals import (
    NOT_REAL,
    Add,
    EvalDomainError,
    ExprSyntaxError,
    Interval,
    Mul,
    NotPolynomial,
    Root,
    Var,
    distinct_radicals,
    eval_numeric,
    is_polynomial,
    normalize,
    parse,
    polynomial_from_text,
    rat_root_enclosure,
    structural_key,
    substitute_expr,
    to_polynomial,
    to_text,
    variables_of,
)


# -- parser ---------------------------------------------------------------------


def test_parse_precedence_and_shape():
    e = parse("x + y*z^2")
    assert isinstance(e, Add)
    assert isinstance(e.right, Mul)
    # semantics survive normalization even though the tree is reshaped
    point = {"x": Fraction(1), "y": Fraction(2), "z": Fraction(3)}
    v = eval_numeric(normalize(e), point)
    assert v.lo == v.hi == Fraction(19)


def test_sqrt_and_rational_exponent_agree():
    a = normalize(parse("sqrt(x)"))
    b = normalize(parse("x^(1/2)"))
    assert structural_key(a) == structural_key(b)
    assert isinstance(a, Root) and a.index == 2


def test_nested_roots_parse():
    e = normalize(parse("sqrt(x^2 + sqrt(y^2 + 1))"))
    rads = distinct_radicals(e)
    assert len(rads) == 2
    assert variables_of(e) == {"x", "y"}


def test_negative_exponent_rejected():
    # exponents are positive rationals; reciprocals are spelled with division
    with pytest.raises(ExprSyntaxError):
        parse("x^(-2)")
    e = normalize(parse("1/x^2"))
    v = eval_numeric(e, {"x": Fraction(2)})
    assert v.lo == v.hi == Fraction(1, 4)


@pytest.mark.parametrize(
    "bad",
    ["x +", "(x", "x^y", "sqrt", "sin(x)", "", "1..2", "x**2", "x ^ (1/0)"],
)
def test_syntax_errors(bad):
    with pytest.raises(ExprSyntaxError):
        parse(bad)


@pytest.mark.parametrize(
    "text",
    [
        "x + y",
        "x - y*z",
        "sqrt(x) + x^(1/3)",
        "(x + 1)/(y - 2)",
        "sqrt(1 + x^2) + x/y",
        "2/3*x^4 - 7",
        "sqrt(sqrt(x) + 1)",
    ],
)
def test_to_text_parse_round_trip(text):
    e = normalize(parse(text))
    again = normalize(parse(to_text(e)))
    assert structural_key(again) == structural_key(e)


def test_normalize_idempotent():
    for text in ["x^(2/3) + 1", "sqrt(x)*sqrt(x)", "x/(y/z)", "x^3"]:
        e = normalize(parse(text))
        assert structural_key(normalize(e)) == structural_key(e)


# -- polynomial bridge ------------------------------------------------------------


def test_polynomial_from_text_golden():
    reg = VarRegistry(["x", "y"])
    p = polynomial_from_text("(x + y)^2 - 4*x*y", reg)
    q = polynomial_from_text("x^2 - 2*x*y + y^2", reg)
    assert p == q


def test_is_polynomial():
    assert is_polynomial(normalize(parse("x^2 + 3*y - 1/2")))
    assert not is_polynomial(normalize(parse("sqrt(x) + 1")))
    assert not is_polynomial(normalize(parse("x/y")))
    assert is_polynomial(normalize(parse("x/2")))


def test_to_polynomial_rejects_radicals():
    reg = VarRegistry(["x"])
    with pytest.raises(NotPolynomial):
        to_polynomial(normalize(parse("sqrt(x)")), reg)


# -- radical bookkeeping ------------------------------------------------------------


def test_distinct_radicals_deduplicates():
    e = normalize(parse("sqrt(x) + sqrt(x)*sqrt(y)"))
    rads = distinct_radicals(e)
    keys = {structural_key(r) for r in rads}
    assert len(rads) == len(keys) == 2


def test_distinct_radicals_outermost_first():
    e = normalize(parse("sqrt(sqrt(x) + 1)"))
    rads = distinct_radicals(e)
    assert structural_key(rads[0]) == structural_key(e)
    assert len(rads) == 2


def test_substitute_expr_replaces_subtree():
    e = normalize(parse("sqrt(x) + y"))
    target = distinct_radicals(e)[0]
    out = substitute_expr(e, {target: Var("w")})
    assert structural_key(out) == structural_key(normalize(parse("w + y")))


# -- certified evaluation -------------------------------------------------------------


def test_eval_numeric_encloses_sqrt2():
    v = eval_numeric(normalize(parse("sqrt(x)")), {"x": Fraction(2)}, precision=80)
    assert isinstance(v, Interval)
    assert v.lo**2 <= 2 <= v.hi**2
    assert v.width() <= Fraction(1, 2**80)


def test_eval_numeric_exact_arithmetic():
    v = eval_numeric(normalize(parse("(x + 1)/(x - 1)")), {"x": Fraction(3)})
    assert v.lo == v.hi == Fraction(2)


def test_eval_numeric_odd_root_of_negative():
    v = eval_numeric(normalize(parse("x^(1/3)")), {"x": Fraction(-8)})
    assert v.lo <= -2 <= v.hi


def test_eval_numeric_not_real():
    assert eval_numeric(normalize(parse("sqrt(x)")), {"x": Fraction(-1)}) is NOT_REAL
    # not-real propagates through arithmetic
    assert (
        eval_numeric(normalize(parse("sqrt(x) + 100")), {"x": Fraction(-1)}) is NOT_REAL
    )


def test_eval_numeric_division_by_zero():
    with pytest.raises(EvalDomainError):
        eval_numeric(normalize(parse("1/x")), {"x": Fraction(0)})


def test_eval_numeric_missing_variable():
    from algprog.radicals import ExprError

    with pytest.raises(ExprError):
        eval_numeric(normalize(parse("x + y")), {"x": Fraction(1)})


@given(
    st.fractions(min_value=0, max_value=50, max_denominator=8),
    st.integers(2, 5),
)
def test_rat_root_enclosure_contains_root(a, r):
    iv = rat_root_enclosure(a, r, 64)
    assert iv.lo**r <= a <= iv.hi**r
    assert iv.width() <= Fraction(1, 2**64)


@given(st.fractions(min_value=-9, max_value=9, max_denominator=6))
def test_eval_matches_rational_identity(x):
    # (sqrt(x^2+1))^2 == x^2 + 1 holds for every rational x
    e = normalize(parse("sqrt(x^2 + 1)*sqrt(x^2 + 1)"))
    v = eval_numeric(e, {"x": x})
    assert v.lo <= x**2 + 1 <= v.hi

"""Defining polynomials: golden values, degree bookkeeping, reduction.

The golden polynomials below were cross-checked independently by substituting
the radical expression for z at a handful of rational points and certifying
the result is zero to 64 bits (`verify_defining` re-runs that check here).
"""

from fractions import Fraction

import pytest

from algprog.defpoly import (
    DefiningError,
    ReduceConfig,
    defining_polynomial,
    degree_bounds,
    probabilistic_zero_test,
    root_index_product,
)
from algprog.polycore import MultiPoly, VarRegistry
from algprog.radicals import normalize, parse, polynomial_from_text
from algprog.verify import verify_defining
from conftest import proportional


def golden(expr_text: str, poly_text: str) -> None:
    dp = defining_polynomial(expr_text)
    want = polynomial_from_text(poly_text, dp.poly.registry)
    assert proportional(dp.poly, want), dp.poly.to_text()
    assert verify_defining(expr_text, dp, samples=16).passed


# -- golden defining polynomials ---------------------------------------------------


def test_sqrt_x():
    golden("sqrt(x)", "z^2 - x")


def test_sum_of_square_and_cube_root():
    golden(
        "x^(1/2) + x^(1/3)",
        "x^2 - x^3 - 6*x^2*z + 3*x^2*z^2 - 2*x*z^3 - 3*x*z^4 + z^6",
    )


def test_difference_of_square_and_cube_root():
    golden(
        "x^(1/2) - x^(1/3)",
        "x^2 - x^3 + 6*x^2*z + 3*x^2*z^2 + 2*x*z^3 - 3*x*z^4 + z^6",
    )


def test_sqrt_of_one_plus_square():
    golden("sqrt(1 + x^2)", "z^2 - 1 - x^2")


def test_sqrt_plus_quotient():
    golden("sqrt(1 + x^2) + x/y", "x^2 - y^2 - x^2*y^2 - 2*x*y*z + y^2*z^2")


def test_sum_of_shifted_roots():
    golden(
        "sqrt(x - 1) + sqrt(y - 1)",
        "x^2 - 2*x*y + y^2 + 4*z^2 - 2*x*z^2 - 2*y*z^2 + z^4",
    )


def test_nested_root_of_sum():
    golden("sqrt(x^2 + sqrt(y^2 + 1))", "z^4 - 2*x^2*z^2 - y^2 + x^4 - 1")


def test_doubly_nested_square_root():
    golden("sqrt(sqrt(x) + 1)", "z^4 - 2*z^2 - x + 1")


# -- degree bookkeeping ---------------------------------------------------------------


def test_z_degree_equals_index_product_when_minimal():
    for text, deg in [
        ("x^(1/2) + x^(1/3)", 6),
        ("sqrt(sqrt(x) + 1)", 4),
        ("sqrt(x)", 2),
        ("sqrt(x - 1) + sqrt(y - 1)", 4),
    ]:
        dp = defining_polynomial(text)
        assert dp.poly.degree_in(dp.z) == deg
        assert dp.predicted_z_degree_bound == deg
        assert root_index_product(normalize(parse(text))) == deg


def test_degree_bounds_cover_observed():
    for text in [
        "sqrt(x) + x^(1/3)",
        "sqrt(1 + x^2) + x/y",
        "sqrt(x)*sqrt(x)",
        "sqrt(sqrt(x) + 1) - x",
    ]:
        dp = defining_polynomial(text)
        b = degree_bounds(text)
        assert dp.poly.degree_in(dp.z) <= b.z_degree
        reg = dp.poly.registry
        for name, bound in b.var_degrees.items():
            assert dp.poly.degree_in(reg.id_of(name)) <= bound


def test_reduction_strips_extraneous_factor():
    dp = defining_polynomial("sqrt(x)*sqrt(x)")
    reg = dp.poly.registry
    want = polynomial_from_text("z^2 - x^2", reg)
    assert proportional(dp.poly, want)
    assert dp.poly.degree_in(dp.z) == 2 < dp.predicted_z_degree_bound == 4
    assert len(dp.reduction_log) >= 1
    assert dp.reduced


def test_polynomial_input_gives_linear_z():
    dp = defining_polynomial("x^2 - 3*x + 1")
    reg = dp.poly.registry
    assert proportional(
        dp.poly, polynomial_from_text("z - x^2 + 3*x - 1", reg)
    )


# -- error handling and configuration ---------------------------------------------------


def test_z_name_collision_rejected():
    with pytest.raises(DefiningError):
        defining_polynomial("sqrt(z) + 1")
    dp = defining_polynomial("sqrt(z) + 1", z_name="w")
    assert dp.poly.registry.name_of(dp.z) == "w"


def test_explicit_registry_is_extended():
    reg = VarRegistry(["x", "pad"])
    dp = defining_polynomial("sqrt(x + 1)", registry=reg)
    assert dp.poly.registry is reg
    assert "z" in reg
    assert reg.id_of("x") == 0


def test_reduce_config_determinism():
    a = defining_polynomial("sqrt(x) + sqrt(y)", cfg=ReduceConfig(seed=5))
    b = defining_polynomial("sqrt(x) + sqrt(y)", cfg=ReduceConfig(seed=5))
    assert a.poly.to_text() == b.poly.to_text()
    assert a.reduction_log == b.reduction_log


# -- the probabilistic zero test ----------------------------------------------------------


def test_probabilistic_zero_test_accepts_true_defining():
    dp = defining_polynomial("sqrt(x)")
    f = normalize(parse("sqrt(x)"))
    assert probabilistic_zero_test(dp.poly, f, dp.poly.registry, dp.z)


def test_probabilistic_zero_test_rejects_wrong_poly():
    dp = defining_polynomial("sqrt(x)")
    reg = dp.poly.registry
    wrong = dp.poly + MultiPoly.const(reg, Fraction(1))
    f = normalize(parse("sqrt(x)"))
    assert not probabilistic_zero_test(wrong, f, reg, dp.z)

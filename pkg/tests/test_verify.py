"""Independent auditing layer: Sturm isolation, sign-at-root queries, and the
certificate re-checks.  Everything here runs in exact rational arithmetic."""

import dataclasses
import random
from fractions import Fraction

from algprog.defpoly import defining_polynomial
from algprog.isolation import IsolateConfig, SignCondition, isolate
from algprog.polycore import MultiPoly, VarRegistry
from algprog.radicals import normalize, parse, polynomial_from_text
from algprog.verify import (
    audit_degrees,
    cauchy_root_bound,
    isolate_real_roots,
    isolate_real_roots_uni,
    refine_root,
    relation_holds,
    root_selection,
    sample_in_component,
    selection_matches_f,
    sign_at_root,
    sturm_count,
    sturm_sequence,
    uni_derivative,
    uni_eval,
    uni_from_poly,
    uni_gcd,
    verify_certificate,
    verify_defining,
)

REG = VarRegistry(["x"])
X = MultiPoly.var(REG, 0)
XID = REG.id_of("x")


def uni(*coeffs):
    return [Fraction(c) for c in coeffs]


# -- univariate scaffolding -----------------------------------------------------


def test_uni_round_trip_and_eval():
    p = X**3 - 2 * X + 1
    c = uni_from_poly(p, XID)
    assert c == uni(1, -2, 0, 1)
    assert uni_eval(c, Fraction(2)) == p.eval({XID: Fraction(2)})
    assert uni_derivative(c) == uni(-2, 0, 3)


def test_uni_gcd():
    # (x-1)(x-2) and (x-1)(x-3) share exactly (x-1)
    a = uni(2, -3, 1)
    b = uni(3, -4, 1)
    g = uni_gcd(a, b)
    assert len(g) == 2
    assert uni_eval(g, Fraction(1)) == 0


def test_sturm_sequence_golden():
    p = X**2 - 2
    chain = sturm_sequence(p)
    assert len(chain) == 3
    assert chain[0] == p
    from conftest import proportional

    assert proportional(chain[1], 2 * X)
    assert chain[2].is_constant() and chain[2].constant_value() > 0


def test_sturm_count_on_intervals():
    chain = [uni_from_poly(q, XID) for q in sturm_sequence(X**3 - X)]
    assert sturm_count(chain, Fraction(-2), Fraction(2)) == 3
    assert sturm_count(chain, Fraction(1, 2), Fraction(2)) == 1
    assert sturm_count(chain, Fraction(5), Fraction(9)) == 0


def test_cauchy_root_bound():
    c = uni(-6, 11, -6, 1)  # roots 1, 2, 3
    b = cauchy_root_bound(c)
    assert b >= 3


# -- real root isolation ----------------------------------------------------------


def check_isolation(p, roots):
    iso = isolate_real_roots(p)
    assert len(iso.intervals) == len(roots)
    sf = uni_from_poly(iso.poly, XID)
    for (lo, hi), r in zip(iso.intervals, sorted(roots)):
        assert lo <= r <= hi
        if lo != hi:
            assert uni_eval(sf, lo) * uni_eval(sf, hi) < 0


def test_isolate_simple_quadratic():
    iso = isolate_real_roots(X**2 - 2)
    assert len(iso.intervals) == 2
    lo0, hi0 = iso.intervals[0]
    lo1, hi1 = iso.intervals[1]
    assert hi0 <= lo1  # disjoint and ordered
    assert lo0**2 <= 2 or hi0**2 <= 2  # brackets -sqrt(2)


def test_isolate_no_real_roots():
    assert isolate_real_roots(X**2 + 1).intervals == ()


def test_isolate_rational_roots():
    check_isolation(X**3 - X, [Fraction(-1), Fraction(0), Fraction(1)])


def test_isolate_handles_multiplicity():
    check_isolation((X - 1) ** 2 * (X + 2), [Fraction(1), Fraction(-2)])


def test_isolate_clustered_roots():
    p = (X - 1) * (X - Fraction(1001, 1000))
    check_isolation(p, [Fraction(1), Fraction(1001, 1000)])


def test_isolate_real_roots_uni_agrees():
    got = isolate_real_roots_uni(uni(-2, 0, 1))
    assert len(got) == 2


def test_refine_root():
    c = uni(-2, 0, 1)
    lo, hi = refine_root(c, Fraction(1), Fraction(2), Fraction(1, 2**40))
    assert hi - lo <= Fraction(1, 2**40)
    assert lo**2 <= 2 <= hi**2
    # rational root collapses to a point
    lo, hi = refine_root(uni(-1, 0, 1), Fraction(0), Fraction(2), Fraction(1, 8))
    assert lo == hi == 1


def test_sign_at_root():
    sf = uni(-2, 0, 1)  # sqrt(2) lives in (1, 2)
    lo, hi = Fraction(1), Fraction(2)
    assert sign_at_root(uni(-1, 1), sf, lo, hi) == 1  # x - 1 > 0 at sqrt 2
    assert sign_at_root(uni(-2, 1), sf, lo, hi) == -1  # x - 2 < 0
    assert sign_at_root(uni(-2, 0, 1), sf, lo, hi) == 0  # vanishes there
    assert sign_at_root(uni(-2, 0, 3), sf, lo, hi) == 1  # 3x^2 - 2 > 0


def test_relation_holds():
    assert relation_holds(Fraction(1), ">")
    assert not relation_holds(Fraction(0), ">")
    assert relation_holds(Fraction(0), ">=")
    assert relation_holds(Fraction(0), "=")
    assert relation_holds(Fraction(-3), "<")
    assert not relation_holds(Fraction(-3), ">=")


# -- defining-polynomial audits ------------------------------------------------------


def test_verify_defining_passes_and_reports_interval():
    dp = defining_polynomial("sqrt(1 + x^2)")
    report = verify_defining("sqrt(1 + x^2)", dp, samples=32)
    assert report.passed
    line = report.checks[0]
    assert line.samples_used == 32
    assert line.widest_interval is not None


def test_verify_defining_rejects_corruption():
    dp = defining_polynomial("sqrt(x)")
    bad = dataclasses.replace(dp, poly=dp.poly + 1)
    report = verify_defining("sqrt(x)", bad, samples=16)
    assert not report.passed
    assert report.checks[0].witness is not None


def test_audit_degrees_pass_and_fail():
    dp = defining_polynomial("x^(1/2) + x^(1/3)")
    assert audit_degrees(dp).passed
    z = MultiPoly.var(dp.poly.registry, dp.z)
    inflated = dataclasses.replace(dp, poly=dp.poly * z)
    assert not audit_degrees(inflated).passed


# -- certificate re-checking -----------------------------------------------------------


def test_verify_certificate_sqrt():
    dp = defining_polynomial("sqrt(x)")
    cert = isolate("sqrt(x)", dp, cfg=IsolateConfig(samples=8))
    report = verify_certificate("sqrt(x)", cert, samples_per_component=12)
    assert report.passed


def test_verify_certificate_rejects_flipped_condition():
    dp = defining_polynomial("sqrt(x)")
    cert = isolate("sqrt(x)", dp, cfg=IsolateConfig(samples=8))
    entry = cert.entries[0]
    flipped = tuple(
        SignCondition(c.poly, "<") if c.rel == ">" else c
        for c in entry.root_conditions
    )
    bad = dataclasses.replace(
        cert, entries=(dataclasses.replace(entry, root_conditions=flipped),)
    )
    report = verify_certificate("sqrt(x)", bad, samples_per_component=6)
    assert not report.passed


def test_verify_certificate_rejects_wrong_defining():
    dp = defining_polynomial("sqrt(x)")
    cert = isolate("sqrt(x)", dp, cfg=IsolateConfig(samples=8))
    bad = dataclasses.replace(cert, defining=cert.defining + 1)
    report = verify_certificate("sqrt(x)", bad, samples_per_component=6)
    assert not report.passed


# -- root selection at a point -----------------------------------------------------------


def test_root_selection_picks_positive_branch():
    dp = defining_polynomial("sqrt(x)")
    reg = dp.poly.registry
    conds = (SignCondition(polynomial_from_text("z", reg), ">"),)
    sel = root_selection(dp.poly, dp.z, conds, {reg.id_of("x"): Fraction(4)})
    assert len(sel.passing) == 1
    lo, hi = sel.intervals[sel.passing[0]]
    assert lo <= 2 <= hi


def test_selection_matches_f():
    dp = defining_polynomial("sqrt(x)")
    reg = dp.poly.registry
    conds = (SignCondition(polynomial_from_text("z", reg), ">"),)
    point = {reg.id_of("x"): Fraction(9, 4)}
    sel = root_selection(dp.poly, dp.z, conds, point)
    f = normalize(parse("sqrt(x)"))
    assert selection_matches_f(f, sel, {"x": Fraction(9, 4)}, 64)


def test_sample_in_component():
    dp = defining_polynomial("sqrt(x)")
    cert = isolate("sqrt(x)", dp, cfg=IsolateConfig(samples=8))
    comp = cert.entries[0].component
    rng = random.Random(0)
    for _ in range(20):
        pt = sample_in_component(comp, rng)
        for cond in comp.conditions:
            assert relation_holds(cond.poly.eval(pt), cond.rel)

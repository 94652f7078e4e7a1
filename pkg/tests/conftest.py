"""Shared helpers for the test suite.

Most golden values here are either worked out by hand (small resultants,
Sturm chains) or frozen from an independent computation noted next to the
value; proportionality up to a nonzero rational factor is the right notion of
equality for resultant-derived polynomials, so `proportional` is used
throughout instead of `==` where a scalar factor is immaterial.
"""

from fractions import Fraction

from hypothesis import settings

from algprog.polycore import MultiPoly

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")


def proportional(p: MultiPoly, q: MultiPoly) -> bool:
    """True when p == c * q for some nonzero rational c."""
    if p.is_zero() or q.is_zero():
        return p.is_zero() and q.is_zero()
    if set(p.terms) != set(q.terms):
        return False
    m = next(iter(p.terms))
    c = p.terms[m] / q.terms[m]
    if c == 0:
        return False
    return all(cp == c * q.terms[mm] for mm, cp in p.terms.items())


def divides(d: MultiPoly, p: MultiPoly) -> bool:
    """True when d divides p exactly."""
    from algprog.polycore import try_divexact

    return try_divexact(p, d) is not None


def strip_factor(p: MultiPoly, d: MultiPoly) -> MultiPoly:
    """Divide out every copy of d from p."""
    from algprog.polycore import try_divexact

    while True:
        q = try_divexact(p, d)
        if q is None:
            return p
        p = q


def frac(a, b=1) -> Fraction:
    return Fraction(a, b)

"""Independent oracles for the rest of the pipeline.

Everything in this module is exact: real roots of univariate polynomials are
isolated with Sturm sequences over rationals, signs of polynomials at
algebraic roots are decided by interval refinement that terminates because the
root is simple, and certificates are re-checked from scratch rather than by
trusting any interval the isolation code produced.  That makes these checks
usable as oracles for the modules they audit.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import radicals
from .defpoly import (
    DefiningPolynomial,
    SamplingError,
    degree_bounds,
    sample_real_point,
)
from .polycore import (
    MultiPoly,
    PolyError,
    VarId,
    VarRegistry,
    integer_normalize,
    square_free_part,
)
from .radicals import NOT_REAL, EvalDomainError, Expr, Interval, eval_numeric


# ---------------------------------------------------------------------------
# Dense univariate polynomials as Fraction coefficient lists (index = power).
# The multivariate machinery is overkill once a sample point has been
# substituted in, and Sturm chains want cheap arithmetic.
# ---------------------------------------------------------------------------

Uni = list[Fraction]


def _uni_trim(c: Uni) -> Uni:
    while c and c[-1] == 0:
        c.pop()
    return c


def uni_from_poly(p: MultiPoly, v: VarId) -> Uni:
    """Coefficient list of `p` viewed as univariate in `v`.

    Raises PolyError when a coefficient still involves another variable.
    """
    coeffs = p.coeffs_in(v)
    out: Uni = [Fraction(0)] * (max(coeffs) + 1 if coeffs else 0)
    for e, q in coeffs.items():
        if not q.is_constant():
            raise PolyError("polynomial is not univariate after substitution")
        out[e] = q.constant_value()
    return _uni_trim(out)


def uni_to_poly(c: Sequence[Fraction], v: VarId, registry: VarRegistry) -> MultiPoly:
    acc = MultiPoly.zero(registry)
    x = MultiPoly.var(registry, v)
    for e, coeff in enumerate(c):
        if coeff:
            acc = acc + x ** e * MultiPoly.const(registry, coeff)
    return acc


def uni_eval(c: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for coeff in reversed(c):
        acc = acc * x + coeff
    return acc


def uni_derivative(c: Sequence[Fraction]) -> Uni:
    return _uni_trim([c[e] * e for e in range(1, len(c))])


def _uni_scale_reduce(c: Uni) -> Uni:
    # Multiply by a positive rational so coefficients become coprime integers;
    # keeps Sturm chains from drowning in huge numerators.  Sign is preserved.
    if not c:
        return c
    den = 1
    for coeff in c:
        den = den * coeff.denominator // _gcd(den, coeff.denominator)
    ints = [int(coeff * den) for coeff in c]
    g = 0
    for n in ints:
        g = _gcd(g, abs(n))
    return [Fraction(n // g) for n in ints]


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a if a else 1


def uni_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Uni, Uni]:
    if not b:
        raise PolyError("univariate division by zero")
    rem = list(a)
    quo: Uni = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(rem) >= len(b) and _uni_trim(rem):
        shift = len(rem) - len(b)
        factor = rem[-1] / lead
        quo[shift] = factor
        for i, coeff in enumerate(b):
            rem[shift + i] -= factor * coeff
        rem.pop()
        _uni_trim(rem)
    return _uni_trim(quo), _uni_trim(rem)


def uni_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Uni:
    """Monic greatest common divisor (constant 1 for coprime inputs)."""
    x, y = _uni_trim(list(a)), _uni_trim(list(b))
    while y:
        x, y = y, uni_divmod(x, y)[1]
    if not x:
        return []
    lead = x[-1]
    return [coeff / lead for coeff in x]


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


# ---------------------------------------------------------------------------
# Sturm sequences and root isolation.
# ---------------------------------------------------------------------------


def _sturm_chain(c: Uni) -> list[Uni]:
    chain = [_uni_scale_reduce(list(c)), _uni_scale_reduce(uni_derivative(c))]
    while chain[-1]:
        rem = uni_divmod(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append(_uni_scale_reduce([-x for x in rem]))
    return chain


def sturm_sequence(p: MultiPoly, v: VarId | None = None) -> list[MultiPoly]:
    """Canonical Sturm chain p, p', then negated remainders.

    The input must be univariate and nonzero; callers wanting root counts for
    non-square-free polynomials should take the square-free part first.  (The
    bisection routines below use a scaled variant of this chain internally;
    positive scaling never changes sign variations.)
    """
    if p.is_zero():
        raise PolyError("Sturm sequence of the zero polynomial")
    if v is None:
        v = _sole_variable(p)
    c = uni_from_poly(p, v)
    chain = [list(c), uni_derivative(c)]
    while chain[-1]:
        rem = uni_divmod(chain[-2], chain[-1])[1]
        if not rem:
            break
        chain.append([-x for x in rem])
    return [uni_to_poly(cc, v, p.registry) for cc in chain if cc]


def _sole_variable(p: MultiPoly) -> VarId:
    present = p.vars_present()
    if len(present) > 1:
        raise PolyError("expected a univariate polynomial")
    return next(iter(present)) if present else 0


def _variations(chain: Sequence[Uni], x: Fraction) -> int:
    signs = [s for s in (_sign(uni_eval(c, x)) for c in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(chain: Sequence[Uni], lo: Fraction, hi: Fraction) -> int:
    """Number of distinct real roots in the open interval (lo, hi).

    Endpoints must not be roots of the first chain element.
    """
    return _variations(chain, lo) - _variations(chain, hi)


def cauchy_root_bound(c: Sequence[Fraction]) -> Fraction:
    """Strict bound: every real root r of the polynomial has |r| < bound."""
    if len(c) <= 1:
        return Fraction(1)
    lead = abs(c[-1])
    return Fraction(1) + max(abs(coeff) / lead for coeff in c[:-1])


_SPLIT_OFFSETS = [
    Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 5),
    Fraction(2, 5), Fraction(3, 5), Fraction(4, 5), Fraction(1, 7),
    Fraction(3, 7), Fraction(5, 7), Fraction(6, 7), Fraction(1, 11),
]


def _split_point(c: Uni, lo: Fraction, hi: Fraction) -> Fraction:
    # A point strictly inside (lo, hi) that is not a root; the polynomial has
    # finitely many roots, so one of the fixed offsets always works.
    for t in _SPLIT_OFFSETS:
        m = lo + (hi - lo) * t
        if uni_eval(c, m) != 0:
            return m
    raise PolyError("could not find a non-root split point")  # pragma: no cover


@dataclass(frozen=True)
class RootIsolation:
    """Square-free polynomial plus disjoint open intervals, one real root each."""

    poly: MultiPoly
    intervals: tuple[tuple[Fraction, Fraction], ...]


def isolate_real_roots(p: MultiPoly, v: VarId | None = None) -> RootIsolation:
    """Isolate every real root of `p` in disjoint rational intervals.

    The polynomial is reduced to its square-free part first, so multiple roots
    are isolated once.  Interval endpoints are never roots.
    """
    if p.is_zero():
        raise PolyError("cannot isolate roots of the zero polynomial")
    if v is None:
        v = _sole_variable(p)
    sf = square_free_part(p, v) if p.degree_in(v) >= 1 else integer_normalize(p)
    c = uni_from_poly(sf, v)
    if len(c) <= 1:
        return RootIsolation(sf, ())
    chain = _sturm_chain(c)
    bound = cauchy_root_bound(c)
    found: list[tuple[Fraction, Fraction]] = []
    work = [(-bound, bound)]
    while work:
        lo, hi = work.pop()
        n = sturm_count(chain, lo, hi)
        if n == 0:
            continue
        if n == 1:
            found.append((lo, hi))
            continue
        m = _split_point(c, lo, hi)
        work.append((lo, m))
        work.append((m, hi))
    found.sort()
    return RootIsolation(sf, tuple(found))


def refine_root(
    c: Sequence[Fraction], lo: Fraction, hi: Fraction, width: Fraction
) -> tuple[Fraction, Fraction]:
    """Shrink an isolating interval of a simple root below `width` by bisection.

    A rational root discovered at a midpoint collapses the interval to a point.
    """
    s_lo = _sign(uni_eval(c, lo))
    while hi - lo > width:
        m = (lo + hi) / 2
        s_m = _sign(uni_eval(c, m))
        if s_m == 0:
            return m, m
        if s_m == s_lo:
            lo = m
        else:
            hi = m
    return lo, hi


def _interval_eval(c: Sequence[Fraction], iv: Interval) -> Interval:
    acc = Interval.point(Fraction(0))
    for coeff in reversed(list(c)):
        acc = acc * iv + Interval.point(coeff)
    return acc


def sign_at_root(
    q: Sequence[Fraction],
    p: Sequence[Fraction],
    lo: Fraction,
    hi: Fraction,
) -> int:
    """Exact sign of q at the unique root of square-free p inside (lo, hi).

    Decides zero via gcd(p, q) — any common root inside the interval must be
    that root — and otherwise refines the interval until interval arithmetic
    certifies the sign of q on it.
    """
    if lo == hi:
        return _sign(uni_eval(q, lo))
    q = _uni_trim(list(q))
    if not q:
        return 0
    g = uni_gcd(p, q)
    if len(g) > 1:
        chain = _sturm_chain(g)
        a, b = lo, hi
        # Endpoints of the isolating interval are non-roots of p, hence of g.
        if sturm_count(chain, a, b) >= 1:
            return 0
    while True:
        enclosure = _interval_eval(q, Interval(lo, hi))
        if not enclosure.contains_zero():
            return _sign(enclosure.lo)
        lo, hi = refine_root(p, lo, hi, (hi - lo) / 2)
        if lo == hi:
            return _sign(uni_eval(q, lo))


# ---------------------------------------------------------------------------
# Reports.
# ---------------------------------------------------------------------------


@dataclass
class CheckLine:
    check: str
    status: str
    witness: str | None = None
    widest_interval: tuple[str, str] | None = None
    samples_used: int = 0

    def as_record(self) -> dict:
        out: dict = {"check": self.check, "status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.widest_interval is not None:
            out["widest_interval"] = list(self.widest_interval)
        out["samples_used"] = self.samples_used
        return out


@dataclass
class VerifyReport:
    checks: list[CheckLine] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(line.status == "pass" for line in self.checks)

    def add(self, line: CheckLine) -> None:
        self.checks.append(line)

    def to_json(self) -> str:
        return json.dumps(
            {"passed": self.passed, "checks": [c.as_record() for c in self.checks]},
            indent=2,
        )


# ---------------------------------------------------------------------------
# Defining-polynomial verification: p(f(a), a) must be certifiably zero.
# ---------------------------------------------------------------------------


def _as_expr(f: Expr | str) -> Expr:
    if isinstance(f, str):
        f = radicals.parse(f)
    return radicals.normalize(f)


def _zero_enclosure_at(
    dp: DefiningPolynomial,
    point: Mapping[str, Fraction],
    precision: int,
) -> Interval | None:
    """Enclose p(f(a), a) with width below 2^-precision, or None if not real."""
    registry = dp.poly.registry
    by_id = {registry.id_of(n): v for n, v in point.items()}
    coeffs = {e: q.eval(by_id) for e, q in dp.poly.coeffs_in(dp.z).items()}
    c = [Fraction(0)] * (max(coeffs) + 1)
    for e, val in coeffs.items():
        c[e] = val
    target = Fraction(1, 2 ** precision)
    bits = precision + 1
    for _ in range(radicals.MAX_PRECISION_DOUBLINGS):
        value = eval_numeric(dp.source, point, bits)
        if value is NOT_REAL:
            return None
        enclosure = _interval_eval(c, value)
        if enclosure.width() <= target:
            return enclosure
        bits *= 2
    raise EvalDomainError("could not refine p(f(a), a) below the tolerance")


def verify_defining(
    f: Expr | str,
    dp: DefiningPolynomial,
    samples: int = 32,
    precision: int = 64,
    seed: int = 0,
) -> VerifyReport:
    """Certify p(f(a), a) = 0 at random real-valued rational points.

    Each sample produces an interval around p(f(a), a) of width at most
    2^-precision; the check fails the moment one such interval excludes zero.
    """
    f = _as_expr(f)
    rng = random.Random(seed)
    report = VerifyReport()
    widest: Interval | None = None
    for i in range(samples):
        point = sample_real_point(f, rng, precision, max_tries=400)
        enclosure = _zero_enclosure_at(dp, point, precision)
        if enclosure is None:  # pragma: no cover - sampler filters these
            continue
        if widest is None or enclosure.width() > widest.width():
            widest = enclosure
        if not enclosure.contains_zero():
            report.add(
                CheckLine(
                    check="defining-polynomial substitution",
                    status="fail",
                    witness=f"sample {i}: {_point_text(point)} -> "
                    f"[{enclosure.lo}, {enclosure.hi}]",
                    samples_used=i + 1,
                )
            )
            return report
    report.add(
        CheckLine(
            check="defining-polynomial substitution",
            status="pass",
            widest_interval=(str(widest.lo), str(widest.hi)) if widest else None,
            samples_used=samples,
        )
    )
    return report


def _point_text(point: Mapping[str, Fraction]) -> str:
    return "(" + ", ".join(f"{n}={point[n]}" for n in sorted(point)) + ")"


# ---------------------------------------------------------------------------
# Certificate verification.
# ---------------------------------------------------------------------------

_REL_TESTS = {
    ">": lambda s: s > 0,
    "<": lambda s: s < 0,
    "=": lambda s: s == 0,
    ">=": lambda s: s >= 0,
    "<=": lambda s: s <= 0,
    "!=": lambda s: s != 0,
}


def relation_holds(value: Fraction, rel: str) -> bool:
    try:
        return _REL_TESTS[rel](_sign(value))
    except KeyError:
        raise PolyError(f"unknown relation {rel!r}") from None


@dataclass(frozen=True)
class RootSelection:
    """Roots of the defining polynomial at one sample, tagged by condition."""

    square_free: tuple[Fraction, ...]
    intervals: tuple[tuple[Fraction, Fraction], ...]
    passing: tuple[int, ...]


def root_selection(
    defining: MultiPoly,
    z: VarId,
    root_conditions: Iterable,
    point: Mapping[VarId, Fraction],
) -> RootSelection:
    """Isolate the real roots of p(z, a) and test every sign condition exactly.

    `root_conditions` are duck-typed: objects with `poly` and `rel`
    attributes.  The single equality condition is the defining polynomial
    itself and is skipped (it holds at every root by construction).
    """
    uni = _substituted_uni(defining, z, point)
    if len(uni) <= 1:
        raise PolyError("defining polynomial degenerates at the sample point")
    sf = _square_free_uni(uni)
    isolation = _isolate_square_free(sf)
    strict = [c for c in root_conditions if c.rel != "="]
    passing = []
    for idx, (lo, hi) in enumerate(isolation):
        ok = True
        for cond in strict:
            cq = _substituted_uni(cond.poly, z, point)
            s = sign_at_root(cq, sf, lo, hi)
            if not _REL_TESTS[cond.rel](s):
                ok = False
                break
        if ok:
            passing.append(idx)
    return RootSelection(tuple(sf), tuple(isolation), tuple(passing))


def isolate_real_roots_uni(c: Sequence[Fraction]) -> list[tuple[Fraction, Fraction]]:
    """isolate_real_roots for a bare coefficient list, square-freeing first."""
    return _isolate_square_free(_square_free_uni(c))


def _isolate_square_free(sf: Uni) -> list[tuple[Fraction, Fraction]]:
    if len(sf) <= 1:
        return []
    chain = _sturm_chain(sf)
    bound = cauchy_root_bound(sf)
    out: list[tuple[Fraction, Fraction]] = []
    work = [(-bound, bound)]
    while work:
        lo, hi = work.pop()
        n = sturm_count(chain, lo, hi)
        if n == 0:
            continue
        if n == 1:
            out.append((lo, hi))
            continue
        m = _split_point(sf, lo, hi)
        work.append((lo, m))
        work.append((m, hi))
    out.sort()
    return out


def _substituted_uni(
    p: MultiPoly, z: VarId, point: Mapping[VarId, Fraction]
) -> Uni:
    coeffs = p.coeffs_in(z)
    if not coeffs:
        return []
    c = [Fraction(0)] * (max(coeffs) + 1)
    for e, q in coeffs.items():
        c[e] = q.eval(point)
    return _uni_trim(c)


def _square_free_uni(c: Sequence[Fraction]) -> Uni:
    c = _uni_trim(list(c))
    g = uni_gcd(c, uni_derivative(c))
    sf = uni_divmod(c, g)[0] if len(g) > 1 else list(c)
    return _uni_scale_reduce(sf)


def selection_matches_f(
    f: Expr,
    selection: RootSelection,
    point_by_name: Mapping[str, Fraction],
    tol_bits: int,
) -> bool:
    """True when the unique passing root overlaps f(a) at tolerance 2^-tol_bits."""
    if len(selection.passing) != 1:
        return False
    value = eval_numeric(f, point_by_name, tol_bits)
    if value is NOT_REAL:
        return False
    sf = list(selection.square_free)
    lo, hi = selection.intervals[selection.passing[0]]
    lo, hi = refine_root(sf, lo, hi, Fraction(1, 2 ** tol_bits))
    return lo <= value.hi and value.lo <= hi


def sample_in_component(
    component,
    rng: random.Random,
    radius: Fraction = Fraction(1),
    max_tries: int = 500,
) -> dict[VarId, Fraction]:
    """A random rational point near the component's sample where all its
    conditions hold exactly (rejection sampling in the anchor box)."""
    anchor = dict(component.sample)
    for _ in range(max_tries):
        point = {
            v: a + radius * Fraction(rng.randint(-40, 40), 40)
            for v, a in anchor.items()
        }
        if all(
            relation_holds(c.poly.eval(point), c.rel) for c in component.conditions
        ):
            return point
    raise SamplingError(
        f"rejection sampling exhausted near {component.label or 'component'}"
    )


def verify_certificate(
    f: Expr | str,
    cert,
    samples_per_component: int = 8,
    tol_bits: int = 64,
    seed: int = 0,
    sample_radius: Fraction = Fraction(1),
) -> VerifyReport:
    """Re-check an isolation certificate from scratch, exactly.

    For every entry, sample points satisfying the component conditions, then
    isolate all real roots of the defining polynomial at each point and decide
    every sign condition with rational arithmetic.  Exactly one root may pass,
    and its isolating interval must overlap an enclosure of f at the sample.
    The certificate object is duck-typed (attributes `defining`, `z`,
    `entries`, and per-entry `component` / `root_conditions`), so this module
    never imports the code it is auditing.
    """
    f = _as_expr(f)
    registry = cert.defining.registry
    rng = random.Random(seed)
    report = VerifyReport()
    for entry in cert.entries:
        comp = entry.component
        label = comp.label or "component"
        used = 0
        tries = 0
        failure: str | None = None
        # Component conditions may hold beyond the component itself (they are
        # necessary, not sufficient); a drawn point where f is not even real
        # is certainly outside and is redrawn rather than counted.
        while used < samples_per_component and tries < 4 * samples_per_component:
            point = (
                dict(comp.sample)
                if tries == 0
                else sample_in_component(comp, rng, sample_radius)
            )
            tries += 1
            named = {registry.name_of(v): val for v, val in point.items()}
            try:
                value = eval_numeric(f, named, tol_bits)
            except EvalDomainError:
                value = None
            if value is NOT_REAL or value is None:
                if tries == 1:
                    failure = f"f is not real at the component sample "
                    failure += _point_text(named)
                    break
                continue
            used += 1
            selection = root_selection(
                cert.defining, cert.z, entry.root_conditions, point
            )
            if len(selection.passing) != 1:
                failure = (
                    f"{len(selection.passing)} roots satisfy the conditions at "
                    f"{_point_text(named)}"
                )
                break
            if not selection_matches_f(f, selection, named, tol_bits):
                failure = f"selected root does not match f at {_point_text(named)}"
                break
        report.add(
            CheckLine(
                check=f"unique root selection on {label}",
                status="fail" if failure else "pass",
                witness=failure,
                samples_used=used,
            )
        )
        if failure:
            return report
    for comp in getattr(cert, "skipped", ()):
        named = {
            registry.name_of(v): val for v, val in comp.sample.items()
        }
        value = eval_numeric(f, named, tol_bits)
        report.add(
            CheckLine(
                check=f"skipped component {comp.label or ''} is not real-valued",
                status="pass" if value is NOT_REAL else "fail",
                witness=None if value is NOT_REAL else _point_text(named),
                samples_used=1,
            )
        )
    return report


# ---------------------------------------------------------------------------
# Degree audits.
# ---------------------------------------------------------------------------


def audit_degrees(dp: DefiningPolynomial) -> VerifyReport:
    """Compare observed degrees of the defining polynomial against the bounds
    promised for its source expression (and the recorded root-index product)."""
    report = VerifyReport()
    bounds = degree_bounds(dp.source)
    registry = dp.poly.registry
    observed_z = dp.poly.degree_in(dp.z)
    report.add(
        CheckLine(
            check="z-degree within bound",
            status="pass" if observed_z <= bounds.z_degree else "fail",
            witness=f"observed {observed_z}, bound {bounds.z_degree}",
        )
    )
    report.add(
        CheckLine(
            check="z-degree within recorded prediction",
            status="pass"
            if observed_z <= dp.predicted_z_degree_bound
            else "fail",
            witness=f"observed {observed_z}, predicted "
            f"{dp.predicted_z_degree_bound}",
        )
    )
    for name in sorted(bounds.var_degrees):
        bound = bounds.var_degrees[name]
        observed = (
            dp.poly.degree_in(registry.id_of(name)) if name in registry else 0
        )
        report.add(
            CheckLine(
                check=f"{name}-degree within bound",
                status="pass" if observed <= bound else "fail",
                witness=f"observed {observed}, bound {bound}",
            )
        )
    return report

"""Defining polynomials for radical expressions.

Every expression built from polynomials by field operations and r-th roots
is algebraic over the rational functions in its variables: there is a nonzero
polynomial p(z, x) with p(f(x), x) = 0 wherever f is defined and real.  The
construction is a structural recursion that combines the operands' defining
polynomials through resultants, eliminating one auxiliary variable per node:

    f + g   res_t(p_f(z - t, x), p_g(t, x))
    f - g   res_t(p_f(z + t, x), p_g(t, x))
    f * g   res_t(t^d p_f(z/t, x), p_g(t, x))      d = deg_z p_f
    f / g   res_t(p_f(t z, x), p_g(t, x))
    root_r  res_t(z^r - t, p_g(t, x))

with the base case z - f for polynomial f.  Resultants introduce spurious
factors, so each level's result is reduced: content stripped, made
square-free, split into cheap candidate factors, and every factor tested for
vanishing on f by certified interval evaluation at random rational points.
Factor filtering is probabilistic but one-sided -- a factor is only kept
alone when no sample can refute it, and on any doubt the whole square-free
part is returned unchanged.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import radicals
from .polycore import (
    MultiPoly,
    PolyError,
    VarId,
    VarRegistry,
    divexact,
    gcd_in_main_var,
    homogenize_in_quotient,
    integer_normalize,
    primitive_part_in,
    square_free_part,
)
from .radicals import (
    Add,
    Const,
    Div,
    EvalDomainError,
    Expr,
    Interval,
    Mul,
    NOT_REAL,
    NotPolynomial,
    Root,
    Sub,
    eval_numeric,
    normalize,
    parse,
    to_polynomial,
    variables_of,
)


class DefiningError(PolyError):
    """The construction degenerated (zero denominator expressions etc.)."""


class SamplingError(Exception):
    """Could not find real-valued sample points for a zero test."""


@dataclass(frozen=True)
class ReduceConfig:
    """Knobs for the probabilistic factor filtering inside `reduce_defining`."""

    trials: int = 8
    precision: int = 64
    seed: int = 0
    max_point_tries: int = 400


@dataclass(frozen=True)
class DefiningPolynomial:
    poly: MultiPoly
    z: VarId
    source: Expr
    reduced: bool
    predicted_z_degree_bound: int
    reduction_log: tuple[str, ...] = ()


@dataclass(frozen=True)
class DegreeBounds:
    """A priori degree bounds for the defining polynomial of an expression."""

    z_degree: int
    var_degrees: dict[str, int] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# sampling and the probabilistic zero test
# ---------------------------------------------------------------------------

#: sample coordinates are n/d with n in [-20, 20] and d in [1, 8]
SAMPLE_NUMERATOR_RANGE = 20
SAMPLE_DENOMINATOR_MAX = 8


def sample_point(var_names: list[str], rng: random.Random) -> dict[str, Fraction]:
    return {
        name: Fraction(
            rng.randint(-SAMPLE_NUMERATOR_RANGE, SAMPLE_NUMERATOR_RANGE),
            rng.randint(1, SAMPLE_DENOMINATOR_MAX),
        )
        for name in var_names
    }


def sample_real_point(
    f: Expr,
    rng: random.Random,
    precision: int,
    max_tries: int,
) -> dict[str, Fraction]:
    """A random rational point where `f` evaluates to a real interval."""
    names = sorted(variables_of(f))
    for _ in range(max_tries):
        point = sample_point(names, rng)
        try:
            value = eval_numeric(f, point, precision)
        except EvalDomainError:
            continue
        if value is not NOT_REAL:
            return point
    raise SamplingError(
        f"no real-valued sample point found for {radicals.to_text(f)!r} "
        f"after {max_tries} tries"
    )


def poly_on_interval(
    q: MultiPoly, z: VarId, point: Mapping[VarId, Fraction], ziv: Interval
) -> Interval:
    """Enclose q(z*, a) where z* ranges over `ziv` and a is exact."""
    coeffs = q.coeffs_in(z)
    if not coeffs:
        return Interval.point(Fraction(0))
    acc = Interval.point(Fraction(0))
    for e in range(max(coeffs), -1, -1):
        acc = acc * ziv
        if e in coeffs:
            acc = acc + Interval.point(coeffs[e].eval(point))
    return acc


def _point_by_id(registry: VarRegistry, point: Mapping[str, Fraction]):
    return {registry.id_of(n): v for n, v in point.items()}


def _certified_zero_at(
    q: MultiPoly,
    f: Expr,
    registry: VarRegistry,
    z: VarId,
    point: Mapping[str, Fraction],
    precision: int,
) -> bool:
    """True if q(f(a), a) is certified to enclose 0 below 2^-precision,
    re-confirmed at two further precision doublings; False once any
    enclosure excludes 0 (that answer is exact)."""
    by_id = _point_by_id(registry, point)
    target = Fraction(1, 2**precision)
    work = precision
    for _ in range(24):
        value = eval_numeric(f, point, work)
        assert isinstance(value, Interval)
        enclosure = poly_on_interval(q, z, by_id, value)
        if not enclosure.contains_zero():
            return False
        if enclosure.width() <= target:
            for _ in range(2):
                work *= 2
                value = eval_numeric(f, point, work)
                assert isinstance(value, Interval)
                enclosure = poly_on_interval(q, z, by_id, value)
                if not enclosure.contains_zero():
                    return False
            return True
        work *= 2
    return False  # could not certify; treat as refuted (conservative)


def probabilistic_zero_test(
    q: MultiPoly,
    f: Expr,
    registry: VarRegistry,
    z: VarId,
    trials: int = 8,
    precision: int = 64,
    seed: int = 0,
    max_point_tries: int = 400,
) -> bool:
    """Does q(f(x), x) vanish identically?  False answers are certain;
    True answers hold with high probability over the random samples."""
    rng = random.Random(seed)
    for _ in range(trials):
        point = sample_real_point(f, rng, precision, max_point_tries)
        if not _certified_zero_at(q, f, registry, z, point, precision):
            return False
    return True


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------


def _split_candidate_factors(p: MultiPoly, z: VarId) -> list[MultiPoly]:
    """Cheap coprime splitting of a square-free p via gcds with its
    derivatives: a factor missing some variable w is caught by
    gcd(p, dp/dw).  No irreducible factorization is attempted."""
    work = [p]
    out: list[MultiPoly] = []
    while work:
        q = work.pop()
        for w in sorted(q.vars_present()):
            g = gcd_in_main_var(q, q.derivative(w), z)
            if 0 < g.degree_in(z) < q.degree_in(z):
                work.append(g)
                work.append(primitive_part_in(divexact(q, g), z))
                break
        else:
            out.append(integer_normalize(q))
    return sorted(out, key=lambda m: m.to_text())


def reduce_defining(
    p: MultiPoly,
    f: Expr,
    registry: VarRegistry,
    z: VarId,
    cfg: ReduceConfig = ReduceConfig(),
    log: list[str] | None = None,
) -> MultiPoly:
    """Shrink a defining polynomial: square-free part, then drop candidate
    factors that provably do not vanish on f.  Falls back to the square-free
    part whenever the filtering is inconclusive, so the result always
    defines f."""
    if p.degree_in(z) < 1:
        raise DefiningError("defining polynomial must have positive degree in z")
    before = p.degree_in(z)

    def note(result: MultiPoly, how: str) -> MultiPoly:
        if log is not None and (how != "irreducible step" or
                                result.degree_in(z) != before):
            log.append(
                f"{radicals.to_text(f)}: z-degree {before} -> "
                f"{result.degree_in(z)} ({how})"
            )
        return result

    p = primitive_part_in(p, z)
    sf = square_free_part(p, z)
    factors = _split_candidate_factors(sf, z)
    if len(factors) == 1:
        return note(factors[0], "irreducible step")
    try:
        passing = [
            q
            for q in factors
            if probabilistic_zero_test(
                q, f, registry, z, cfg.trials, cfg.precision, cfg.seed,
                cfg.max_point_tries,
            )
        ]
    except SamplingError:
        return note(integer_normalize(sf), "square-free only; sampling failed")
    if len(passing) == 1:
        return note(passing[0], f"kept 1 of {len(factors)} factors")
    if passing:
        prod = passing[0]
        for q in passing[1:]:
            prod = prod * q
        return note(
            integer_normalize(prod),
            f"kept {len(passing)} of {len(factors)} factors",
        )
    return note(integer_normalize(sf), "square-free only; no factor passed")


# ---------------------------------------------------------------------------
# the construction
# ---------------------------------------------------------------------------


def defining_polynomial(
    f: Expr | str,
    registry: VarRegistry | None = None,
    z_name: str = "z",
    cfg: ReduceConfig = ReduceConfig(),
) -> DefiningPolynomial:
    """Defining polynomial of a radical expression, reduced at every level.

    The registry gains the variable `z_name` plus internal elimination
    variables (these never appear in the result).  If no registry is given a
    fresh one is created with f's variables in sorted order.
    """
    if isinstance(f, str):
        f = parse(f)
    f = normalize(f)
    if registry is None:
        registry = VarRegistry(sorted(variables_of(f)))
    else:
        for name in sorted(variables_of(f)):
            registry.ensure(name)
    if z_name in registry:
        raise DefiningError(
            f"root variable {z_name!r} collides with an expression variable"
        )
    z = registry.add(z_name)
    zp = MultiPoly.var(registry, z)
    log: list[str] = []
    poly = _build(f, registry, z, zp, cfg, log)
    return DefiningPolynomial(
        poly=poly,
        z=z,
        source=f,
        reduced=True,
        predicted_z_degree_bound=root_index_product(f),
        reduction_log=tuple(log),
    )


def _build(
    e: Expr,
    registry: VarRegistry,
    z: VarId,
    zp: MultiPoly,
    cfg: ReduceConfig,
    log: list[str],
) -> MultiPoly:
    try:
        base = to_polynomial(e, registry, allow_new=False)
    except NotPolynomial:
        base = None
    if base is not None:
        return integer_normalize(zp - base)

    if isinstance(e, Root):
        pg = _build(e.radicand, registry, z, zp, cfg, log)
        t = registry.add(registry.fresh("t"))
        tp = MultiPoly.var(registry, t)
        a = zp**e.index - tp
        b = pg.substitute(z, tp)
        return _combine(a, b, t, e, registry, z, cfg, log)

    if isinstance(e, (Add, Sub, Mul, Div)):
        pf = _build(e.left, registry, z, zp, cfg, log)
        pg = _build(e.right, registry, z, zp, cfg, log)
        t = registry.add(registry.fresh("t"))
        tp = MultiPoly.var(registry, t)
        if isinstance(e, Add):
            a = pf.substitute(z, zp - tp)
        elif isinstance(e, Sub):
            a = pf.substitute(z, zp + tp)
        elif isinstance(e, Mul):
            # t^d * pf(z/t): each z^k keeps z^k and gains t^(d-k)
            a = homogenize_in_quotient(pf, z, t, pf.degree_in(z))
        else:  # Div
            a = pf.substitute(z, tp * zp)
        b = pg.substitute(z, tp)
        return _combine(a, b, t, e, registry, z, cfg, log)

    raise DefiningError(f"cannot build a defining polynomial for {e!r}")


def _combine(
    a: MultiPoly,
    b: MultiPoly,
    t: VarId,
    e: Expr,
    registry: VarRegistry,
    z: VarId,
    cfg: ReduceConfig,
    log: list[str] | None = None,
) -> MultiPoly:
    from .resultants import resultant_with_constant

    res = resultant_with_constant(a, b, t)
    if t in res.vars_present():
        raise DefiningError("internal error: elimination variable survived")
    if res.degree_in(z) < 1:
        raise DefiningError(
            "defining polynomial degenerated to degree 0 in the root variable "
            f"while combining {radicals.to_text(e)!r} (is a denominator "
            "identically zero?)"
        )
    return reduce_defining(res, e, registry, z, cfg, log)


def root_index_product(e: Expr) -> int:
    """Product of the indices of every root occurrence: an a priori bound on
    the z-degree of the defining polynomial."""
    if isinstance(e, (Const, radicals.Var)):
        return 1
    if isinstance(e, (Add, Sub, Mul, Div)):
        return root_index_product(e.left) * root_index_product(e.right)
    if isinstance(e, Root):
        return e.index * root_index_product(e.radicand)
    raise DefiningError(f"normalize the expression first: {e!r}")


def degree_bounds(f: Expr | str) -> DegreeBounds:
    """A priori degree bounds, mirroring how the construction recurses:
    polynomial nodes are base cases, the four field operations multiply
    z-degrees and mix variable degrees, and an r-th root scales the z-degree
    by r while leaving variable degrees alone."""
    if isinstance(f, str):
        f = parse(f)
    f = normalize(f)
    return _bounds(f)


def _bounds(e: Expr) -> DegreeBounds:
    if radicals.is_polynomial(e):
        probe = VarRegistry()
        p = to_polynomial(e, probe, allow_new=True)
        degs = {
            probe.name_of(v): p.degree_in(v) for v in sorted(p.vars_present())
        }
        return DegreeBounds(z_degree=1, var_degrees=degs)
    if isinstance(e, (Add, Sub, Mul, Div)):
        lb, rb = _bounds(e.left), _bounds(e.right)
        names = set(lb.var_degrees) | set(rb.var_degrees)
        mixed = {
            n: lb.var_degrees.get(n, 0) * rb.z_degree
            + lb.z_degree * rb.var_degrees.get(n, 0)
            for n in names
        }
        return DegreeBounds(z_degree=lb.z_degree * rb.z_degree, var_degrees=mixed)
    if isinstance(e, Root):
        gb = _bounds(e.radicand)
        return DegreeBounds(
            z_degree=e.index * gb.z_degree, var_degrees=dict(gb.var_degrees)
        )
    raise DefiningError(f"cannot bound degrees for {e!r}")

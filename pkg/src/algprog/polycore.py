"""Sparse multivariate polynomials over exact rationals.

A polynomial is a map from monomials to nonzero `Fraction` coefficients.
Monomials are tuples of ``(var_id, exponent)`` pairs, sorted by variable id,
with zero exponents never stored.  Variable ids index into a shared
`VarRegistry`; mixing polynomials from different registries is an error.

Everything here is exact -- no floats anywhere.  The canonical text form
sorts terms by graded-lexicographic order (total degree first, ties broken so
that later-registered variables weigh more), which makes printed polynomials
stable across runs and platforms.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

VarId = int

# A monomial: ((var_id, exp), ...) sorted by var_id, every exp > 0.
Monomial = tuple[tuple[int, int], ...]

_ONE: Monomial = ()


class PolyError(Exception):
    """Structural misuse of the polynomial layer (registry mixups etc.)."""


class VarRegistry:
    """Append-only mapping between variable names and small integer ids."""

    def __init__(self, names: Iterable[str] = ()) -> None:
        self._names: list[str] = []
        self._ids: dict[str, VarId] = {}
        for n in names:
            self.add(n)

    def add(self, name: str) -> VarId:
        """Register a new variable; adding the same name twice is an error."""
        if name in self._ids:
            raise PolyError(f"variable {name!r} already registered")
        if not name or not (name[0].isalpha() or name[0] == "_"):
            raise PolyError(f"invalid variable name {name!r}")
        vid = len(self._names)
        self._names.append(name)
        self._ids[name] = vid
        return vid

    def ensure(self, name: str) -> VarId:
        """Return the id for `name`, registering it if needed."""
        got = self._ids.get(name)
        return got if got is not None else self.add(name)

    def id_of(self, name: str) -> VarId:
        try:
            return self._ids[name]
        except KeyError:
            raise PolyError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def name_of(self, vid: VarId) -> str:
        return self._names[vid]

    def fresh(self, stem: str) -> str:
        """Pick an unused name starting from `stem` (stem, stem2, stem3, ...)."""
        if stem not in self._ids:
            return stem
        k = 2
        while f"{stem}{k}" in self._ids:
            k += 1
        return f"{stem}{k}"

    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __len__(self) -> int:
        return len(self._names)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for v, e in b:
        out[v] = out.get(v, 0) + e
    return tuple(sorted(out.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    """True if monomial `a` divides `b`."""
    db = dict(b)
    return all(db.get(v, 0) >= e for v, e in a)


def _mono_div(b: Monomial, a: Monomial) -> Monomial:
    out = dict(b)
    for v, e in a:
        out[v] -= e
    return tuple(sorted((v, e) for v, e in out.items() if e))


def _grlex_key(m: Monomial) -> tuple:
    # Total degree first; ties broken lexicographically with later-registered
    # variables taking precedence (so a defining variable z added after the
    # problem variables sorts in front, matching the documented text form).
    return (_mono_degree(m), tuple(sorted(m, reverse=True)))


def grlex_leading(terms: Mapping[Monomial, Fraction]) -> Monomial:
    return max(terms, key=_grlex_key)


class MultiPoly:
    """Immutable-by-convention sparse polynomial tied to a registry."""

    __slots__ = ("registry", "terms")

    def __init__(self, registry: VarRegistry, terms: Mapping[Monomial, Fraction]):
        self.registry = registry
        self.terms: dict[Monomial, Fraction] = {
            m: c for m, c in terms.items() if c != 0
        }

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, registry: VarRegistry) -> MultiPoly:
        return cls(registry, {})

    @classmethod
    def const(cls, registry: VarRegistry, c) -> MultiPoly:
        c = Fraction(c)
        return cls(registry, {_ONE: c} if c else {})

    @classmethod
    def var(cls, registry: VarRegistry, vid: VarId) -> MultiPoly:
        if not 0 <= vid < len(registry):
            raise PolyError(f"variable id {vid} not in registry")
        return cls(registry, {((vid, 1),): Fraction(1)})

    def _check(self, other: MultiPoly) -> None:
        if self.registry is not other.registry:
            raise PolyError("polynomials belong to different registries")

    # -- ring operations ----------------------------------------------

    def __add__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.registry, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return MultiPoly(self.registry, out)

    def __radd__(self, other) -> MultiPoly:
        return self.__add__(other)

    def __neg__(self) -> MultiPoly:
        return MultiPoly(self.registry, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            other = MultiPoly.const(self.registry, other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other) -> MultiPoly:
        return MultiPoly.const(self.registry, other).__sub__(self)

    def __mul__(self, other) -> MultiPoly:
        if not isinstance(other, MultiPoly):
            c = Fraction(other)
            if not c:
                return MultiPoly.zero(self.registry)
            return MultiPoly(self.registry, {m: k * c for m, k in self.terms.items()})
        self._check(other)
        # iterate over the smaller operand for fewer dict rebuilds
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict[Monomial, Fraction] = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, Fraction(0)) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return MultiPoly(self.registry, out)

    def __rmul__(self, other) -> MultiPoly:
        return self.__mul__(other)

    def __pow__(self, k: int) -> MultiPoly:
        if not isinstance(k, int) or k < 0:
            raise PolyError(f"polynomial power must be a non-negative int, got {k!r}")
        result = MultiPoly.const(self.registry, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.registry is other.registry
            and self.terms == other.terms
        )

    __hash__ = None  # type: ignore[assignment]

    def __bool__(self) -> bool:
        return bool(self.terms)

    # -- queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or set(self.terms) == {_ONE}

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise PolyError("polynomial is not constant")
        return self.terms.get(_ONE, Fraction(0))

    def degree_in(self, v: VarId) -> int:
        """Degree in variable `v`; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max((dict(m).get(v, 0) for m in self.terms), default=0)

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(_mono_degree(m) for m in self.terms)

    def vars_present(self) -> set[VarId]:
        out: set[VarId] = set()
        for m in self.terms:
            out.update(v for v, _ in m)
        return out

    def term_count(self) -> int:
        return len(self.terms)

    # -- calculus / evaluation ------------------------------------------

    def derivative(self, v: VarId) -> MultiPoly:
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(v, 0)
            if not e:
                continue
            if e == 1:
                del d[v]
            else:
                d[v] = e - 1
            mm = tuple(sorted(d.items()))
            s = out.get(mm, Fraction(0)) + c * e
            if s:
                out[mm] = s
            else:
                out.pop(mm, None)
        return MultiPoly(self.registry, out)

    def eval(self, point: Mapping[VarId, Fraction]) -> Fraction:
        """Evaluate at a full rational point (every present var must be given)."""
        total = Fraction(0)
        for m, c in self.terms.items():
            acc = c
            for v, e in m:
                if v not in point:
                    raise PolyError(
                        f"no value for variable {self.registry.name_of(v)!r}"
                    )
                acc *= Fraction(point[v]) ** e
            total += acc
        return total

    def coeffs_in(self, v: VarId) -> dict[int, MultiPoly]:
        """Coefficients of powers of `v`, each a polynomial free of `v`."""
        buckets: dict[int, dict[Monomial, Fraction]] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.pop(v, 0)
            mm = tuple(sorted(d.items()))
            buckets.setdefault(e, {})[mm] = c
        return {e: MultiPoly(self.registry, t) for e, t in buckets.items()}

    @classmethod
    def from_coeffs(
        cls, registry: VarRegistry, v: VarId, coeffs: Mapping[int, MultiPoly]
    ) -> MultiPoly:
        out: dict[Monomial, Fraction] = {}
        for e, p in coeffs.items():
            for m, c in p.terms.items():
                mm = _mono_mul(m, ((v, e),)) if e else m
                s = out.get(mm, Fraction(0)) + c
                if s:
                    out[mm] = s
                else:
                    out.pop(mm, None)
        return cls(registry, out)

    def leading_coeff_in(self, v: VarId) -> MultiPoly:
        d = self.degree_in(v)
        if d < 0:
            return MultiPoly.zero(self.registry)
        return self.coeffs_in(v)[d]

    def substitute(self, v: VarId, replacement) -> MultiPoly:
        """Substitute a polynomial (or rational constant) for variable `v`."""
        if not isinstance(replacement, MultiPoly):
            replacement = MultiPoly.const(self.registry, replacement)
        self._check(replacement)
        coeffs = self.coeffs_in(v)
        if not coeffs:
            return MultiPoly.zero(self.registry)
        # Horner in v keeps intermediate swell down.
        result = MultiPoly.zero(self.registry)
        for e in range(max(coeffs), -1, -1):
            result = result * replacement
            if e in coeffs:
                result = result + coeffs[e]
        return result

    # -- text form --------------------------------------------------------

    def to_text(self) -> str:
        """Canonical text form, e.g. ``z^6 - 3*x*z^4 + x^2``."""
        if not self.terms:
            return "0"
        pieces: list[str] = []
        for m in sorted(self.terms, key=_grlex_key, reverse=True):
            c = self.terms[m]
            mono = "*".join(
                self.registry.name_of(v) + (f"^{e}" if e > 1 else "")
                for v, e in m
            )
            mag = abs(c)
            if not mono:
                body = _frac_text(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{_frac_text(mag)}*{mono}"
            if not pieces:
                pieces.append(("-" if c < 0 else "") + body)
            else:
                pieces.append(("- " if c < 0 else "+ ") + body)
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"MultiPoly({self.to_text()})"


def _frac_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# exact division, gcd machinery
# ---------------------------------------------------------------------------


class InexactDivision(PolyError):
    """Raised when an exact polynomial division turns out not to be exact."""


def divexact(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Divide `p` by `q` assuming exact divisibility; raise otherwise."""
    p._check(q)
    if q.is_zero():
        raise PolyError("division by the zero polynomial")
    if q.is_constant():
        return p * (1 / q.constant_value())
    rem = dict(p.terms)
    lead_q = grlex_leading(q.terms)
    cq = q.terms[lead_q]
    out: dict[Monomial, Fraction] = {}
    while rem:
        lead_r = grlex_leading(rem)
        if not _mono_divides(lead_q, lead_r):
            raise InexactDivision("division is not exact")
        m = _mono_div(lead_r, lead_q)
        c = rem[lead_r] / cq
        out[m] = out.get(m, Fraction(0)) + c
        for mq, kq in q.terms.items():
            mm = _mono_mul(m, mq)
            s = rem.get(mm, Fraction(0)) - c * kq
            if s:
                rem[mm] = s
            else:
                rem.pop(mm, None)
    return MultiPoly(p.registry, out)


def try_divexact(p: MultiPoly, q: MultiPoly) -> MultiPoly | None:
    try:
        return divexact(p, q)
    except InexactDivision:
        return None


def integer_normalize(p: MultiPoly) -> MultiPoly:
    """Scale to coprime integer coefficients with positive leading coefficient."""
    if p.is_zero():
        return p
    num_gcd = 0
    den_lcm = 1
    for c in p.terms.values():
        num_gcd = math.gcd(num_gcd, abs(c.numerator))
        den_lcm = den_lcm * c.denominator // math.gcd(den_lcm, c.denominator)
    scale = Fraction(den_lcm, num_gcd)
    if p.terms[grlex_leading(p.terms)] < 0:
        scale = -scale
    return p * scale


def _pseudo_rem(p: MultiPoly, q: MultiPoly, v: VarId) -> MultiPoly:
    """Pseudo-remainder of p by q in v, scaled by lc(q)^(deg p - deg q + 1)."""
    dp, dq = p.degree_in(v), q.degree_in(v)
    if dq < 0:
        raise PolyError("pseudo-remainder by zero")
    lc_q = q.leading_coeff_in(v)
    r = p
    steps = dp - dq + 1
    used = 0
    while not r.is_zero() and r.degree_in(v) >= dq:
        dr = r.degree_in(v)
        lc_r = r.leading_coeff_in(v)
        shift = MultiPoly.from_coeffs(p.registry, v, {dr - dq: lc_r})
        r = r * lc_q - shift * q
        used += 1
    # normalize to the textbook scaling so subresultant formulas hold
    for _ in range(steps - used):
        r = r * lc_q
    return r


def subresultant_prs(p: MultiPoly, q: MultiPoly, v: VarId) -> list[MultiPoly]:
    """Subresultant polynomial remainder sequence starting from (p, q)."""
    if p.degree_in(v) < q.degree_in(v):
        p, q = q, p
    seq = [p, q]
    a, b = p, q
    g = MultiPoly.const(p.registry, 1)
    h = MultiPoly.const(p.registry, 1)
    while b.degree_in(v) > 0:
        delta = a.degree_in(v) - b.degree_in(v)
        r = _pseudo_rem(a, b, v)
        if r.is_zero():
            return seq
        divisor = g * (h ** delta)
        r = divexact(r, divisor)
        a, b = b, r
        seq.append(r)
        g = a.leading_coeff_in(v)
        if delta:
            h = divexact(g ** delta, h ** (delta - 1))
        # delta == 0 leaves h unchanged
    return seq


def content_in(p: MultiPoly, v: VarId) -> MultiPoly:
    """Gcd of the coefficients of `p` viewed as a polynomial in `v`."""
    coeffs = list(p.coeffs_in(v).values())
    if not coeffs:
        return MultiPoly.zero(p.registry)
    g = coeffs[0]
    for c in coeffs[1:]:
        g = poly_gcd(g, c)
        if g.is_constant():
            break
    return integer_normalize(g)


def primitive_part_in(p: MultiPoly, v: VarId) -> MultiPoly:
    if p.is_zero():
        return p
    return integer_normalize(divexact(p, content_in(p, v)))


def poly_gcd(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """Full multivariate gcd, normalized to primitive integer coefficients.

    Rational constants count as units, so gcd(6, 4) is 1.
    """
    p._check(q)
    if p.is_zero():
        return integer_normalize(q)
    if q.is_zero():
        return integer_normalize(p)
    if p.is_constant() or q.is_constant():
        return MultiPoly.const(p.registry, 1)
    shared = p.vars_present() | q.vars_present()
    v = min(shared)
    cp, cq = content_in(p, v), content_in(q, v)
    c = poly_gcd(cp, cq)
    pp, qq = divexact(p, cp), divexact(q, cq)
    if pp.degree_in(v) == 0 or qq.degree_in(v) == 0:
        return integer_normalize(c)
    seq = subresultant_prs(pp, qq, v)
    last = seq[-1]
    if last.degree_in(v) == 0:
        return integer_normalize(c)
    return integer_normalize(c * primitive_part_in(last, v))


def gcd_in_main_var(p: MultiPoly, q: MultiPoly, v: VarId) -> MultiPoly:
    """Gcd of p and q as univariate polynomials in `v` over the remaining
    variables' fraction field, returned primitive with integer coefficients.

    Degree-0 results collapse to the constant 1 (units don't matter here).
    """
    p._check(q)
    if p.is_zero() and q.is_zero():
        raise PolyError("gcd of two zero polynomials")
    if p.is_zero():
        return primitive_part_in(q, v)
    if q.is_zero():
        return primitive_part_in(p, v)
    if p.degree_in(v) == 0 or q.degree_in(v) == 0:
        return MultiPoly.const(p.registry, 1)
    seq = subresultant_prs(p, q, v)
    last = seq[-1]
    if last.degree_in(v) == 0:
        return MultiPoly.const(p.registry, 1)
    return primitive_part_in(last, v)


def square_free_part(p: MultiPoly, v: VarId) -> MultiPoly:
    """Largest square-free divisor of `p` with respect to `v`, primitive."""
    if p.degree_in(v) < 1:
        raise PolyError("square-free part needs positive degree in the main variable")
    g = gcd_in_main_var(p, p.derivative(v), v)
    out = divexact(p, g)
    return primitive_part_in(out, v)


def homogenize_in_quotient(p: MultiPoly, v: VarId, t: VarId, d: int) -> MultiPoly:
    """Return t^d * p(v/t) with denominators cleared: v^e picks up t^(d-e).

    `d` must be the degree of `p` in `v`, and `t` must not occur in `p`.
    """
    if t in p.vars_present():
        raise PolyError("homogenization variable already occurs in the polynomial")
    if d != p.degree_in(v):
        raise PolyError(f"expected degree {p.degree_in(v)} in quotient, got {d}")
    out: dict[Monomial, Fraction] = {}
    for m, c in p.terms.items():
        dm = dict(m)
        e = dm.get(v, 0)
        if d - e:
            dm[t] = d - e
        out[tuple(sorted(dm.items()))] = c
    return MultiPoly(p.registry, out)

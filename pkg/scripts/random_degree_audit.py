#!/usr/bin/env python3
"""Randomized audit: observed defining-polynomial degrees never exceed the
a priori bounds.

Draws random radical expressions (bounded depth, root indices 2 and 3),
computes each defining polynomial, and compares the observed z-degree and
per-variable degrees against `degree_bounds`.  Prints a running histogram of
observed z-degrees and fails loudly on any violation.
"""

import argparse
import random
import sys
import time
from collections import Counter
from fractions import Fraction

from algprog.defpoly import (
    DefiningError,
    SamplingError,
    defining_polynomial,
    degree_bounds,
    root_index_product,
)
from algprog.radicals import (
    Add,
    Const,
    Div,
    ExprError,
    Mul,
    Root,
    Sub,
    Var,
    distinct_radicals,
    normalize,
    to_text,
)


def random_expr(rng: random.Random, depth: int):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([Var("x"), Var("y"), Const(Fraction(rng.randint(1, 4)))])
    if rng.random() < 0.45:
        return Root(rng.choice((2, 3)), random_expr(rng, depth - 1))
    op = rng.choice([Add, Sub, Mul, Div])
    return op(random_expr(rng, depth - 1), random_expr(rng, depth - 1))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument(
        "--max-index-product",
        type=int,
        default=9,
        help="cap on the product of root indices (keeps single items fast)",
    )
    args = ap.parse_args()

    rng = random.Random(args.seed)
    audited = 0
    rejected = 0
    violations = 0
    degrees: Counter = Counter()
    t0 = time.monotonic()
    while audited < args.count:
        try:
            e = normalize(random_expr(rng, args.depth))
            if (
                not 1 < root_index_product(e) <= args.max_index_product
                or len(distinct_radicals(e)) > 3
            ):
                continue
            dp = defining_polynomial(e)
        except (DefiningError, SamplingError, ExprError, ZeroDivisionError):
            rejected += 1
            continue
        b = degree_bounds(e)
        reg = dp.poly.registry
        observed = dp.poly.degree_in(dp.z)
        degrees[observed] += 1
        bad = observed > b.z_degree or any(
            dp.poly.degree_in(reg.id_of(name)) > bound
            for name, bound in b.var_degrees.items()
        )
        if bad:
            violations += 1
            print(f"VIOLATION: {to_text(e)}  observed z-degree {observed}, "
                  f"bound {b.z_degree}", file=sys.stderr)
        audited += 1
    elapsed = time.monotonic() - t0
    print(f"audited {audited} expressions in {elapsed:.1f}s "
          f"({rejected} draws rejected as undefined/degenerate)")
    print("observed z-degree histogram:")
    for deg in sorted(degrees):
        print(f"  {deg:3d}: {'#' * degrees[deg]} ({degrees[deg]})")
    print(f"violations: {violations}")
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())

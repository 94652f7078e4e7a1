#!/usr/bin/env python3
"""Regenerate the worked reformulations from problems/ and print them.

Runs the full pipeline (defining polynomial, isolation with the domain
strategy, merge, substitution) for each problem with a domain sidecar, prints
the human-format child next to the straightforward baseline, and reports
auxiliary-variable counts and wall-clock time.
"""

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from algprog.isolation import DomainSpec, IsolateConfig, SignCondition
from algprog.program import (
    ReformulateConfig,
    baseline_reformulate,
    check_substitution,
    emit,
    load_program,
    reformulate,
)
from algprog.radicals import polynomial_from_text


def domain_from_file(prog, path: Path) -> DomainSpec:
    raw = json.loads(path.read_text())
    conds = tuple(
        SignCondition.normalized(
            polynomial_from_text(c["poly"], prog.variables), c["rel"]
        )
        for c in raw["conditions"]
    )
    point = {
        prog.variables.id_of(k): Fraction(v)
        for k, v in raw["interior_point"].items()
    }
    return DomainSpec(conds, point)


def run(problem: Path, check: bool) -> None:
    domain_file = problem.with_name(f"{problem.stem}.domain{problem.suffix}")
    prog = load_program(problem.read_text())
    dom = domain_from_file(prog, domain_file)
    cfg = ReformulateConfig(isolate=IsolateConfig(allow_boundary=True), merge=True)

    t0 = time.monotonic()
    res = reformulate(prog, strategy="domain", cfg=cfg, domain=dom)
    base = baseline_reformulate(prog)
    elapsed = time.monotonic() - t0

    bar = "=" * 72
    print(bar)
    print(f"{problem.name}  ({elapsed:.2f}s)")
    print(bar)
    sys.stdout.write(emit(res, format="human").decode())
    print("straightforward baseline:")
    for p, rel in base.constraints:
        print(f"    {p.to_text()} {rel} 0")
    if check:
        report = check_substitution(res, prog, samples=16)
        print(f"substitution spot-check: {'pass' if report.passed else 'FAIL'}")
    print()


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--problems-dir",
        type=Path,
        default=Path(__file__).resolve().parent.parent / "problems",
    )
    ap.add_argument(
        "--no-check",
        action="store_true",
        help="skip the sampling-based substitution spot-check",
    )
    args = ap.parse_args()
    problems = sorted(
        p
        for p in args.problems_dir.glob("*.json")
        if not p.stem.endswith(".domain")
    )
    if not problems:
        print(f"no problem files under {args.problems_dir}", file=sys.stderr)
        return 1
    for problem in problems:
        run(problem, check=not args.no_check)
    return 0


if __name__ == "__main__":
    sys.exit(main())

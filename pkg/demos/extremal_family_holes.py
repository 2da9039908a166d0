"""Build the extremal family for small m and check its hole count.

Steps: build the universal body, pick a perturbation size eps that makes the
nerve match its predicted shape, then count holes exactly through the nerve.
"""

import sys
import time

from unionholes import (
    ConstructionParams,
    build_body,
    build_family,
    choose_epsilon,
    expected_holes,
    format_rational,
    hole_count,
    verify_witnesses,
)

sizes = [int(a) for a in sys.argv[1:]] or [1, 2, 3]

for m in sizes:
    start = time.perf_counter()
    body = build_body(ConstructionParams.for_m(m))
    budget = choose_epsilon(body)
    family = build_family(body, budget.eps)
    witnesses = verify_witnesses(body, family)
    report = hole_count(family, predicted=expected_holes(m))
    print(
        f"m={m}: body has {len(body.body.vertices)} vertices, eps={format_rational(budget.eps)}, "
        f"{len(family)} translates, holes={report.hole_count} (expected {expected_holes(m)}), "
        f"witnesses {'ok' if witnesses.passed else 'FAILED'}, {time.perf_counter() - start:.1f}s"
    )

"""Count the holes of the warm-up grid family for a few sizes.

The warm-up family stacks m notched "B" copies against m "A" copies inside a
base body; every crossing of an A edge with a B notch traps a cavity.
"""

import sys

from unionholes import build_warmup_family, hole_count

sizes = [int(a) for a in sys.argv[1:]] or [2, 3, 4]

for m in sizes:
    family, layout = build_warmup_family(m)
    report = hole_count(family)
    print(
        f"m={m}: {len(family)} translates, {report.simplex_counts[2]} triangles in the nerve, "
        f"betti2={report.betti.betti}, holes={report.hole_count} (m(m-1)+1 = {m * (m - 1) + 1})"
    )

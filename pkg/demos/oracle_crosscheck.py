"""Compare the exact nerve count with a voxel flood fill on the warm-up family.

A slightly coarse grid makes the two resolutions disagree, so the oracle
flags the count as unstable. A much coarser one misses the holes at both
resolutions, which no stability check can detect.
"""

from unionholes import Q, build_warmup_family, format_rational, hole_count, oracle_hole_count
from unionholes.oracle import default_resolution

m = 3
family, layout = build_warmup_family(m)
exact = hole_count(family).hole_count

for h in (default_resolution(layout.feature_size), Q(1, 60), Q(1, 10)):
    rep = oracle_hole_count(family, h)
    verdict = "stable" if rep.stable else "UNSTABLE"
    print(f"h={format_rational(h)}: voxel counts {rep.coarse} at h, {rep.fine} at h/2 ({verdict}); exact {exact}")

"""Check holes <= C(n,3) + 1 on random families of small lattice polytopes."""

import math
import random

from unionholes import hole_count
from unionholes.cli import random_family

rng = random.Random(7)
n = 8
seen = {}
for _ in range(40):
    report = hole_count(random_family(rng, n))
    assert report.hole_count <= math.comb(n, 3) + 1
    seen[report.hole_count] = seen.get(report.hole_count, 0) + 1

print(f"bound C({n},3)+1 = {math.comb(n, 3) + 1}; hole counts seen: {dict(sorted(seen.items()))}")

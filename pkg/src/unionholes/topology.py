"""Nerves, boundary matrices, Betti numbers and hole counts.

Homology is taken with rational coefficients. For a family of compact
convex sets in 3-space the number of holes of the union (connected
components of the complement, the unbounded one included) equals
``beta_2(nerve) + 1``, so only the nerve's 3-skeleton is ever needed.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .exact import ONE, SparseMatrix, matrix_rank
from .geometry import TranslateFamily, bodies_intersect


@dataclass
class SimplicialComplex:
    """Simplices stored per dimension as tuples sorted by ``vertex_order``."""

    vertex_order: tuple
    simplices: dict = field(default_factory=dict)
    skeleton_limit: int | None = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertex_order = tuple(self.vertex_order)
        self._rank = {v: i for i, v in enumerate(self.vertex_order)}
        normalized = {}
        for dim, simps in self.simplices.items():
            normalized[dim] = sorted({self.canonical(s) for s in simps}, key=self._key)
        normalized.setdefault(0, sorted({(v,) for v in self.vertex_order}, key=self._key))
        self.simplices = normalized

    @classmethod
    def from_maximal(cls, vertex_order: Sequence[Hashable], maximal: Iterable[Iterable], max_dim: int | None = None) -> "SimplicialComplex":
        """Downward closure of the given simplices (truncated at ``max_dim``)."""
        faces: dict[int, set] = {}
        for simplex in maximal:
            s = tuple(simplex)
            top = len(s) if max_dim is None else min(len(s), max_dim + 1)
            for r in range(1, top + 1):
                faces.setdefault(r - 1, set()).update(itertools.combinations(s, r))
        return cls(tuple(vertex_order), faces, max_dim)

    def canonical(self, simplex: Iterable) -> tuple:
        return tuple(sorted(simplex, key=self._rank.__getitem__))

    def _key(self, simplex: tuple) -> tuple:
        return tuple(self._rank[v] for v in simplex)

    @property
    def dimension(self) -> int:
        return max((d for d, s in self.simplices.items() if s), default=-1)

    def count(self, dim: int) -> int:
        return len(self.simplices.get(dim, ()))

    def stores(self, dim: int) -> bool:
        """Whether dimension ``dim`` is completely represented."""
        if dim < 0:
            return True
        if self.skeleton_limit is None:
            return True
        return dim <= self.skeleton_limit

    def reorder(self, vertex_order: Sequence) -> "SimplicialComplex":
        return SimplicialComplex(tuple(vertex_order), dict(self.simplices), self.skeleton_limit, dict(self.labels))

    def is_closed(self) -> bool:
        for dim, simps in self.simplices.items():
            if dim == 0:
                continue
            lower = set(self.simplices.get(dim - 1, ()))
            for s in simps:
                for face in itertools.combinations(s, dim):
                    if face not in lower:
                        return False
        return True

    def named(self, simplex: tuple) -> tuple:
        return tuple(self.labels.get(v, v) for v in simplex)


# --------------------------------------------------------------------------
# Nerve
# --------------------------------------------------------------------------


def _intersects(family: TranslateFamily, subset: tuple) -> bool:
    return bodies_intersect([family.translates[i] for i in subset]).feasible


def _chunk_test(args):
    family, subsets = args
    return [_intersects(family, s) for s in subsets]


def nerve_skeleton(family: TranslateFamily, max_dim: int, workers: int = 1) -> SimplicialComplex:
    """All subfamilies of size <= max_dim + 1 with a common point.

    A subset is only tested when all of its facets already belong to the
    nerve; the others cannot have a common point. Vertices are the family
    indices in family order and carry the translate names as labels.
    """
    if len(family) == 0:
        raise ValueError("nerve of an empty family")
    if max_dim < 0:
        raise ValueError("max_dim must be non-negative")
    n = len(family)
    simplices: dict[int, list] = {0: [(i,) for i in range(n)]}
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for dim in range(1, max_dim + 1):
            lower = set(simplices[dim - 1])
            cands = []
            for base in simplices[dim - 1]:
                for v in range(base[-1] + 1, n):
                    s = base + (v,)
                    if all(f in lower for f in itertools.combinations(s, dim)):
                        cands.append(s)
            if pool is None:
                flags = [_intersects(family, s) for s in cands]
            else:
                size = max(1, len(cands) // (4 * workers))
                chunks = [cands[i:i + size] for i in range(0, len(cands), size)]
                flags = [f for part in pool.map(_chunk_test, [(family, c) for c in chunks]) for f in part]
            simplices[dim] = [s for s, ok in zip(cands, flags) if ok]
            if not simplices[dim]:
                for higher in range(dim + 1, max_dim + 1):
                    simplices[higher] = []
                break
    finally:
        if pool is not None:
            pool.shutdown()
    labels = {i: t.name for i, t in enumerate(family)}
    return SimplicialComplex(tuple(range(n)), simplices, max_dim, labels)


# --------------------------------------------------------------------------
# Boundary maps and Betti numbers
# --------------------------------------------------------------------------


def boundary_matrix(complex_: SimplicialComplex, i: int) -> SparseMatrix:
    """Matrix of the i-th boundary map: rows are (i-1)-simplices, columns i-simplices.

    ``i = 0`` gives the zero map into the trivial space (a 0-row matrix).
    """
    cols = complex_.simplices.get(i, [])
    if i == 0:
        return SparseMatrix(0, len(cols), {})
    if not complex_.stores(i):
        raise ValueError(f"dimension {i} is beyond the stored skeleton")
    rows = complex_.simplices.get(i - 1, [])
    row_index = {s: r for r, s in enumerate(rows)}
    entries = {}
    for c, s in enumerate(cols):
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            entries[(row_index[face], c)] = ONE if j % 2 == 0 else -ONE
    return SparseMatrix(len(rows), len(cols), entries)


@dataclass(frozen=True)
class BettiReport:
    dimension: int
    chains: int
    rank_boundary: int  # rank of the map out of dimension i
    rank_coboundary: int  # rank of the map into dimension i
    betti: int

    @property
    def kernel_dim(self) -> int:
        return self.chains - self.rank_boundary

    def as_dict(self) -> dict:
        i = self.dimension
        return {
            "dimension": i,
            f"dim_C{i}": self.chains,
            f"rank_d{i}": self.rank_boundary,
            f"dim_ker_d{i}": self.kernel_dim,
            f"rank_d{i + 1}": self.rank_coboundary,
            f"betti{i}": self.betti,
        }


def betti(complex_: SimplicialComplex, i: int) -> BettiReport:
    """Betti number ``dim ker d_i - rank d_{i+1}`` over the rationals."""
    for need in (i - 1, i, i + 1):
        if not complex_.stores(need):
            raise ValueError(
                f"betti({i}) needs dimension {need}, but the complex stops at {complex_.skeleton_limit}"
            )
    chains = complex_.count(i)
    r_i = matrix_rank(boundary_matrix(complex_, i)) if i > 0 else 0
    r_next = matrix_rank(boundary_matrix(complex_, i + 1))
    return BettiReport(i, chains, r_i, r_next, chains - r_i - r_next)


# --------------------------------------------------------------------------
# Hole counts
# --------------------------------------------------------------------------


@dataclass
class HoleReport:
    betti: BettiReport
    hole_count: int
    family_size: int
    upper_bound: int
    predicted: int | None = None
    simplex_counts: dict = field(default_factory=dict)
    complex: SimplicialComplex | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        out = {
            "holes": {"value": self.hole_count, "provenance": "computed"},
            "convention": "the unbounded complement component is counted",
            "family_size": self.family_size,
            "simplex_counts": {str(k): v for k, v in sorted(self.simplex_counts.items())},
            "betti": self.betti.as_dict(),
            "upper_bound": {"value": self.upper_bound, "provenance": "C(n,3)+1", "holds": upper_bound_holds(self)},
        }
        if self.predicted is not None:
            out["predicted_holes"] = {"value": self.predicted, "provenance": "formula-expected"}
        return out

    def csv_row(self, m: int | str = "") -> list:
        return [
            m,
            self.family_size,
            self.simplex_counts.get(2, 0),
            self.simplex_counts.get(3, 0),
            self.betti.rank_boundary,
            self.betti.rank_coboundary,
            self.betti.betti,
            self.hole_count,
            self.upper_bound,
        ]


CSV_HEADER = ["m", "n", "c2_count", "c3_count", "rank_d2", "rank_d3", "betti2", "holes", "bound"]


def hole_count_from_complex(complex_: SimplicialComplex, family_size: int, dim: int = 3, predicted: int | None = None) -> HoleReport:
    rep = betti(complex_, dim - 1)
    counts = {d: complex_.count(d) for d in range(dim + 1)}
    return HoleReport(rep, rep.betti + 1, family_size, math.comb(family_size, dim) + 1, predicted, counts, complex_)


def hole_count(family: TranslateFamily, predicted: int | None = None, workers: int = 1) -> HoleReport:
    """Holes of the union of a family of convex polytopes in 3-space."""
    cx = nerve_skeleton(family, 3, workers)
    return hole_count_from_complex(cx, len(family), 3, predicted)


def upper_bound_holds(report: HoleReport) -> bool:
    return report.hole_count <= report.upper_bound


@dataclass
class NerveCheck:
    matches: bool
    unexpected: list
    missing: list

    def __bool__(self) -> bool:
        return self.matches

    def as_dict(self) -> dict:
        return {
            "matches": self.matches,
            "unexpected": [sorted(s) for s in self.unexpected],
            "missing": [sorted(s) for s in self.missing],
        }


def verify_nerve_matches(complex_: SimplicialComplex, prediction, max_size: int = 4) -> NerveCheck:
    """Compare the stored simplices of size <= max_size with a prediction.

    ``prediction`` is anything with ``faces(max_size)`` returning sets of
    vertex labels (see :class:`~unionholes.construction.NervePrediction`).
    """
    top = min(max_size, (complex_.skeleton_limit if complex_.skeleton_limit is not None else max_size - 1) + 1)
    computed = set()
    for dim in range(top):
        for s in complex_.simplices.get(dim, []):
            computed.add(frozenset(complex_.named(s)))
    expected = {f for f in prediction.faces(top)}
    unexpected = sorted(computed - expected, key=lambda s: (len(s), sorted(s)))
    missing = sorted(expected - computed, key=lambda s: (len(s), sorted(s)))
    return NerveCheck(not unexpected and not missing, unexpected, missing)

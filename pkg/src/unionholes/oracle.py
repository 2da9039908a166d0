"""Independent hole counter: voxelize the union and flood-fill its complement.

Cell centres are classified with exact integer arithmetic. For a facet
``<n, p> <= b`` (``n`` a primitive integer normal) and centres
``origin + (idx + 1/2) h``, the test reduces to ``<n, idx> <= T`` with an
integer threshold ``T``; each body then fills one index interval per grid
line. Components of empty cells are 6-connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .exact import Q, Vec3, format_rational, primitive_integer_vector
from .geometry import TranslateFamily

DEFAULT_CELL_BUDGET = 200_000_000
_INT64_SAFE = 2**62


class GridTooLarge(RuntimeError):
    """The requested resolution needs more cells than the budget allows."""


@dataclass
class VoxelGrid:
    origin: Vec3
    h: object
    dims: tuple[int, int, int]
    occupancy: np.ndarray  # bool, indexed [ix, iy, iz]

    @property
    def cells(self) -> int:
        return int(np.prod(self.dims))

    def center(self, idx) -> Vec3:
        return Vec3(*((self.origin[c] + (Q(idx[c]) + Q(1, 2)) * self.h) for c in range(3)))

    def padding_empty(self, layers: int = 2) -> bool:
        occ = self.occupancy
        for axis in range(3):
            for sl in (slice(0, layers), slice(-layers, None)):
                index = [slice(None)] * 3
                index[axis] = sl
                if occ[tuple(index)].any():
                    return False
        return True


def _grid_frame(family: TranslateFamily, h, padding: int) -> tuple[Vec3, tuple[int, int, int]]:
    lo, hi = family.bounding_box()
    origin = Vec3(*(lo[c] - padding * h for c in range(3)))
    dims = tuple(int(math.ceil((hi[c] - lo[c]) / h)) + 2 * padding for c in range(3))
    return origin, dims


def rasterize(
    family: TranslateFamily,
    h,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    padding: int = 2,
) -> VoxelGrid:
    """Occupancy of cell centres (exact test), with empty padding layers."""
    h, origin, dims = _prepare(family, h, cell_budget, padding)
    return VoxelGrid(origin, h, dims, _occupancy_slab(family, origin, h, dims, 0, dims[0]))


def _prepare(family: TranslateFamily, h, cell_budget: int, padding: int):
    h = Q(h)
    if h <= 0:
        raise ValueError("cell size must be positive")
    if len(family) == 0:
        raise ValueError("cannot rasterize an empty family")
    if padding < 2:
        raise ValueError("padding must be at least two layers")
    origin, dims = _grid_frame(family, h, padding)
    total = dims[0] * dims[1] * dims[2]
    if total > cell_budget:
        raise GridTooLarge(
            f"h={format_rational(h)} needs {total:.3g} cells (budget {cell_budget:.3g}); use a larger h"
        )
    return h, origin, dims


def _occupancy_slab(family, origin: Vec3, h, dims, x_lo: int, x_hi: int) -> np.ndarray:
    """Occupancy of the x-index range ``[x_lo, x_hi)``."""
    occ = np.zeros((x_hi - x_lo, dims[1], dims[2]), dtype=bool)
    for t in family:
        _fill_translate(occ, t, origin, h, dims, x_lo)
    return occ


def _floor_of(q) -> int:
    return int(q.numerator) // int(q.denominator)


def _index_box(t, origin: Vec3, h, dims) -> list[tuple[int, int]]:
    lo, hi = t.body.bounding_box(t.offset)
    box = []
    for c in range(3):
        # centres inside [lo, hi]: lo <= origin + (i + 1/2) h <= hi
        first = max(0, -_floor_of((origin[c] - lo[c]) / h + Q(1, 2)))
        last = min(dims[c] - 1, _floor_of((hi[c] - origin[c]) / h - Q(1, 2)))
        box.append((first, last))
    return box


def _fill_translate(occ: np.ndarray, t, origin: Vec3, h, dims, x_lo: int) -> None:
    box = _index_box(t, origin, h, dims)
    box[0] = (max(box[0][0], x_lo), min(box[0][1], x_lo + occ.shape[0] - 1))
    if any(a > b for a, b in box):
        return
    (i0, i1), (j0, j1), (k0, k1) = box
    js = np.arange(j0, j1 + 1, dtype=np.int64)[:, None]
    ks = np.arange(k0, k1 + 1, dtype=np.int64)[None, :]
    shape = (j1 - j0 + 1, k1 - k0 + 1)
    lo_i = np.full(shape, i0, dtype=np.int64)
    hi_i = np.full(shape, i1, dtype=np.int64)
    mask = np.ones(shape, dtype=bool)
    half = Q(1, 2)
    for normal, b in t.halfspaces():
        n = primitive_integer_vector(normal)
        c = next(c for c in range(3) if normal[c])
        bound = b * Q(n[c]) / normal[c]
        T = _floor_of((bound - sum(n[c] * (origin[c] + half * h) for c in range(3))) / h)
        nx, ny, nz = n
        reach = abs(nx) * dims[0] + abs(ny) * dims[1] + abs(nz) * dims[2] + abs(T)
        if reach < _INT64_SAFE:
            rest = T - (ny * js + nz * ks)
        else:
            rest = T - (ny * js.astype(object) + nz * ks.astype(object))
        if nx > 0:
            cap = rest // nx
            hi_i = np.minimum(hi_i, np.clip(cap, i0 - 1, i1).astype(np.int64))
        elif nx < 0:
            cap = -((-rest) // nx)
            lo_i = np.maximum(lo_i, np.clip(cap, i0, i1 + 1).astype(np.int64))
        else:
            mask &= np.asarray(rest >= 0, dtype=bool)
    ii = np.arange(i0, i1 + 1, dtype=np.int64)[:, None, None]
    inside = (ii >= lo_i[None]) & (ii <= hi_i[None]) & mask[None]
    occ[i0 - x_lo:i1 - x_lo + 1, j0:j1 + 1, k0:k1 + 1] |= inside


_SIX = ndimage.generate_binary_structure(3, 1)


def count_complement_components(grid: VoxelGrid) -> int:
    """6-connected components of empty cells, the outer one included."""
    if not grid.padding_empty():
        raise ValueError("grid lacks empty padding; the outer component is not guaranteed")
    _, count = ndimage.label(~grid.occupancy, structure=_SIX)
    return int(count)


DEFAULT_SLAB_CELLS = 50_000_000


def count_family_components(
    family: TranslateFamily,
    h,
    cell_budget: int = DEFAULT_CELL_BUDGET,
    slab_cells: int = DEFAULT_SLAB_CELLS,
) -> tuple[int, tuple[int, int, int]]:
    """Same count as ``count_complement_components(rasterize(...))`` in bounded memory.

    The grid is rasterized and labelled in x-slabs; labels of empty cells
    that face each other across a slab boundary are then merged.
    """
    h, origin, dims = _prepare(family, h, cell_budget, 2)
    step = max(1, slab_cells // (dims[1] * dims[2]))
    total = 0
    edges = []
    previous = None
    for x_lo in range(0, dims[0], step):
        x_hi = min(dims[0], x_lo + step)
        occ = _occupancy_slab(family, origin, h, dims, x_lo, x_hi)
        if x_lo < 2 and occ[: 2 - x_lo].any() or x_hi > dims[0] - 2 and occ[-(x_hi - dims[0] + 2):].any():
            raise ValueError("grid lacks empty padding")
        if occ[:, :2].any() or occ[:, -2:].any() or occ[:, :, :2].any() or occ[:, :, -2:].any():
            raise ValueError("grid lacks empty padding")
        labels, count = ndimage.label(~occ, structure=_SIX)
        del occ
        first = labels[0]
        if previous is not None:
            both = (previous > 0) & (first > 0)
            width = np.int64(total + count + 1)
            keys = np.unique(previous[both].astype(np.int64) * width + (first[both] + total))
            edges.append(np.stack([keys // width, keys % width]) - 1)
        previous = np.where(labels[-1] > 0, labels[-1] + total, 0)
        total += count
        del labels
    if total == 0:
        return 0, dims
    pairs = np.concatenate(edges, axis=1) if edges else np.zeros((2, 0), dtype=np.int64)
    graph = coo_matrix((np.ones(pairs.shape[1], dtype=np.int8), (pairs[0], pairs[1])), shape=(total, total))
    components, _ = connected_components(graph, directed=False)
    return int(components), dims


@dataclass
class OracleReport:
    h: object
    coarse: int
    fine: int
    dims: tuple

    @property
    def stable(self) -> bool:
        return self.coarse == self.fine

    @property
    def count(self) -> int:
        return self.fine

    def as_dict(self) -> dict:
        return {
            "h": format_rational(self.h),
            "h_fine": format_rational(self.h / 2),
            "count_h": {"value": self.coarse, "provenance": "oracle"},
            "count_h_half": {"value": self.fine, "provenance": "oracle"},
            "stable": self.stable,
            "grid_dims": list(self.dims),
        }


def oracle_hole_count(family: TranslateFamily, h, cell_budget: int = DEFAULT_CELL_BUDGET) -> OracleReport:
    """Voxel hole count at ``h`` and ``h/2``; unstable when they differ."""
    h = Q(h)
    coarse, _ = count_family_components(family, h, cell_budget)
    fine, dims = count_family_components(family, h / 2, cell_budget)
    return OracleReport(h, coarse, fine, dims)


def default_resolution(feature) -> object:
    """Cell size a quarter of the thinnest feature the family is built with."""
    feature = Q(feature)
    if feature <= 0:
        raise ValueError("feature size must be positive")
    return feature / 4


def write_occupancy_rle(grid: VoxelGrid, dest: TextIO) -> None:
    """Run-length dump of the occupancy.

    Header lines: ``dims nx ny nz``, ``origin x y z`` and ``h q`` (rationals
    as ``p/q``), ``order x-fastest``. The body is one line of run lengths
    alternating empty/occupied, starting with an empty run (possibly 0).
    """
    dest.write("# unionholes occupancy v1\n")
    dest.write("dims {} {} {}\n".format(*grid.dims))
    dest.write("origin " + " ".join(format_rational(c) for c in grid.origin) + "\n")
    dest.write(f"h {format_rational(grid.h)}\n")
    dest.write("order x-fastest\n")
    flat = grid.occupancy.transpose(2, 1, 0).ravel()
    change = np.flatnonzero(np.diff(flat.astype(np.int8))) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat.size and flat[0]:
        runs.insert(0, 0)
    dest.write(" ".join(str(r) for r in runs) + "\n")


def read_occupancy_rle(src: TextIO) -> VoxelGrid:
    header = {}
    body = None
    for line in src:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key in ("dims", "origin", "h", "order"):
            header[key] = rest.split()
        else:
            body = line
    dims = tuple(int(v) for v in header["dims"])
    origin = Vec3(*(Q(v) for v in header["origin"]))
    h = Q(header["h"][0])
    runs = [int(v) for v in (body or "").split()]
    values = np.repeat(np.arange(len(runs)) % 2 == 1, runs)
    occ = values.reshape(dims[2], dims[1], dims[0]).transpose(2, 1, 0).copy()
    return VoxelGrid(origin, h, dims, occ)

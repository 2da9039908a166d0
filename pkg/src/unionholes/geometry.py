"""Convex polytopes in 3-space with exact coordinates.

A :class:`ConvexBody` carries both its vertex list and its facet
inequalities. Bodies are produced by :func:`convex_hull`, an incremental
hull with exact orientation tests whose coplanar triangles are merged into
polygonal facets afterwards. Lower-dimensional inputs are not rejected;
they yield a body flagged with its affine dimension whose inequalities pin
it to its affine hull.
"""

from __future__ import annotations

import enum
import io
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

from .exact import (
    ONE,
    ORIGIN,
    ZERO,
    Feasibility,
    LinearSystem,
    Q,
    Vec3,
    decimal_string,
    lp_feasible,
    primitive_integer_vector,
)


def as_vec(p) -> Vec3:
    if isinstance(p, Vec3):
        return p
    x, y, z = p
    return Vec3(Q(x), Q(y), Q(z))


def orient(a: Vec3, b: Vec3, c: Vec3, d: Vec3):
    """Sign-carrying volume of the tetrahedron abcd (positive: d above abc)."""
    return (b - a).cross(c - a).dot(d - a)


@dataclass(frozen=True)
class Facet:
    """Halfspace ``<normal, p> <= offset``.

    ``corners`` lists vertex indices counter-clockwise seen from outside;
    it is empty for the pinning constraints of degenerate bodies.
    """

    normal: Vec3
    offset: object
    corners: tuple[int, ...] = ()

    def slack(self, p) -> object:
        return self.offset - self.normal.dot(p)


@dataclass(frozen=True)
class ConvexBody:
    vertices: tuple[Vec3, ...]
    facets: tuple[Facet, ...]
    dimension: int = 3
    label: str = ""
    _rows: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        rows = tuple((tuple(f.normal), f.offset) for f in self.facets)
        object.__setattr__(self, "_rows", rows)

    @property
    def degenerate(self) -> bool:
        return self.dimension < 3

    def contains(self, p, offset=ORIGIN) -> bool:
        return point_in_body(self, offset, p)

    def halfspaces(self, offset=ORIGIN) -> list[tuple[tuple, object]]:
        """Facet inequalities of ``self + offset``."""
        if isinstance(offset, Vec3) and offset.is_zero():
            return list(self._rows)
        ox, oy, oz = offset
        return [(n, b + n[0] * ox + n[1] * oy + n[2] * oz) for n, b in self._rows]

    def bounding_box(self, offset=ORIGIN) -> tuple[Vec3, Vec3]:
        lo = Vec3(*(min(v[i] for v in self.vertices) for i in range(3)))
        hi = Vec3(*(max(v[i] for v in self.vertices) for i in range(3)))
        return lo + offset, hi + offset

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for f in self.facets:
            c = f.corners
            for a, b in zip(c, c[1:] + c[:1]):
                out.add((min(a, b), max(a, b)))
        return out

    def vertex_index(self, p) -> int | None:
        p = as_vec(p)
        try:
            return self.vertices.index(p)
        except ValueError:
            return None

    def check(self) -> list[str]:
        """Return violated representation invariants (empty when sound)."""
        problems = []
        for i, v in enumerate(self.vertices):
            for j, f in enumerate(self.facets):
                if f.slack(v) < 0:
                    problems.append(f"vertex {i} violates facet {j}")
        if self.dimension == 3:
            for j, f in enumerate(self.facets):
                tight = [v for v in self.vertices if f.slack(v) == 0]
                if _affine_rank(tight) < 2:
                    problems.append(f"facet {j} is not supported by a triangle")
        return problems


def _affine_rank(points: Sequence[Vec3]) -> int:
    if not points:
        return -1
    base = points[0]
    dirs = [p - base for p in points[1:]]
    dirs = [d for d in dirs if not d.is_zero()]
    if not dirs:
        return 0
    u = dirs[0]
    second = next((d for d in dirs if not u.cross(d).is_zero()), None)
    if second is None:
        return 1
    nrm = u.cross(second)
    if any(nrm.dot(d) for d in dirs):
        return 3
    return 2


# --------------------------------------------------------------------------
# Hull construction
# --------------------------------------------------------------------------


def _plane_key(normal: Vec3, point: Vec3) -> tuple[Vec3, object]:
    ints = primitive_integer_vector(normal)
    n = Vec3(Q(ints[0]), Q(ints[1]), Q(ints[2]))
    return n, n.dot(point)


def _hull_2d(points: Sequence[Vec3], normal: Vec3) -> list[Vec3]:
    """Strict corners of coplanar points, counter-clockwise about ``normal``."""
    axis = max(range(3), key=lambda i: abs(normal[i]))
    keep = [i for i in range(3) if i != axis]
    # the projected orientation flips when the dropped axis points the wrong way
    flip = (normal[axis] < 0) != (axis == 1)
    lift = {(p[keep[0]], p[keep[1]]): p for p in points}
    ring = [lift[q] for q in convex_polygon(lift)]
    if flip:
        ring.reverse()
    return ring


def _point_body(p: Vec3, label: str) -> ConvexBody:
    facets = []
    for i in range(3):
        e = [ZERO, ZERO, ZERO]
        e[i] = ONE
        n = Vec3(*e)
        facets.append(Facet(n, p[i]))
        facets.append(Facet(-n, -p[i]))
    return ConvexBody((p,), tuple(facets), 0, label)


def _segment_body(points: Sequence[Vec3], label: str) -> ConvexBody:
    a, b = min(points), max(points)
    d = b - a
    helper = Vec3(ONE, ZERO, ZERO)
    if d.cross(helper).is_zero():
        helper = Vec3(ZERO, ONE, ZERO)
    n1 = d.cross(helper)
    n2 = d.cross(n1)
    facets = [
        Facet(n1, n1.dot(a)),
        Facet(-n1, -n1.dot(a)),
        Facet(n2, n2.dot(a)),
        Facet(-n2, -n2.dot(a)),
        Facet(d, d.dot(b)),
        Facet(-d, -d.dot(a)),
    ]
    return ConvexBody((a, b), tuple(facets), 1, label)


def _polygon_body(points: Sequence[Vec3], normal: Vec3, label: str) -> ConvexBody:
    ring = _hull_2d(points, normal)
    n, off = _plane_key(normal, ring[0])
    facets = [Facet(n, off, tuple(range(len(ring)))), Facet(-n, -off, tuple(reversed(range(len(ring)))))]
    for a, b in zip(ring, ring[1:] + ring[:1]):
        out = (b - a).cross(n)
        facets.append(Facet(out, out.dot(a)))
    return ConvexBody(tuple(ring), tuple(facets), 2, label)


def convex_hull(points: Iterable, label: str = "") -> ConvexBody:
    """Exact convex hull of a finite point set.

    The result lists exactly the extreme points of the input, and one facet
    per supporting plane (coplanar triangles are merged). Inputs whose affine
    hull is lower dimensional return a body with ``dimension < 3``.
    """
    pts: list[Vec3] = []
    seen = set()
    for p in points:
        v = as_vec(p)
        if v not in seen:
            seen.add(v)
            pts.append(v)
    if not pts:
        raise ValueError("convex hull of an empty point set")
    p0 = pts[0]
    i1 = next((i for i, p in enumerate(pts) if p != p0), None)
    if i1 is None:
        return _point_body(p0, label)
    u = pts[i1] - p0
    i2 = next((i for i, p in enumerate(pts) if not u.cross(p - p0).is_zero()), None)
    if i2 is None:
        return _segment_body(pts, label)
    nrm = u.cross(pts[i2] - p0)
    i3 = next((i for i, p in enumerate(pts) if nrm.dot(p - p0)), None)
    if i3 is None:
        return _polygon_body(pts, nrm, label)

    seed = [0, i1, i2, i3]
    if orient(pts[0], pts[i1], pts[i2], pts[i3]) > 0:
        seed = [0, i2, i1, i3]
    a, b, c, d = seed
    # faces are (i, j, k, normal, offset) with the normal pointing outward
    faces = []
    for tri in ((a, b, c), (a, d, b), (b, d, c), (a, c, d)):
        faces.append(_face(pts, *tri))

    used = set(seed)
    for idx, p in enumerate(pts):
        if idx in used:
            continue
        visible = [f for f in faces if f[3].dot(p) > f[4]]
        if not visible:
            continue
        vis_edges = set()
        for f in visible:
            i, j, k = f[:3]
            vis_edges.update(((i, j), (j, k), (k, i)))
        horizon = [(s, t) for s, t in vis_edges if (t, s) not in vis_edges]
        vis_ids = {id(f) for f in visible}
        faces = [f for f in faces if id(f) not in vis_ids]
        faces.extend(_face(pts, s, t, idx) for s, t in horizon)

    groups: dict[tuple, set[int]] = {}
    order: list[tuple] = []
    for i, j, k, n, off in faces:
        key = _plane_key(n, pts[i])
        if key not in groups:
            groups[key] = set()
            order.append(key)
        groups[key].update((i, j, k))

    rings = []
    for key in order:
        n, off = key
        rings.append((n, off, _hull_2d([pts[i] for i in groups[key]], n)))
    corner_set = sorted({p for _, _, ring in rings for p in ring})
    index = {p: i for i, p in enumerate(corner_set)}
    facets = tuple(Facet(n, off, tuple(index[p] for p in ring)) for n, off, ring in rings)
    return ConvexBody(tuple(corner_set), facets, 3, label)


def _face(pts, i, j, k):
    n = (pts[j] - pts[i]).cross(pts[k] - pts[i])
    return (i, j, k, n, n.dot(pts[i]))


# --------------------------------------------------------------------------
# Queries
# --------------------------------------------------------------------------


def point_in_body(body: ConvexBody, offset, p) -> bool:
    """Closed containment of ``p`` in ``body + offset``."""
    q = as_vec(p) - as_vec(offset)
    for n, b in body._rows:
        if n[0] * q[0] + n[1] * q[1] + n[2] * q[2] > b:
            return False
    return True


class Role(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    GENERIC = "T"


@dataclass(frozen=True)
class Translate:
    """The body shifted by ``offset`` (Minkowski sum with a single point)."""

    body: ConvexBody
    offset: Vec3
    role: Role = Role.GENERIC
    index: int = 0

    @property
    def name(self) -> str:
        return f"{self.role.value}{self.index}"

    def contains(self, p) -> bool:
        return point_in_body(self.body, self.offset, p)

    def halfspaces(self):
        return self.body.halfspaces(self.offset)

    def vertices(self) -> list[Vec3]:
        return [v + self.offset for v in self.body.vertices]


@dataclass(frozen=True)
class TranslateFamily:
    translates: tuple[Translate, ...]
    label: str = ""

    def __post_init__(self):
        seen = set()
        for t in self.translates:
            key = (t.role, t.index)
            if key in seen:
                raise ValueError(f"duplicate translate {t.name}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.translates)

    def __iter__(self):
        return iter(self.translates)

    def __getitem__(self, i):
        return self.translates[i]

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.translates]

    @property
    def bodies(self) -> list[ConvexBody]:
        out: list[ConvexBody] = []
        for t in self.translates:
            if not any(t.body is b for b in out):
                out.append(t.body)
        return out

    def by_name(self, name: str) -> Translate:
        for t in self.translates:
            if t.name == name:
                return t
        raise KeyError(name)

    def bounding_box(self) -> tuple[Vec3, Vec3]:
        boxes = [t.body.bounding_box(t.offset) for t in self.translates]
        lo = Vec3(*(min(b[0][i] for b in boxes) for i in range(3)))
        hi = Vec3(*(max(b[1][i] for b in boxes) for i in range(3)))
        return lo, hi


def family_of(bodies_and_offsets: Iterable[tuple[ConvexBody, object]], label: str = "") -> TranslateFamily:
    """Generic family: the i-th entry becomes translate ``T{i+1}``."""
    ts = tuple(
        Translate(body, as_vec(off), Role.GENERIC, i + 1)
        for i, (body, off) in enumerate(bodies_and_offsets)
    )
    return TranslateFamily(ts, label)


def bodies_intersect(translates: Sequence[Translate]) -> Feasibility:
    """Exact test for a common point of closed translates.

    Solves a 3-variable feasibility problem over all shifted facet
    inequalities; on success the witness lies in every translate.
    """
    if not translates:
        raise ValueError("intersection of an empty collection is undefined")
    rows = []
    for t in translates:
        rows.extend(t.halfspaces())
    return lp_feasible(LinearSystem(tuple(rows), (), 3))


def is_extreme_point(body: ConvexBody, p) -> bool:
    """True iff ``p`` is not a convex combination of the body's other vertices.

    Decided by searching for a plane that strictly separates ``p`` from the
    remaining vertices; such a plane is found exactly when it exists.
    """
    p = as_vec(p)
    others = [v for v in body.vertices if v != p]
    if not others:
        return True
    return _strictly_separable([p], others) is not None


@dataclass(frozen=True)
class Plane:
    """``<normal, x> = offset``; the first set lies on the ``<`` side."""

    normal: Vec3
    offset: object

    def side(self, p) -> int:
        s = self.normal.dot(p) - self.offset
        return (s > 0) - (s < 0)


def _strictly_separable(first: Sequence[Vec3], second: Sequence[Vec3]) -> Plane | None:
    # variables (c0, c1, c2, d): c.a <= d - 1 on first, c.b >= d + 1 on second
    rows = []
    for a in first:
        rows.append(((a[0], a[1], a[2], -ONE), -ONE))
    for b in second:
        rows.append(((-b[0], -b[1], -b[2], ONE), -ONE))
    res = lp_feasible(LinearSystem(tuple(rows), (), 4))
    if not res:
        return None
    c0, c1, c2, d = res.witness
    return Plane(Vec3(c0, c1, c2), d)


def separate(body_a: ConvexBody, body_b: ConvexBody, offset_a=ORIGIN, offset_b=ORIGIN) -> Plane | None:
    """A plane strictly separating the two (translated) bodies, or None."""
    va = [v + as_vec(offset_a) for v in body_a.vertices]
    vb = [v + as_vec(offset_b) for v in body_b.vertices]
    return _strictly_separable(va, vb)


def distance_lower_bound(body: ConvexBody, p, offset=ORIGIN):
    """A rational lower bound on the Euclidean distance from ``p`` to the body.

    Uses the best facet margin ``(<n, p> - b) / |n|_1``; the L1 norm bounds
    the Euclidean norm from above, so no square roots are needed. Returns 0
    for points inside the body.
    """
    q = as_vec(p) - as_vec(offset)
    best = ZERO
    for n, b in body._rows:
        gap = n[0] * q[0] + n[1] * q[1] + n[2] * q[2] - b
        if gap > 0:
            bound = gap / (abs(n[0]) + abs(n[1]) + abs(n[2]))
            if bound > best:
                best = bound
    return best


# --------------------------------------------------------------------------
# Planar sections (used to size the warm-up construction)
# --------------------------------------------------------------------------


def plane_section(body: ConvexBody, axis: int, value, offset=ORIGIN) -> list[tuple]:
    """Convex polygon ``(body + offset) ∩ {coord[axis] = value}``.

    Returned as counter-clockwise 2D points in the remaining two coordinates
    (in increasing axis order).
    """
    value = Q(value)
    off = as_vec(offset)
    keep = [i for i in range(3) if i != axis]
    verts = [v + off for v in body.vertices]
    pts = set()
    for v in verts:
        if v[axis] == value:
            pts.add((v[keep[0]], v[keep[1]]))
    for i, j in body.edges():
        a, b = verts[i], verts[j]
        if (a[axis] - value) * (b[axis] - value) < 0:
            t = (value - a[axis]) / (b[axis] - a[axis])
            p = a + (b - a) * t
            pts.add((p[keep[0]], p[keep[1]]))
    return convex_polygon(pts)


def _cross2(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_polygon(points: Iterable[tuple]) -> list[tuple]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def clip_polygon(subject: list[tuple], clip: list[tuple]) -> list[tuple]:
    """Intersection of two counter-clockwise convex polygons (exact)."""
    out = list(subject)
    n = len(clip)
    for idx in range(n):
        a, b = clip[idx], clip[(idx + 1) % n]
        if not out:
            break
        inp, out = out, []
        for k in range(len(inp)):
            p, q = inp[k], inp[(k + 1) % len(inp)]
            sp, sq = _cross2(a, b, p), _cross2(a, b, q)
            if sp >= 0:
                out.append(p)
            if (sp > 0 > sq) or (sp < 0 < sq):
                t = sp / (sp - sq)
                out.append((p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t))
    return convex_polygon(out)


# --------------------------------------------------------------------------
# Export
# --------------------------------------------------------------------------


def write_obj(body: ConvexBody, dest: str | os.PathLike | TextIO, offset=ORIGIN, digits: int = 6) -> None:
    """Write the (translated) body as a Wavefront OBJ triangle mesh."""
    off = as_vec(offset)
    buf = io.StringIO()
    buf.write(f"# {body.label or 'convex body'}: {len(body.vertices)} vertices, dimension {body.dimension}\n")
    for v in body.vertices:
        w = v + off
        buf.write("v " + " ".join(decimal_string(c, digits) for c in w) + "\n")
    for f in body.facets:
        c = f.corners
        for k in range(1, len(c) - 1):
            buf.write(f"f {c[0] + 1} {c[k] + 1} {c[k + 1] + 1}\n")
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="ascii") as fh:
            fh.write(text)

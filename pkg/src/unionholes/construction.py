"""The convex bodies and translate families whose unions have many holes.

Two constructions live here:

* the warm-up polytope (hull of seven points) with ``2m + 1`` translates
  whose union has a grid of holes against one facet, and
* the "universal" body built from two convex polygonal paths, with ``3m``
  translates ``A_i, B_j, C_k`` whose union has ``m^3 - m + 1`` holes.

The universal body is infinite in principle. We build a finite rational
stand-in: both paths are truncated and capped with a limit vertex whose
coordinates are rational surrogates for the zeta values. Everything the
hole count depends on (extremality of the path vertices, the shape of the
nerve) is checked on the resulting polytope rather than assumed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

from .exact import ONE, ZERO, Q, Vec3, format_rational
from .geometry import (
    ConvexBody,
    Plane,
    Role,
    Translate,
    TranslateFamily,
    clip_polygon,
    convex_hull,
    distance_lower_bound,
    plane_section,
    point_in_body,
    separate,
)


class ConstructionError(RuntimeError):
    """A geometric certificate required by the construction failed."""

    def __init__(self, message: str, certificate: str = ""):
        super().__init__(message)
        self.certificate = certificate or message


def _partial_sum(power: int, upto: int):
    return sum((Q(1, t**power) for t in range(1, upto + 1)), ZERO)


@dataclass(frozen=True)
class ConstructionParams:
    m: int
    path_depth: int  # J: number of eta steps kept before the limit vertex
    gamma_length: int  # M: number of gamma steps kept before the limit vertex
    t: object = Q(2)
    zeta2: object = Q(33, 20)
    zeta3: object = Q(6, 5)

    @classmethod
    def for_m(cls, m: int, **overrides) -> "ConstructionParams":
        values = dict(m=m, path_depth=m + 1, gamma_length=m + 2)
        values.update({k: v for k, v in overrides.items() if v is not None})
        for key in ("t", "zeta2", "zeta3"):
            if key in values:
                values[key] = Q(values[key])
        params = cls(**values)
        params.validate()
        return params

    def validate(self) -> None:
        m, J, M = self.m, self.path_depth, self.gamma_length
        if m < 1:
            raise ValueError(f"m must be at least 1, got {m}")
        if J < m + 1:
            raise ValueError(f"path depth {J} must be at least m + 1 = {m + 1}")
        if M < m + 2:
            raise ValueError(f"gamma length {M} must be at least m + 2 = {m + 2}")
        z2, z3 = Q(self.zeta2), Q(self.zeta3)
        if not Q(3, 2) < z2 < Q(7, 4):
            raise ValueError(f"zeta2 surrogate {format_rational(z2)} outside (3/2, 7/4)")
        if not ONE < z3 < Q(5, 4):
            raise ValueError(f"zeta3 surrogate {format_rational(z3)} outside (1, 5/4)")
        top = max(J, M)
        if z2 <= _partial_sum(2, top):
            raise ValueError(
                f"zeta2 surrogate {format_rational(z2)} does not exceed the {top}-term partial sum"
            )
        if z3 <= _partial_sum(3, top):
            raise ValueError(
                f"zeta3 surrogate {format_rational(z3)} does not exceed the {top}-term partial sum"
            )
        if Q(self.t) <= 0:
            raise ValueError("back displacement t must be positive")

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "path_depth": self.path_depth,
            "gamma_length": self.gamma_length,
            "t": format_rational(self.t),
            "zeta2": format_rational(self.zeta2),
            "zeta3": format_rational(self.zeta3),
        }


# --------------------------------------------------------------------------
# Paths and grid
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PathPair:
    """``gamma`` in the plane z = 0 and ``eta`` in the plane x = 0.

    The last vertex of each is the rational stand-in for the limit point.
    """

    gamma: tuple[Vec3, ...]
    eta: tuple[Vec3, ...]


def _turns(path, a: int, b: int) -> list:
    out = []
    for p, q, r in zip(path, path[1:], path[2:]):
        u, v = q - p, r - q
        out.append(u[a] * v[b] - u[b] * v[a])
    return out


def path_is_convex(path, plane_axes: tuple[int, int], monotone_axis: int, sign: int) -> bool:
    """Strictly monotone along ``monotone_axis`` with every turn of sign ``sign``."""
    steps = [q[monotone_axis] - p[monotone_axis] for p, q in zip(path, path[1:])]
    if not (all(s > 0 for s in steps) or all(s < 0 for s in steps)):
        return False
    return all((t > 0) - (t < 0) == sign for t in _turns(path, *plane_axes))


def gamma_is_convex(gamma) -> bool:
    # convex toward -y: x strictly increasing, slope strictly decreasing
    return all(p.z == 0 for p in gamma) and path_is_convex(gamma, (0, 1), 0, -1)


def eta_is_convex(eta) -> bool:
    # convex toward -y and -z: y decreasing, z increasing, dz/|dy| decreasing
    if not all(p.x == 0 for p in eta):
        return False
    z_up = all(q.z > p.z for p, q in zip(eta, eta[1:]))
    return z_up and path_is_convex(eta, (1, 2), 1, 1)


def build_paths(params: ConstructionParams) -> PathPair:
    params.validate()
    gamma = [Vec3(ZERO, ZERO, ZERO)]
    for k in range(1, params.gamma_length + 1):
        gamma.append(gamma[-1] + (Q(1, k * k), Q(1, k**3), ZERO))
    gamma.append(Vec3(Q(params.zeta2), Q(params.zeta3), ZERO))
    eta = [Vec3(ZERO, ZERO, ZERO)]
    for j in range(1, params.path_depth + 1):
        eta.append(eta[-1] + (ZERO, -Q(1, j * j), Q(1, j**3)))
    eta.append(Vec3(ZERO, -Q(params.zeta2), Q(params.zeta3)))
    pair = PathPair(tuple(gamma), tuple(eta))
    if not gamma_is_convex(pair.gamma):
        raise ValueError("gamma is not convex in direction (0,-1,0) with these surrogates")
    if not eta_is_convex(pair.eta):
        raise ValueError("eta is not convex in directions (0,-1,0) and (0,0,-1) with these surrogates")
    return pair


@dataclass(frozen=True)
class GridPoints:
    """``w[j, k] = eta[j] + gamma[k]`` and the marked points ``v[j, k]``.

    Index ``J + 1`` (resp. ``M + 1``) stands for the limit vertex of eta
    (resp. gamma). ``v[j, k]`` sits on the edge ``w[j, k] w[j, k+1]`` for
    every edge of the truncated gamma, the capping edge included.
    """

    w: dict
    v: dict
    path_depth: int
    gamma_length: int

    def eta_hat(self, j: int) -> list[Vec3]:
        M = self.gamma_length
        return [self.w[j, 0]] + [self.v[j, k] for k in range(M + 1)] + [self.w[j, M + 1]]

    def eta_hat_limit(self) -> list[Vec3]:
        return [self.w[self.path_depth + 1, k] for k in range(self.gamma_length + 2)]


def marked_point(w_here: Vec3, w_next: Vec3, j: int) -> Vec3:
    cube = Q((j + 1) ** 3)
    return w_here * (ONE / cube) + w_next * ((cube - 1) / cube)


def build_grid(params: ConstructionParams, paths: PathPair | None = None) -> GridPoints:
    paths = paths or build_paths(params)
    w = {}
    for j, e in enumerate(paths.eta):
        for k, g in enumerate(paths.gamma):
            w[j, k] = e + g
    v = {}
    for j in range(params.path_depth + 1):
        for k in range(params.gamma_length + 1):
            v[j, k] = marked_point(w[j, k], w[j, k + 1], j)
    return GridPoints(w, v, params.path_depth, params.gamma_length)


# --------------------------------------------------------------------------
# The body
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UniversalBody:
    params: ConstructionParams
    paths: PathPair
    grid: GridPoints
    front: ConvexBody
    back: ConvexBody
    body: ConvexBody
    separator: Plane
    u0: Vec3
    u1: Vec3

    def w(self, j: int, k: int) -> Vec3:
        return self.grid.w[j, k]

    def v(self, j: int, k: int) -> Vec3:
        return self.grid.v[j, k]

    def edge(self, k: int) -> tuple[Vec3, Vec3]:
        """The edge ``E_k`` from ``w[0, k]`` to ``w[0, k+1]``."""
        return self.grid.w[0, k], self.grid.w[0, k + 1]


def front_points(grid: GridPoints) -> list[Vec3]:
    pts = []
    for j in range(grid.path_depth + 1):
        pts.extend(grid.eta_hat(j))
    pts.extend(grid.eta_hat_limit())
    return pts


def back_points(params: ConstructionParams, paths: PathPair) -> tuple[Vec3, Vec3, list[Vec3]]:
    u1 = Vec3(Q(params.zeta2), -Q(params.t), Q(params.zeta3))
    u0 = Vec3(Q(params.zeta2), -Q(params.t), ZERO)
    pts = []
    for g in paths.gamma:
        pts.append(u0 - g)
        pts.append(u1 - g)
    return u0, u1, pts


def build_body(params: ConstructionParams) -> UniversalBody:
    """Hull of the marked front paths and the back prism, with certificates."""
    paths = build_paths(params)
    grid = build_grid(params, paths)
    fpts = front_points(grid)
    u0, u1, bpts = back_points(params, paths)
    front = convex_hull(fpts, "front")
    back = convex_hull(bpts, "back")
    plane = separate(front, back)
    if plane is None:
        raise ConstructionError(
            f"front and back hulls are not disjoint for t = {format_rational(params.t)}",
            "separate(front, back)",
        )
    body = convex_hull(fpts + bpts, f"K(m={params.m})")
    return UniversalBody(params, paths, grid, front, back, body, plane, u0, u1)


# --------------------------------------------------------------------------
# The family and its epsilon
# --------------------------------------------------------------------------


def family_offsets(ub: UniversalBody, eps) -> dict[str, Vec3]:
    m = ub.params.m
    eps = Q(eps)
    out = {}
    for i in range(1, m + 1):
        out[f"A{i}"] = Vec3(ZERO, ZERO, -Q(i, m) * eps)
    for j in range(1, m + 1):
        out[f"B{j}"] = -ub.w(j, 0)
    for k in range(1, m + 1):
        out[f"C{k}"] = ub.w(0, k) - (ub.u1 - ub.w(0, k + 1))
    return out


def build_family(ub: UniversalBody, eps) -> TranslateFamily:
    """``A_1..A_m, B_1..B_m, C_1..C_m`` in that order."""
    if Q(eps) <= 0:
        raise ValueError("epsilon must be positive")
    offs = family_offsets(ub, eps)
    m = ub.params.m
    ts = []
    for role in (Role.A, Role.B, Role.C):
        for idx in range(1, m + 1):
            ts.append(Translate(ub.body, offs[f"{role.value}{idx}"], role, idx))
    return TranslateFamily(tuple(ts), f"universal family m={m} eps={format_rational(eps)}")


@dataclass(frozen=True)
class NervePrediction:
    """Inclusion-maximal subfamilies of the nerve, as sets of member names."""

    m: int
    maximal: tuple[frozenset, ...]

    def faces(self, max_size: int) -> set[frozenset]:
        out = set()
        for fam in self.maximal:
            members = sorted(fam)
            for r in range(1, min(max_size, len(members)) + 1):
                out.update(frozenset(c) for c in itertools.combinations(members, r))
        return out

    def count(self, size: int) -> int:
        return sum(1 for f in self.faces(size) if len(f) == size)


def predicted_nerve(m: int) -> NervePrediction:
    if m < 1:
        raise ValueError("m must be at least 1")
    A = [f"A{i}" for i in range(1, m + 1)]
    B = [f"B{j}" for j in range(1, m + 1)]
    C = [f"C{k}" for k in range(1, m + 1)]
    cands = [frozenset(A + B), frozenset(B + C)]
    for i in range(m):
        for k in range(m - 1):
            cands.append(frozenset((A[i], C[k], C[k + 1])))
    for i, j, k in itertools.product(range(m), repeat=3):
        cands.append(frozenset((A[i], B[j], C[k])))
    unique = list(dict.fromkeys(cands))
    maximal = tuple(s for s in unique if not any(s < t for t in unique))
    return NervePrediction(m, maximal)


def expected_two_simplices(m: int) -> int:
    return m**3 + m * (m - 1) + 2 * math.comb(2 * m, 3) - math.comb(m, 3)


def expected_holes(m: int) -> int:
    return m**3 - m + 1


@dataclass
class EpsilonBudget:
    eps1: object
    eps2: object  # squared distance, kept rational
    eps: object
    halvings: int
    attempts: list = field(default_factory=list)
    certificate: object = None

    def as_dict(self) -> dict:
        return {
            "eps1": format_rational(self.eps1),
            "eps2_squared": format_rational(self.eps2),
            "eps": format_rational(self.eps),
            "halvings": self.halvings,
            "attempts": [
                {"eps": format_rational(e), "nerve_matches": ok} for e, ok in self.attempts
            ],
        }


def epsilon_bounds(ub: UniversalBody) -> tuple:
    """(eps1, eps2 squared) for the body.

    eps1 bounds from below the distance of every ``w[j, k]`` (j, k in [m])
    to the body; eps2 is the smallest squared distance between the points
    ``v[j, k] + b_j`` on gamma.
    """
    m = ub.params.m
    eps1 = None
    for j in range(1, m + 1):
        for k in range(1, m + 1):
            d = distance_lower_bound(ub.body, ub.w(j, k))
            if d <= 0:
                raise ConstructionError(f"w[{j},{k}] lies in the body", f"w[{j},{k}] outside K")
            eps1 = d if eps1 is None else min(eps1, d)
    pts = [ub.v(j, k) - ub.w(j, 0) for j in range(1, m + 1) for k in range(1, m + 1)]
    eps2 = None
    for p, q in itertools.combinations(pts, 2):
        d = p - q
        sq = d.dot(d)
        eps2 = sq if eps2 is None else min(eps2, sq)
    return eps1, (eps2 if eps2 is not None else ZERO)


def choose_epsilon(
    ub: UniversalBody,
    validate: Callable[[TranslateFamily], object] | None = None,
    max_halvings: int = 64,
) -> EpsilonBudget:
    """Halve epsilon until the family's nerve matches the predicted one.

    ``validate`` receives a candidate family and returns a truthy
    certificate on success. By default it computes the nerve up to
    dimension 3 and compares it with :func:`predicted_nerve`.
    """
    if validate is None:
        from .topology import nerve_skeleton, verify_nerve_matches

        prediction = predicted_nerve(ub.params.m)

        def validate(fam):
            return verify_nerve_matches(nerve_skeleton(fam, 3), prediction)

    eps1, eps2 = epsilon_bounds(ub)
    eps = min(eps1, Q(1, 8 * ub.params.m))
    halvings = 0
    while eps >= eps1:
        eps /= 2
        halvings += 1
    attempts = []
    while halvings <= max_halvings:
        cert = validate(build_family(ub, eps))
        attempts.append((eps, bool(cert)))
        if cert:
            return EpsilonBudget(eps1, eps2, eps, halvings, attempts, cert)
        eps /= 2
        halvings += 1
    raise ConstructionError(
        f"no valid epsilon after {max_halvings} halvings", "verify_nerve_matches"
    )


# --------------------------------------------------------------------------
# Witness points for the maximal subfamilies
# --------------------------------------------------------------------------


@dataclass
class ClaimResult:
    claim: int
    description: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.failures

    def as_dict(self) -> dict:
        return {
            "claim": self.claim,
            "description": self.description,
            "points_checked": self.checked,
            "passed": self.passed,
            "failures": self.failures,
        }


@dataclass
class WitnessReport:
    claims: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def as_dict(self) -> dict:
        return {"passed": self.passed, "claims": [c.as_dict() for c in self.claims]}


def _check(result: ClaimResult, family: TranslateFamily, point: Vec3, names, tag: str) -> None:
    result.checked += 1
    for name in names:
        t = family.by_name(name)
        if not point_in_body(t.body, t.offset, point):
            result.failures.append({"point": tag, "translate": name})


def verify_witnesses(ub: UniversalBody, family: TranslateFamily, shift: Vec3 | None = None) -> WitnessReport:
    """Membership checks of the four explicit witness points.

    ``shift`` perturbs the first claim's points (used to show the check can
    fail).
    """
    m = ub.params.m
    shift = shift or Vec3(ZERO, ZERO, ZERO)
    offs = {t.name: t.offset for t in family}
    c1 = ClaimResult(1, "w[0,k+1] + a_i in A_i, C_k, C_k+1")
    for i in range(1, m + 1):
        for k in range(1, m):
            p = ub.w(0, k + 1) + offs[f"A{i}"] + shift
            _check(c1, family, p, (f"A{i}", f"C{k}", f"C{k + 1}"), f"i={i},k={k}")
    if m == 1:
        c1.checked = max(c1.checked, 1)  # vacuous: no consecutive C pair
    c2 = ClaimResult(2, "v[j,k] + a_i + b_j in A_i, B_j, C_k")
    for i, j, k in itertools.product(range(1, m + 1), repeat=3):
        p = ub.v(j, k) + offs[f"A{i}"] + offs[f"B{j}"]
        _check(c2, family, p, (f"A{i}", f"B{j}", f"C{k}"), f"i={i},j={j},k={k}")
    c3 = ClaimResult(3, "(0,-1,0) in every A_i and B_j")
    names = [f"A{i}" for i in range(1, m + 1)] + [f"B{j}" for j in range(1, m + 1)]
    _check(c3, family, Vec3(ZERO, -ONE, ZERO), names, "(0,-1,0)")
    c4 = ClaimResult(4, "(zeta2, 2, -1) in every B_j and C_k")
    names = [f"B{j}" for j in range(1, m + 1)] + [f"C{k}" for k in range(1, m + 1)]
    _check(c4, family, Vec3(Q(ub.params.zeta2), Q(2), -ONE), names, "(zeta2,2,-1)")
    return WitnessReport([c1, c2, c3, c4])


# --------------------------------------------------------------------------
# Warm-up: many holes against one facet
# --------------------------------------------------------------------------

WARMUP_VERTICES = {
    "a": (0, 0, 0),
    "b": (1, 0, 0),
    "c": (0, 0, -1),
    "d": (1, 0, -1),
    "e": (Q(1, 2), Q(1, 2), Q(1, 2)),
    "f": (0, 1, 0),
    "g": (1, 1, 0),
}


def build_warmup_body() -> ConvexBody:
    return convex_hull(WARMUP_VERTICES.values(), "warm-up K")


@dataclass(frozen=True)
class WarmupLayout:
    m: int
    ell: object  # depth of the notches between consecutive B sections on F
    c_prime: Vec3
    apex_x: tuple  # x coordinates of the B apices on edge ab
    a_depths: tuple  # z coordinates of the A edges on F

    @property
    def feature_size(self):
        """Height of the lowest notch piece, the thinnest gap of the grid."""
        return self.ell / (2 * self.m)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "ell": format_rational(self.ell),
            "c_prime": [format_rational(c) for c in self.c_prime],
            "b_apex_x": [format_rational(x) for x in self.apex_x],
            "a_edge_z": [format_rational(z) for z in self.a_depths],
            "spacing_rule": "B apex j at x=(2j-1)/(2m); A edge i at z=-(2i-1)*ell/(2m)",
        }


def warmup_layout(m: int, body: ConvexBody | None = None) -> WarmupLayout:
    if m < 2:
        raise ValueError(f"the warm-up grid needs m >= 2, got {m}")
    body = body or build_warmup_body()
    e = Vec3.of(*WARMUP_VERTICES["e"])
    apex_x = tuple(Q(2 * j - 1, 2 * m) for j in range(1, m + 1))
    # sections of B_1 and B_2 by the plane y = 0 of F, in (x, z) coordinates
    sec = []
    for x in apex_x[:2]:
        off = Vec3(x, ZERO, ZERO) - e
        sec.append(plane_section(body, 1, ZERO, off))
    both = clip_polygon(sec[0], sec[1])
    ell = -max(p[1] for p in both)
    if ell <= 0:
        raise ConstructionError("consecutive B sections reach the edge ab", "ell > 0")
    c_prime = Vec3(ZERO, ZERO, -ell)
    depths = tuple(-Q(2 * i - 1, 2 * m) * ell for i in range(1, m + 1))
    return WarmupLayout(m, ell, c_prime, apex_x, depths)


def build_warmup_family(m: int) -> tuple[TranslateFamily, WarmupLayout]:
    body = build_warmup_body()
    layout = warmup_layout(m, body)
    e = Vec3.of(*WARMUP_VERTICES["e"])
    f = Vec3.of(*WARMUP_VERTICES["f"])
    ts = [Translate(body, Vec3(ZERO, ZERO, ZERO), Role.C, 1)]
    for j, x in enumerate(layout.apex_x, start=1):
        ts.append(Translate(body, Vec3(x, ZERO, ZERO) - e, Role.B, j))
    for i, z in enumerate(layout.a_depths, start=1):
        ts.append(Translate(body, Vec3(ZERO, ZERO, z) - f, Role.A, i))
    return TranslateFamily(tuple(ts), f"warm-up family m={m}"), layout

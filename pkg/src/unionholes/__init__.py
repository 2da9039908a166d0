"""Exact hole counts for unions of convex polytopes in 3-space."""

__version__ = "0.1.0"

from .exact import Q, Vec3, format_rational, parse_rational
from .geometry import ConvexBody, Translate, TranslateFamily, bodies_intersect, convex_hull, family_of
from .construction import (
    ConstructionParams,
    build_body,
    build_family,
    build_warmup_family,
    choose_epsilon,
    expected_holes,
    predicted_nerve,
    verify_witnesses,
)
from .topology import SimplicialComplex, betti, boundary_matrix, hole_count, nerve_skeleton, verify_nerve_matches
from .oracle import oracle_hole_count, rasterize

__all__ = [
    "Q",
    "Vec3",
    "format_rational",
    "parse_rational",
    "ConvexBody",
    "Translate",
    "TranslateFamily",
    "bodies_intersect",
    "convex_hull",
    "family_of",
    "ConstructionParams",
    "build_body",
    "build_family",
    "build_warmup_family",
    "choose_epsilon",
    "expected_holes",
    "predicted_nerve",
    "verify_witnesses",
    "SimplicialComplex",
    "betti",
    "boundary_matrix",
    "hole_count",
    "nerve_skeleton",
    "verify_nerve_matches",
    "oracle_hole_count",
    "rasterize",
]

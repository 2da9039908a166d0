import itertools

import pytest
from hypothesis import given, strategies as st

from unionholes.construction import (
    ConstructionError,
    ConstructionParams,
    build_body,
    build_family,
    build_grid,
    build_paths,
    build_warmup_family,
    expected_two_simplices,
    eta_is_convex,
    gamma_is_convex,
    predicted_nerve,
    verify_witnesses,
)
from unionholes.exact import Q, Vec3
from unionholes.geometry import bodies_intersect, is_extreme_point, point_in_body
from unionholes.topology import nerve_skeleton, verify_nerve_matches


def names(*groups):
    return frozenset(groups)


# -- parameters and paths ---------------------------------------------------


def test_defaults():
    p = ConstructionParams.for_m(2)
    assert (p.path_depth, p.gamma_length) == (3, 4)
    assert p.zeta2 == Q(33, 20) and p.zeta3 == Q(6, 5) and p.t == 2


@pytest.mark.parametrize(
    "overrides",
    [
        {"zeta2": "3/2"},
        {"zeta3": "5/4"},
        {"zeta2": "8/5", "gamma_length": 30},
        {"zeta3": "101/100", "path_depth": 10},
        {"path_depth": 1},
        {"t": "0"},
    ],
)
def test_invalid_parameters_rejected(overrides):
    with pytest.raises(ValueError):
        ConstructionParams.for_m(2, **overrides)


def test_path_vertices():
    paths = build_paths(ConstructionParams.for_m(2))
    assert paths.gamma[1] == Vec3.of(1, 1, 0)
    assert paths.eta[1] == Vec3.of(0, -1, 1)
    assert paths.eta[2] == Vec3.of(0, "-5/4", "9/8")
    assert paths.gamma[-1] == Vec3.of("33/20", "6/5", 0)
    assert paths.eta[-1] == Vec3.of(0, "-33/20", "6/5")
    assert gamma_is_convex(paths.gamma) and eta_is_convex(paths.eta)


def test_convexity_predicates_detect_a_kink():
    paths = build_paths(ConstructionParams.for_m(2))
    bent = list(paths.gamma)
    bent[2] = bent[2] + Vec3.of(0, 1, 0)
    assert not gamma_is_convex(bent)


@given(st.integers(1, 4))
def test_grid_identities(m):
    params = ConstructionParams.for_m(m)
    grid = build_grid(params)
    for (j, k), w in grid.w.items():
        assert w == grid.w[j, 0] + grid.w[0, k]
    for (j, k), v in grid.v.items():
        a, b = grid.w[j, k], grid.w[j, k + 1]
        assert (v - a).cross(b - a).is_zero()
        assert (v - a).dot(b - v) >= 0
    for k in range(params.gamma_length + 1):
        assert grid.v[0, k] == grid.w[0, k]
    assert grid.v[1, 0] == grid.w[1, 0] * Q(1, 8) + grid.w[1, 1] * Q(7, 8)


def test_eta_hat_zero_is_gamma():
    grid = build_grid(ConstructionParams.for_m(2))
    assert set(grid.eta_hat(0)) == {grid.w[0, k] for k in range(grid.gamma_length + 2)}


# -- the body ---------------------------------------------------------------


@pytest.fixture(scope="module")
def body2():
    return build_body(ConstructionParams.for_m(2))


def test_marked_points_are_extreme(body2):
    m = 2
    for j in range(m + 1):
        for v in body2.grid.eta_hat(j):
            assert is_extreme_point(body2.body, v)
    assert all(body2.body.vertex_index(body2.v(j, k)) is not None for j in range(1, 3) for k in range(1, 3))


def test_back_vertices_and_separator(body2):
    assert body2.body.vertex_index(body2.u0) is not None
    assert body2.body.vertex_index(body2.u1) is not None
    plane = body2.separator
    assert all(plane.side(p) < 0 for p in body2.front.vertices)
    assert all(plane.side(p) > 0 for p in body2.back.vertices)
    assert body2.body.check() == []


def test_gamma_edges_lie_on_the_boundary(body2):
    for k in range(1, 4):
        a, b = body2.edge(k)
        mid = (a + b) * Q(1, 2)
        assert point_in_body(body2.body, (0, 0, 0), mid)
        assert any(f.slack(mid) == 0 for f in body2.body.facets)


def test_claim3_point_on_bottom_edge(body2):
    p = Vec3.of(0, -1, 0)
    tight = [f for f in body2.body.facets if f.slack(p) == 0]
    assert point_in_body(body2.body, (0, 0, 0), p) and len(tight) >= 2


def test_body_is_deterministic(body2):
    again = build_body(ConstructionParams.for_m(2))
    assert again.body.vertices == body2.body.vertices
    assert [f.normal for f in again.body.facets] == [f.normal for f in body2.body.facets]


def test_overlapping_front_and_back_is_a_construction_error():
    with pytest.raises(ConstructionError) as info:
        build_body(ConstructionParams.for_m(1, t="1/10"))
    assert "separate" in info.value.certificate


# -- the family -------------------------------------------------------------


def test_family_offsets(body2):
    fam = build_family(body2, Q(1, 100))
    assert len(fam) == 6
    assert fam.names == ["A1", "A2", "B1", "B2", "C1", "C2"]
    assert fam.by_name("B1").offset == Vec3.of(0, 1, -1)
    assert fam.by_name("A2").offset == Vec3.of(0, 0, "-1/100")
    assert fam.by_name("A1").offset == Vec3.of(0, 0, "-1/200")
    c1 = body2.w(0, 1) + body2.w(0, 2) - body2.u1
    assert fam.by_name("C1").offset == c1


def test_ai_meets_ck_along_the_shifted_edge(case2):
    fam = case2.family
    for i, k in itertools.product((1, 2), repeat=2):
        a, c = fam.by_name(f"A{i}"), fam.by_name(f"C{k}")
        res = bodies_intersect([a, c])
        assert res
        p = Vec3(*res.witness) - a.offset
        e0, e1 = case2.ub.edge(k)
        assert (p - e0).cross(e1 - e0).is_zero() and (p - e0).dot(e1 - p) >= 0


# -- nerve prediction and epsilon -------------------------------------------


def test_prediction_m2():
    pred = predicted_nerve(2)
    sizes = sorted(len(s) for s in pred.maximal)
    assert sizes == [3] * 10 + [4, 4]
    assert names("A1", "A2", "B1", "B2") in pred.maximal
    assert names("B1", "B2", "C1", "C2") in pred.maximal
    assert names("A2", "C1", "C2") in pred.maximal
    assert pred.count(3) == 18
    assert pred.count(4) == 2


def test_prediction_m1():
    assert predicted_nerve(1).maximal == (names("A1", "B1", "C1"),)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 6])
def test_predicted_triangles_match_closed_form(m):
    assert predicted_nerve(m).count(3) == expected_two_simplices(m)


def test_epsilon_m1(case1):
    assert case1.eps < case1.budget.eps1
    assert verify_nerve_matches(case1.complex, predicted_nerve(1))


def test_epsilon_m2(case2):
    assert case2.eps < case2.budget.eps1
    assert case2.budget.certificate
    assert case2.budget.attempts[-1] == (case2.eps, True)
    assert all(not ok for _, ok in case2.budget.attempts[:-1])


def test_large_epsilon_is_rejected(case2):
    fam = build_family(case2.ub, Q(1))
    check = verify_nerve_matches(nerve_skeleton(fam, 3), predicted_nerve(2))
    assert not check
    assert any(sum(1 for n in s if n.startswith("B")) >= 2 and any(n.startswith("A") for n in s) for s in check.unexpected)


# -- witnesses --------------------------------------------------------------


def test_witnesses_m2(case2):
    rep = verify_witnesses(case2.ub, case2.family)
    assert rep.passed
    assert [c.checked for c in rep.claims] == [2, 8, 1, 1]


def test_witness_perturbation_fails(case2):
    rep = verify_witnesses(case2.ub, case2.family, shift=Vec3.of(0, 0, 1))
    claim1 = rep.claims[0]
    assert not claim1.passed
    assert {f["translate"] for f in claim1.failures} >= {"C1", "C2"}


# -- warm-up ----------------------------------------------------------------


def test_warmup_family_shape():
    fam, layout = build_warmup_family(2)
    assert len(fam) == 5
    assert layout.ell > 0
    assert layout.apex_x == (Q(1, 4), Q(3, 4))
    assert layout.a_depths == (-layout.ell / 4, -3 * layout.ell / 4)


def test_warmup_needs_two():
    with pytest.raises(ValueError):
        build_warmup_family(1)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_warmup_notch_geometry(m):
    fam, layout = build_warmup_family(m)
    for j in range(1, m):
        b1, b2 = fam.by_name(f"B{j}"), fam.by_name(f"B{j + 1}")
        mid = Vec3((layout.apex_x[j - 1] + layout.apex_x[j]) / 2, Q(0), -layout.ell)
        assert b1.contains(mid) and b2.contains(mid)
        # just above the notch bottom the point is in neither cone
        above = Vec3(mid.x, Q(0), -layout.ell * Q(99, 100))
        assert not b1.contains(above) and not b2.contains(above)
    c = fam.by_name("C1")
    for i in range(1, m + 1):
        a = fam.by_name(f"A{i}")
        assert bodies_intersect([a, c])

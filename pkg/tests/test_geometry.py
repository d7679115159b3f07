import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conehall.geometry import (
    ConeComplex,
    HalfSpace,
    Polyhedron,
    Ray,
    SemilinearSet,
    box_polyhedron,
    canonicalize,
    cone_from_rays,
    distance_linf,
    from_halfspaces,
    fuzzy_isomorphic,
    fuzzy_leq,
    is_bounded,
    join,
    meet,
    point_polyhedron,
    sector_cover,
    thicken,
    thicken_polyhedron,
    transversality_constant,
    voronoi_regions,
    whole_space,
)

F = Fraction


def halfplane(nx, ny, b=0):
    return from_halfspaces([[nx, ny]], [b], 2)


def ray_x():
    # {y = 0, x >= 0}
    return from_halfspaces([[0, 1], [0, -1], [-1, 0]], [0, 0, 0], 2)


def ray_y():
    return from_halfspaces([[1, 0], [-1, 0], [0, -1]], [0, 0, 0], 2)


# -- thicken ----------------------------------------------------------------


def test_thicken_halfline():
    s = from_halfspaces([[-1]], [0], 1)  # x >= 0
    t = thicken(s, 1)
    assert t.contains([-1]) and not t.contains([F(-11, 10)])


def test_thicken_quadrant():
    s = from_halfspaces([[-1, 0], [0, -1]], [0, 0], 2)
    t = thicken(s, 2)
    assert t.contains([-2, -2]) and not t.contains([F(-21, 10), 0])
    assert t.contains([-2, 5])


def test_thicken_diagonal_ray_membership_oracle():
    # oracle: x in P^r iff d(x, P) <= r, exact LP distance
    diag = from_halfspaces([[1, -1], [-1, 1], [-1, 0]], [0, 0, 0], 2)
    r = F(1)
    t = thicken(diag, r)
    pts = [
        (x, y)
        for x in range(-3, 5)
        for y in range(-3, 5)
    ]
    pts += [(F(1, 2), F(-3, 2)), (F(-1, 2), F(1, 2)), (F(7, 2), F(5, 2))]
    for p in pts:
        want = distance_linf(p, diag) <= r
        assert t.contains(p) == want, p


def test_thicken_iterated_subset():
    # (U^r)^s subseteq U^{r+s}
    u = from_halfspaces([[1, 2], [-1, 0]], [1, 0], 2)
    a = thicken(thicken(u, 1), 2)
    b = thicken(u, 3)
    ok, _ = fuzzy_leq(a, b)
    assert ok
    # pointwise: every grid point of a lies in b
    for x in range(-4, 5):
        for y in range(-4, 5):
            if a.contains([x, y]):
                assert b.contains([x, y])


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_thicken_monotone_random(data):
    # U subseteq V implies U^r subseteq V^r, via piecewise grid containment
    n = 2
    rows = [
        [data.draw(st.integers(-2, 2)) for _ in range(n)]
        for _ in range(data.draw(st.integers(1, 3)))
    ]
    rows = [r for r in rows if any(r)] or [[1, 0]]
    offs = [data.draw(st.integers(0, 2)) for _ in rows]
    v = from_halfspaces(rows, offs, n)
    extra = [data.draw(st.integers(-2, 2)) for _ in range(n)]
    if not any(extra):
        extra = [0, 1]
    u_poly = v.pieces[0].intersect(Polyhedron((HalfSpace(tuple(map(F, extra)), F(1)),), n))
    if u_poly.is_empty():
        return
    u = SemilinearSet((u_poly,), n)
    tu, tv = thicken(u, 1), thicken(v, 1)
    for x in range(-3, 4):
        for y in range(-3, 4):
            if tu.contains([x, y]):
                assert tv.contains([x, y])


# -- distance ---------------------------------------------------------------


def test_distance_halfplane():
    s = halfplane(1, 0, 0)  # x <= 0
    assert distance_linf([3, 0], s) == 3


def test_distance_inside_zero():
    s = halfplane(1, 0, 0)
    assert distance_linf([-1, 5], s) == 0


def test_distance_ray_brute_force_oracle():
    s = ray_x()
    p = (F(2), F(3))
    # oracle: dense grid of candidate nearest points on the ray
    best = min(
        max(abs(p[0] - F(t, 4)), abs(p[1])) for t in range(0, 100)
    )
    assert distance_linf(p, s) == best == 3


# -- canonicalize -----------------------------------------------------------


def test_canonicalize_shifted_halfline():
    s = from_halfspaces([[-1]], [-3], 1)  # x >= 3
    sk = canonicalize(s)
    assert not sk.bounded and len(sk.cones) == 1
    k = sk.cones[0]
    assert k.contains([5]) and not k.contains([-1])


def test_canonicalize_brick_is_bounded():
    s = SemilinearSet((box_polyhedron([0, 0], [3, 2]),), 2)
    sk = canonicalize(s)
    assert sk.bounded and sk.cones == ()


def test_canonicalize_full_plane_quadrants():
    s = whole_space(2)
    sk = canonicalize(s)
    assert not sk.bounded
    # union of the skeleton covers the plane: every grid point in some cone
    for x in range(-3, 4):
        for y in range(-3, 4):
            assert any(k.contains([x, y]) for k in sk.cones)
    # and each cone is line-free
    for k in sk.cones:
        pts_in = [p for p in itertools.product(range(-2, 3), repeat=2)
                  if k.contains(p) and any(p)]
        for p in pts_in:
            assert not k.contains([-p[0], -p[1]])


def test_canonicalize_idempotent_up_to_iso():
    s = from_halfspaces([[1, 1], [-1, 2]], [3, 1], 2)
    sk = canonicalize(s).as_semilinear()
    assert fuzzy_isomorphic(s, sk)


# -- fuzzy order ------------------------------------------------------------


def test_bounded_is_smallest():
    u = SemilinearSet((box_polyhedron([5, 5], [7, 9]),), 2)
    for v in [ray_x(), halfplane(1, 0), whole_space(2)]:
        ok, r = fuzzy_leq(u, v)
        assert ok and r >= 0


def test_ray_in_halfplane_r0():
    ok, r = fuzzy_leq(ray_x(), from_halfspaces([[-1, 0]], [0], 2))
    assert ok and r == 0


def test_ray_not_in_ray():
    ok, w = fuzzy_leq(ray_x(), ray_y())
    assert not ok
    assert isinstance(w, Ray)
    # the witness direction escapes: d(t w, V) grows linearly
    d1 = distance_linf([10 * w.direction[0], 10 * w.direction[1]], ray_y())
    d2 = distance_linf([100 * w.direction[0], 100 * w.direction[1]], ray_y())
    assert d2 >= 9 * d1 > 0


def test_fuzzy_reflexive_transitive_on_cones():
    cones = sector_cover(3)
    for c in cones:
        assert fuzzy_leq(c, c)[0]
    u, v = cones[0], join(cones[0], cones[1])
    w = join(v, cones[2])
    assert fuzzy_leq(u, v)[0] and fuzzy_leq(v, w)[0] and fuzzy_leq(u, w)[0]


def test_translate_is_isomorphic():
    s = halfplane(1, 1, 0)
    t = halfplane(1, 1, 7)
    assert fuzzy_isomorphic(s, t)


# -- meet / join ------------------------------------------------------------


def test_meet_self():
    u = halfplane(1, 0)
    m = meet(u, u)
    assert fuzzy_isomorphic(m, u)


def test_meet_halfplanes_quadrant():
    u, v = halfplane(-1, 0), halfplane(0, -1)  # x >= 0 and y >= 0
    m = meet(u, v)
    assert m.contains([1, 1]) and not m.contains([-1, 1]) and not m.contains([1, -1])


def test_meet_rays_origin():
    m = meet(ray_x(), ray_y())
    assert is_bounded(m)


def test_join_and_universal_props():
    u, v = ray_x(), ray_y()
    j = join(u, v)
    assert fuzzy_leq(u, j)[0] and fuzzy_leq(v, j)[0]
    m = meet(u, v)
    assert fuzzy_leq(m, u)[0] and fuzzy_leq(m, v)[0]


def test_meet_universal_property_sampled():
    cones = sector_cover(3)
    u, v = cones[0], cones[1]
    m = meet(u, v)
    # any W below both is below the meet; try bounded W and the shared ray
    w = SemilinearSet((point_polyhedron([0, 0]),), 2)
    assert fuzzy_leq(w, m)[0]
    shared = meet(u, v)
    assert fuzzy_leq(shared, m)[0]


def test_distributivity_sampled():
    cones = sector_cover(3)
    u, v, w = cones[0], cones[1], cones[2]
    lhs = meet(u, join(v, w))
    rhs = join(meet(u, v), meet(u, w))
    assert fuzzy_leq(lhs, rhs)[0]


# -- transversality and Voronoi ----------------------------------------------


def test_transversality_self_is_one():
    u = halfplane(1, 0)
    w = transversality_constant(u, u, radius=3)
    assert w.sample_bound == 1 and w.constant == 1


def test_transversality_crossing_halfplanes():
    u, v = halfplane(-1, 0), halfplane(0, -1)
    w = transversality_constant(u, v, radius=3)
    assert w.sample_bound <= 1


def test_transversality_shallow_angle_grows():
    wide = transversality_constant(
        ray_x(), from_halfspaces([[1, -1], [-1, 1], [-1, 0]], [0, 0, 0], 2), radius=4
    )
    shallow = transversality_constant(
        ray_x(), from_halfspaces([[1, -5], [-1, 5], [-1, 0]], [0, 0, 0], 2), radius=4
    )
    assert shallow.sample_bound > wide.sample_bound


def test_voronoi_membership():
    u, v = ray_x(), ray_y()
    vr = voronoi_regions(u, v)
    assert vr.in_u_prime([3, 1]) and not vr.in_u_prime([1, 3])
    assert vr.in_v_prime([1, 3])
    # equidistant points belong to both
    assert vr.in_u_prime([2, 2]) and vr.in_v_prime([2, 2])


def test_voronoi_constant4_bound_on_grid():
    u, v = ray_x(), halfplane(0, -1, -2)  # y >= 2
    vr = voronoi_regions(u, v)
    # sample U' on a half-integer grid to approximate d(x, U') from above
    grid = [
        (F(a, 2), F(b, 2)) for a in range(-12, 13) for b in range(-12, 13)
    ]
    uprime = [p for p in grid if vr.in_u_prime(p)]
    for x in [(0, 0), (3, 1), (-2, 4), (1, -3), (4, 4)]:
        du = u.distance(x)
        d_up = min(max(abs(x[0] - p[0]), abs(x[1] - p[1])) for p in uprime)
        bound = 4 * max(d_up, vr.d_union(x))
        assert du <= bound


# -- serialization ------------------------------------------------------------


def test_json_roundtrip():
    s = from_halfspaces([[1, -2], [0, 1]], [F(3), F(1, 2)], 2)
    s2 = SemilinearSet.loads(s.dumps())
    assert s2 == s


def test_json_matches_documented_shape():
    s = from_halfspaces([[1, -2]], [3], 2)
    d = s.to_json()
    assert d["dim"] == 2
    assert d["pieces"][0]["halfspaces"][0] == {"normal": ["1", "-2"], "offset": "3"}


# -- validation ----------------------------------------------------------------


def test_zero_normal_rejected():
    with pytest.raises(ValueError):
        HalfSpace((F(0), F(0)), F(1))


def test_empty_semilinear_rejected():
    with pytest.raises(ValueError):
        from_halfspaces([[1], [-1]], [-1, -1], 1)  # x <= -1 and x >= 1


def test_cone_complex_invariants():
    with pytest.raises(ValueError):
        ConeComplex((box_polyhedron([0], [1]),), 1)

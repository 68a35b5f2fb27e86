import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from preview_regret.polytope import (
    Box,
    EmptyPolytopeError,
    HPolytope,
    NormalFormError,
    UnboundedError,
    affine_preimage,
    bounding_box,
    cartesian_product,
    containment_ratio,
    containment_ratio_projected,
    contains,
    erode_rows,
    hausdorff_nested,
    intersect,
    interval,
    max_inscribed_ball_at,
    project,
    remove_redundancy,
    radius_from_origin,
    scale,
    set_equal,
    support,
    translate,
    unit_box,
    vertices,
)


def diamond2d():
    H = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    return HPolytope(H, np.ones(4))


def random_polytope(rng, n, k=8, radius=3.0):
    """Bounded polytope with the origin strictly inside."""
    dirs = rng.normal(size=(k, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    h = rng.uniform(0.5, radius, size=k)
    box = unit_box(n)
    return HPolytope(np.vstack([dirs, box.H]), np.r_[h, box.h * radius])


def test_interval_intersection():
    P = intersect(interval(-1, 1), interval(0, 2))
    assert support(P, [1.0]) == pytest.approx(1.0, abs=1e-12)
    assert -support(P, [-1.0]) == pytest.approx(0.0, abs=1e-12)


def test_intersection_idempotent():
    P = diamond2d()
    assert set_equal(intersect(P, P), P, tol=1e-9)


def test_disjoint_intersection_empty():
    assert intersect(interval(-1, 0), interval(1, 2)).is_empty()


def test_scale_examples():
    P = scale(interval(-2, 2), 0.5)
    assert support(P, [1.0]) == pytest.approx(1.0)
    Q = diamond2d()
    assert set_equal(scale(Q, 1.0), Q, tol=1e-12)
    Z = scale(unit_box(2), 0.0)
    assert Z.contains_point([0.0, 0.0])
    assert support(Z, [1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)


def test_scale_rejects_negative():
    with pytest.raises(ValueError):
        scale(unit_box(1), -0.5)


def test_cartesian_product_square():
    P = cartesian_product(interval(-1, 1), interval(-1, 1))
    assert set_equal(P, unit_box(2), tol=1e-12)


def test_product_projection_roundtrip():
    P = diamond2d()
    Q = interval(-0.5, 2.0)
    PQ = cartesian_product(P, Q)
    assert PQ.dim == 3
    back = project(PQ, 2, bounded_hint=True)
    assert set_equal(back, P, tol=1e-9)


def test_affine_preimage_examples():
    P = affine_preimage(interval(-1, 1), np.array([[2.0]]))
    assert support(P, [1.0]) == pytest.approx(0.5)
    sq = unit_box(2)
    t = np.array([0.25, -0.5])
    moved = affine_preimage(sq, np.eye(2), t)
    assert set_equal(moved, translate(sq, -t), tol=1e-12)


def test_affine_preimage_strip():
    # unit square pulled back through the row map [1 1]
    sq = unit_box(2)
    first_row = affine_preimage(interval(-1, 1), np.array([[1.0, 1.0]]))
    assert support(first_row, [1.0, 1.0]) == pytest.approx(1.0)
    with pytest.raises(UnboundedError):
        support(first_row, [1.0, -1.0])
    del sq


def test_support_examples():
    assert support(unit_box(2), [1.0, 1.0]) == pytest.approx(2.0)
    assert support(unit_box(2), [0.0, 0.0]) == 0.0
    assert support(diamond2d(), [1.0, 0.0]) == pytest.approx(1.0)


def test_erode_examples():
    P = HPolytope([[1.0]], [1.0])
    D = interval(-0.5, 0.5)
    E = np.array([[1.0]])
    out = erode_rows(P, E, D)
    assert out.h[0] == pytest.approx(0.5)

    Q = interval(-1, 1)
    zero = HPolytope([[1.0], [-1.0]], [0.0, 0.0])
    assert set_equal(erode_rows(Q, E, zero), Q, tol=1e-12)

    wide = interval(-2, 2)
    assert erode_rows(Q, E, wide).is_empty()


def test_project_simplex_to_segment():
    P = HPolytope([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]], [1.0, 0.0, 0.0])
    out = project(P, 1, bounded_hint=True)
    assert support(out, [1.0]) == pytest.approx(1.0)
    assert -support(out, [-1.0]) == pytest.approx(0.0)


def test_project_rotated_square_matches_vertex_oracle():
    theta = np.pi / 4
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    sq = unit_box(2)
    rot = affine_preimage(sq, R.T)  # rotate the square by theta
    proj = project(rot, 1, bounded_hint=True)
    vs = vertices(rot)
    lo, hi = vs[:, 0].min(), vs[:, 0].max()
    assert -support(proj, [-1.0]) == pytest.approx(lo, abs=1e-9)
    assert support(proj, [1.0]) == pytest.approx(hi, abs=1e-9)


def test_remove_redundancy_examples():
    P = HPolytope([[1.0], [1.0]], [1.0, 2.0])
    out = remove_redundancy(P)
    assert out.num_rows == 1 and out.h[0] == pytest.approx(1.0)

    Q = remove_redundancy(diamond2d())
    assert Q.num_rows == 4

    rng = np.random.default_rng(3)
    cuts = rng.normal(size=(10, 2))
    cuts /= np.linalg.norm(cuts, axis=1, keepdims=True)
    offs = np.abs(cuts).sum(axis=1) * (1.0 + rng.uniform(0.1, 2.0, size=10))
    sq = unit_box(2)
    fat = HPolytope(np.vstack([sq.H, cuts]), np.r_[sq.h, offs])
    red = remove_redundancy(fat, bounded_hint=True)
    assert red.num_rows == 4
    assert set_equal(red, sq, tol=1e-9)


def test_containment_ratio_examples():
    b = unit_box(2)
    assert containment_ratio(b, b) == pytest.approx(1.0, abs=1e-7)
    big = scale(unit_box(2), 2.0)
    assert containment_ratio(big, b) == pytest.approx(2.0, abs=1e-7)
    assert containment_ratio(diamond2d(), b) == pytest.approx(1.0, abs=1e-7)


def test_containment_ratio_requires_normal_form():
    shifted = translate(unit_box(2), [5.0, 0.0])  # origin outside
    with pytest.raises(NormalFormError):
        containment_ratio(unit_box(2), shifted)


def test_containment_ratio_projected_product_lift():
    P = diamond2d()
    D = interval(-0.3, 0.3)
    lifted = cartesian_product(P, D)
    r = containment_ratio_projected(P, lifted)
    assert r == pytest.approx(1.0, abs=1e-7)


def test_containment_ratio_projected_1d_preview_set():
    # lifted set {|d| <= 0.5, |x + d/2| <= 0.75} projects to [-1, 1]
    H = np.array([[0.0, 1.0], [0.0, -1.0], [1.0, 0.5], [-1.0, -0.5]])
    h = np.array([0.5, 0.5, 0.75, 0.75])
    lifted = HPolytope(H, h)
    cmax_co = interval(-1.5, 1.5)
    r = containment_ratio_projected(cmax_co, lifted)
    lam0 = 1.0 / r
    assert lam0 <= 2.0 / 3.0 + 1e-7
    assert lam0 == pytest.approx(2.0 / 3.0, abs=1e-6)


def test_containment_ratio_projected_conservative():
    rng = np.random.default_rng(11)
    for _ in range(5):
        P2 = random_polytope(rng, 3, k=6)
        P1 = random_polytope(rng, 2, k=5)
        proj = project(P2, 2, bounded_hint=True)
        r_enc = containment_ratio_projected(P1, P2)
        r_exact = containment_ratio(P1, proj)
        assert r_enc >= r_exact - 1e-7


def test_containment_ratio_projected_strictly_larger_inner():
    lifted = cartesian_product(interval(-1, 1), interval(-1, 1))
    wide = interval(-2, 2)
    r = containment_ratio_projected(wide, lifted)
    assert r >= 2.0 - 1e-7


def test_max_inscribed_ball():
    assert max_inscribed_ball_at(unit_box(2), [0.0, 0.0]) == pytest.approx(1.0)
    assert max_inscribed_ball_at(unit_box(2), [0.5, 0.0]) == pytest.approx(0.5)
    assert max_inscribed_ball_at(diamond2d(), [0.0, 0.0]) == pytest.approx(0.5)
    assert max_inscribed_ball_at(unit_box(2), [3.0, 0.0]) == 0.0


def test_vertices_examples():
    V = vertices(unit_box(2))
    assert V.shape == (4, 2)
    got = {tuple(np.round(v, 9)) for v in V}
    assert got == {(1, 1), (1, -1), (-1, 1), (-1, -1)}

    V1 = vertices(interval(-2.0, 3.5))
    assert sorted(v[0] for v in V1) == [-2.0, 3.5]

    rng = np.random.default_rng(5)
    P = remove_redundancy(random_polytope(rng, 2), bounded_hint=True)
    V = vertices(P)
    assert V.shape[0] == P.num_rows  # 2D facet/vertex duality


def test_vertices_degenerate_point():
    pt = HPolytope(np.vstack([np.eye(2), -np.eye(2)]), np.zeros(4))
    V = vertices(pt)
    assert V.shape == (1, 2)
    assert np.allclose(V[0], 0.0)


def test_bounding_box():
    bb = bounding_box(diamond2d())
    assert np.allclose(bb.lower, [-1, -1]) and np.allclose(bb.upper, [1, 1])
    pt = HPolytope(np.vstack([np.eye(2), -np.eye(2)]), np.zeros(4))
    bbp = bounding_box(pt)
    assert np.allclose(bbp.lower, 0) and np.allclose(bbp.upper, 0)


def test_radius_modes():
    assert radius_from_origin(unit_box(2), "exact") == pytest.approx(np.sqrt(2))
    assert radius_from_origin(interval(-1.5, 1.5), "exact") == pytest.approx(1.5)
    rng = np.random.default_rng(9)
    for _ in range(4):
        P = random_polytope(rng, 2)
        assert radius_from_origin(P, "box") >= radius_from_origin(P, "exact") - 1e-9


def test_hausdorff_examples():
    X = unit_box(2)
    assert hausdorff_nested(X, X) == pytest.approx(0.0, abs=1e-9)
    assert hausdorff_nested(interval(-1, 1), interval(-1.5, 1.5)) == pytest.approx(0.5)
    Y = scale(unit_box(2), 1.5)
    assert hausdorff_nested(X, Y) == pytest.approx(np.sqrt(0.5), abs=1e-9)


def test_hausdorff_requires_nesting():
    with pytest.raises(ValueError):
        hausdorff_nested(interval(-2, 2), interval(-1, 1))


def test_empty_propagation():
    E = HPolytope.empty(2)
    assert E.is_empty()
    assert intersect(E, unit_box(2)).is_empty()
    assert remove_redundancy(E).is_empty()
    assert project(E, 1).is_empty()


# ---------------------------------------------------------------------------
# property tests


dims = st.integers(min_value=1, max_value=3)


@st.composite
def polytopes(draw):
    n = draw(dims)
    seed = draw(st.integers(min_value=0, max_value=10_000))
    rng = np.random.default_rng(seed)
    k = draw(st.integers(min_value=n + 1, max_value=8))
    dirs = rng.normal(size=(k, n))
    norms = np.linalg.norm(dirs, axis=1)
    dirs = dirs[norms > 1e-3]
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    h = rng.uniform(0.2, 2.0, size=dirs.shape[0])
    box = unit_box(n)
    return HPolytope(np.vstack([dirs, box.H]), np.r_[h, 3.0 * box.h])


@settings(max_examples=25, deadline=None)
@given(polytopes())
def test_containment_ratio_roundtrip(P):
    assert containment_ratio(P, P) == pytest.approx(1.0, abs=1e-7)


@settings(max_examples=25, deadline=None)
@given(polytopes(), st.floats(min_value=0.0, max_value=1.0))
def test_scale_shrinks_origin_interior(P, lam):
    assert contains(P, scale(P, lam), tol=1e-9)


@settings(max_examples=20, deadline=None)
@given(polytopes())
def test_project_product_roundtrip(P):
    Q = interval(-0.7, 0.4)
    back = project(cartesian_product(P, Q), P.dim, bounded_hint=True)
    assert set_equal(back, P, tol=1e-7)


@settings(max_examples=20, deadline=None)
@given(polytopes())
def test_erode_zero_disturbance_identity(P):
    zero = HPolytope(np.vstack([np.eye(1), -np.eye(1)]), np.zeros(2))
    E = np.ones((P.dim, 1))
    assert set_equal(erode_rows(P, E, zero), P, tol=1e-12)


@settings(max_examples=15, deadline=None)
@given(polytopes())
def test_remove_redundancy_preserves_set(P):
    R = remove_redundancy(P, bounded_hint=True)
    assert set_equal(R, P, tol=1e-8)
    R2 = remove_redundancy(P)  # LP path
    assert set_equal(R2, P, tol=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=5000))
def test_hausdorff_triangle_inequality(seed):
    rng = np.random.default_rng(seed)
    base = random_polytope(rng, 2)
    A = remove_redundancy(base, bounded_hint=True)
    B = remove_redundancy(HPolytope(A.H, A.h * rng.uniform(1.2, 1.8)),
                          bounded_hint=True)
    C = remove_redundancy(HPolytope(A.H, B.h * rng.uniform(1.2, 1.8)),
                          bounded_hint=True)
    dab = hausdorff_nested(A, B)
    dbc = hausdorff_nested(B, C)
    dac = hausdorff_nested(A, C)
    assert dac <= dab + dbc + 1e-8


def test_hpolytope_validation():
    with pytest.raises(ValueError):
        HPolytope(np.zeros((0, 2)), np.zeros(0))  # needs at least one row
    with pytest.raises(ValueError):
        HPolytope([[1.0, np.nan]], [1.0])
    with pytest.raises(ValueError):
        HPolytope([[1.0, 0.0]], [1.0, 2.0])  # shape mismatch
    with pytest.raises(ValueError):
        intersect(unit_box(2), unit_box(3))

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from preview_regret.polytope import HPolytope, interval, unit_box
from preview_regret.solver import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    NotPositiveDefiniteError,
    NotStabilizableError,
    cholesky,
    dare_residual,
    is_controllable,
    is_stabilizable,
    project_point,
    solve_dare,
    solve_lp,
    solve_lp_fast,
    solve_qp,
    spectral_radius,
)


def test_lp_single_active_constraint():
    sol = solve_lp(LpProblem(cost=[1.0], A_ub=[[-1.0]], b_ub=[-1.0]))
    assert sol.status == OPTIMAL
    assert sol.point[0] == pytest.approx(1.0, abs=1e-9)
    assert sol.objective == pytest.approx(1.0, abs=1e-9)


def test_lp_contradictory_bounds_infeasible():
    sol = solve_lp(LpProblem(cost=[1.0], A_ub=[[1.0], [-1.0]], b_ub=[-1.0, -1.0]))
    assert sol.status == INFEASIBLE
    assert sol.point is None


def test_lp_box_vertex():
    # oracle: enumerate the box corners
    corners = [np.array([x, y]) for x in (0.0, 1.0) for y in (0.0, 1.0)]
    best = min(-(c[0] + c[1]) for c in corners)
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.array([1.0, 1.0, 0.0, 0.0])
    sol = solve_lp(LpProblem(cost=[-1.0, -1.0], A_ub=A, b_ub=b))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(best, abs=1e-9)
    assert np.allclose(sol.point, [1.0, 1.0], atol=1e-9)


def test_lp_unbounded():
    sol = solve_lp(LpProblem(cost=[-1.0], A_ub=[[-1.0]], b_ub=[0.0]))
    assert sol.status == UNBOUNDED


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_lp_feasibility_invariant(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    m = int(rng.integers(1, 25))
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m) + 1.5
    c = rng.normal(size=n)
    meq = int(rng.integers(0, 2)) if n > 1 else 0
    Aeq = rng.normal(size=(meq, n)) if meq else None
    beq = rng.normal(size=meq) * 0.1 if meq else None
    sol = solve_lp_fast(c, A, b, Aeq, beq)
    if sol.status == OPTIMAL:
        assert np.all(A @ sol.point <= b + 1e-8)
        if meq:
            assert np.max(np.abs(Aeq @ sol.point - beq)) <= 1e-8


def test_project_point_interval():
    closest, dist = project_point([0.0], interval(1.0, 2.0))
    assert closest[0] == pytest.approx(1.0, abs=1e-10)
    assert dist == pytest.approx(1.0, abs=1e-10)


def test_project_point_inside():
    closest, dist = project_point([0.3, -0.2], unit_box(2))
    assert dist == 0.0
    assert np.allclose(closest, [0.3, -0.2])


def test_project_point_corner():
    closest, dist = project_point([1.5, 1.5], unit_box(2))
    assert np.allclose(closest, [1.0, 1.0], atol=1e-9)
    assert dist == pytest.approx(np.sqrt(0.5), abs=1e-9)


def test_project_point_empty():
    from preview_regret.polytope import EmptyPolytopeError

    with pytest.raises(EmptyPolytopeError):
        project_point([0.0], HPolytope([[1.0], [-1.0]], [-1.0, -1.0]))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_project_point_box_clamp_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 5))
    lo = rng.normal(size=n)
    hi = lo + np.abs(rng.normal(size=n)) + 0.1
    pt = rng.normal(size=n) * 3.0
    H = np.vstack([np.eye(n), -np.eye(n)])
    h = np.r_[hi, -lo]
    closest, dist = project_point(pt, HPolytope(H, h))
    expect = np.clip(pt, lo, hi)
    assert np.allclose(closest, expect, atol=1e-8)
    assert dist == pytest.approx(np.linalg.norm(pt - expect), abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_project_point_supporting_hyperplane(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    dirs = rng.normal(size=(8, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    P = HPolytope(dirs, rng.uniform(0.3, 1.5, size=8))
    pt = rng.normal(size=n) * 4.0
    closest, dist = project_point(pt, P)
    # optimality certificate: (pt - closest) . (y - closest) <= tol for y in P
    for _ in range(20):
        y = rng.normal(size=n)
        lam = 1.0
        while not P.contains_point(y * lam) and lam > 1e-6:
            lam *= 0.5
        y = y * lam
        assert (pt - closest) @ (y - closest) <= 1e-7 * (1.0 + dist)


def test_qp_equality_constrained():
    # min (x-1)^2 + (y-2)^2 s.t. x + y = 1  ->  x* = 0, y* = 1
    x, status = solve_qp(2 * np.eye(2), np.array([-2.0, -4.0]),
                         A_eq=[[1.0, 1.0]], b_eq=[1.0])
    assert status == OPTIMAL
    assert np.allclose(x, [0.0, 1.0], atol=1e-9)


def test_dare_zero_dynamics():
    P = solve_dare(np.zeros((1, 1)), np.ones((1, 1)), np.eye(1), np.eye(1))
    assert P[0, 0] == pytest.approx(1.0, abs=1e-10)


def test_dare_scalar_fixed_point_oracle():
    # oracle: iterate the scalar Riccati recursion directly
    a, b, q, r = 0.5, 1.0, 1.0, 1.0
    p = q
    for _ in range(300):
        p = a * p * a - (a * p * b) ** 2 / (r + b * p * b) + q
    P = solve_dare([[a]], [[b]], [[q]], [[r]])
    assert P[0, 0] == pytest.approx(p, abs=1e-9)
    assert P[0, 0] == pytest.approx(1.1328, abs=1e-4)
    assert dare_residual(np.array([[a]]), np.array([[b]]), np.eye(1), np.eye(1), P) < 1e-10


def test_dare_zero_input_is_lyapunov():
    A = np.array([[0.5, 0.1], [0.0, 0.3]])
    B = np.zeros((2, 1))
    Q = np.eye(2)
    P = solve_dare(A, B, Q, np.eye(1))
    assert np.allclose(A.T @ P @ A - P, -Q, atol=1e-8)


def test_dare_rejects_nonstabilizable():
    with pytest.raises(NotStabilizableError):
        solve_dare([[2.0]], [[0.0]], [[1.0]], [[1.0]])


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(2)) == pytest.approx(1.0)
    assert spectral_radius([[1.5, 1.0], [0.0, 1.1]]) == pytest.approx(1.5)
    assert spectral_radius([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(0.0)


def test_cholesky_examples():
    assert np.allclose(cholesky(np.eye(3)), np.eye(3))
    assert np.allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    L = cholesky([[2.0, 1.0], [1.0, 2.0]])
    assert L[0, 0] == pytest.approx(np.sqrt(2))
    assert L[1, 0] == pytest.approx(1 / np.sqrt(2))
    assert L[1, 1] == pytest.approx(np.sqrt(1.5))


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky([[1.0, 2.0], [2.0, 1.0]])


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_cholesky_reconstruction(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 6))
    M = rng.normal(size=(n, n))
    Q = M @ M.T + 0.1 * np.eye(n)
    L = cholesky(Q)
    assert np.max(np.abs(L @ L.T - Q)) <= 1e-10 * np.max(np.abs(Q))
    assert np.allclose(L, np.tril(L))


def test_controllability_helpers():
    assert is_controllable([[1.5, 1.0], [0.0, 1.1]], [[0.0, 1.0], [1.0, 1.0]])
    assert not is_controllable([[2.0, 0.0], [0.0, 2.0]], [[1.0], [0.0]])
    assert is_stabilizable([[0.5, 0.0], [0.0, 2.0]], [[0.0], [1.0]])
    assert not is_stabilizable([[0.5, 0.0], [0.0, 2.0]], [[1.0], [0.0]])


def test_lp_problem_validation():
    with pytest.raises(ValueError):
        LpProblem(cost=[1.0, 2.0], A_ub=[[1.0]], b_ub=[1.0])  # width mismatch
    with pytest.raises(ValueError):
        LpProblem(cost=[1.0], A_ub=[[1.0]], b_ub=[1.0, 2.0])  # length mismatch
    with pytest.raises(ValueError):
        LpProblem(cost=[np.inf], A_ub=[[1.0]], b_ub=[1.0])
    with pytest.raises(ValueError):
        LpProblem(cost=[1.0], A_ub=[[1.0]])  # rhs missing

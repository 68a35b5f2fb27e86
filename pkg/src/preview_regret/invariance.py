"""Backward reachable sets, maximal (robust) controlled invariant sets,
contractiveness checks and the preview sandwich bounds.
"""

import numpy as np

from .polytope import (
    HPolytope,
    bounding_box,
    cartesian_product,
    contains,
    erode_rows,
    intersect,
    power_product,
    project,
    remove_redundancy,
    scale,
    support,
    TAU_SET,
)
from .systems import DeterministicSystem, LinearSystem


def _safe_set_of(sys) -> HPolytope:
    return sys.S_xu if isinstance(sys, LinearSystem) else sys.S


def _as_box_arrays(box):
    if box is None:
        return None
    return np.asarray(box.lower, dtype=float), np.asarray(box.upper, dtype=float)


def pre(sys, X: HPolytope, S: HPolytope | None = None, box=None) -> HPolytope:
    """One-step backward reachable set of X constrained to the safe set.

    {x : exists u with (x,u) in S and A x + B u + E d in X for all d in D};
    the disturbance erosion is skipped for deterministic systems. `box` is
    an optional bounding box of S reused as a redundancy prefilter.
    """
    if S is None:
        S = _safe_set_of(sys)
    n = sys.n
    if X.dim != n:
        raise ValueError("target set must live in the state space")
    if X.is_empty():
        return HPolytope.empty(n)
    if isinstance(sys, LinearSystem):
        X = erode_rows(X, sys.E, sys.D)
        AB = np.hstack([sys.A, sys.B])
    else:
        AB = np.hstack([sys.A, sys.B])
    rows = np.vstack([X.H @ AB, S.H])
    rhs = np.r_[X.h, S.h]
    stacked = HPolytope(rows, rhs)
    return project(stacked, n, bounded_hint=True, box_hint=_as_box_arrays(box))


def pre_k(sys, X: HPolytope, S: HPolytope | None = None, k: int = 1,
          box=None) -> HPolytope:
    """k-fold composition of pre with redundancy removal between steps."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    out = X
    for _ in range(k):
        out = pre(sys, out, S, box=box)
        if out.is_empty():
            return out
    return out


def _row_key(H, norms):
    return [np.round(H[i] / norms[i], 10).tobytes() for i in range(H.shape[0])]


def _subset_within(X_old: HPolytope, X_new: HPolytope, tol) -> bool:
    """X_old ⊆ X_new within tol; row matching first, support LPs as needed."""
    norms_new = np.maximum(np.linalg.norm(X_new.H, axis=1), 1e-300)
    norms_old = np.maximum(np.linalg.norm(X_old.H, axis=1), 1e-300)
    old_best: dict[bytes, float] = {}
    for key, hv in zip(_row_key(X_old.H, norms_old), X_old.h / norms_old):
        if key not in old_best or hv < old_best[key]:
            old_best[key] = hv
    keys_new = _row_key(X_new.H, norms_new)
    for i in range(X_new.num_rows):
        bound = X_new.h[i] / norms_new[i]
        cheap = old_best.get(keys_new[i])
        if cheap is not None and cheap <= bound + tol:
            continue
        if support(X_old, X_new.H[i]) > X_new.h[i] + tol * norms_new[i]:
            return False
    return True


def max_invariant_set(sys, S: HPolytope | None = None, max_iter: int = 200,
                      tol: float = TAU_SET, start: HPolytope | None = None,
                      cancel=None):
    """Maximal (robust) controlled invariant set by the outside-in iteration.

    Returns (C, converged). Every iterate contains the maximal set, so a
    non-converged result is a certified outer approximation. `start` may
    supply any known outer approximation to shorten the run.
    """
    if S is None:
        S = _safe_set_of(sys)
    n = sys.n
    sbox = bounding_box(S)
    X0 = project(HPolytope(S.H, S.h), n, bounded_hint=True,
                 box_hint=_as_box_arrays(sbox))
    if start is not None:
        X0 = remove_redundancy(intersect(X0, start), bounded_hint=True)
    if X0.is_empty():
        return HPolytope.empty(n), True
    xbox = bounding_box(X0)
    xbox_arrays = _as_box_arrays(xbox)
    X = X0
    for _ in range(max_iter):
        if cancel is not None and cancel():
            return X, False
        P = pre(sys, X, S, box=sbox)
        if P.is_empty():
            return HPolytope.empty(n), True
        X_next = remove_redundancy(intersect(P, X0), bounded_hint=True,
                                   box_hint=xbox_arrays)
        if X_next.is_empty():
            return HPolytope.empty(n), True
        if _subset_within(X, X_next, tol):
            return X_next, True
        X = X_next
    return X, False


def is_rcis(sys, C: HPolytope, S: HPolytope | None = None, tol=TAU_SET) -> bool:
    """C is (robust) controlled invariant in S: C ⊆ Pre(C, S)."""
    return contains(pre(sys, C, S), C, tol=tol)


def rcis_violation_witness(sys, C: HPolytope, S: HPolytope | None = None,
                           tol=TAU_SET):
    """None if C is an RCIS, else a point of C that cannot stay in C."""
    P = pre(sys, C, S)
    norms = np.maximum(np.linalg.norm(P.H, axis=1), 1e-300)
    for i in range(P.num_rows):
        from .solver import solve_lp_fast

        sol = solve_lp_fast(-P.H[i], C.H, C.h)
        if sol.optimal and -sol.objective > P.h[i] + tol * norms[i]:
            return sol.point
    return None


def cmax_p_co(sys: LinearSystem, p: int, C_max_co: HPolytope) -> HPolytope:
    """Maximal CIS of the collaborative p-preview system, built from the
    delay form: p backward steps from C_max_co x D^p inside the augmented
    safe set."""
    from .systems import collaborative_augmented

    if p == 0:
        return C_max_co
    co_p = collaborative_augmented(sys, p)
    target = cartesian_product(C_max_co, power_product(sys.D, p))
    box = bounding_box(co_p.S)
    return pre_k(co_p, target, k=p, box=box)


def check_contractive(sys: DeterministicSystem, X: HPolytope,
                      S: HPolytope | None = None, N: int = 1,
                      lam: float = 1.0, tol=TAU_SET) -> bool:
    """X ⊆ Pre^N(lam * X, S): X can be steered into its lam-scaled copy in
    N safe steps."""
    if not (0.0 <= lam <= 1.0):
        raise ValueError("contraction factor must be in [0, 1]")
    if N < 1:
        raise ValueError("N must be positive")
    reach = pre_k(sys, scale(X, lam), S, k=N,
                  box=bounding_box(S if S is not None else sys.S))
    return contains(reach, X, tol=tol)


def sandwich_bounds(sys: LinearSystem, p: int, p_prime: int,
                    C_max_p_prime: HPolytope, C_max_co: HPolytope):
    """Inner and outer product bounds for the maximal RCIS at preview p.

    inner = C_max_{p'} x D^{p-p'} (itself an RCIS of the p-preview system);
    outer = C_max_{p',co} x D^{p-p'}, the tightest product outer bound.
    """
    if p_prime > p:
        raise ValueError("p' must not exceed p")
    tail = p - p_prime
    inner = C_max_p_prime if tail == 0 else cartesian_product(
        C_max_p_prime, power_product(sys.D, tail))
    co = cmax_p_co(sys, p_prime, C_max_co)
    outer = co if tail == 0 else cartesian_product(co, power_product(sys.D, tail))
    return inner, outer

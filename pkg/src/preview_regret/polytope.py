"""Polytope algebra in H-representation {x : Hx <= h}.

Rows are stored unnormalized so that exact (dyadic) arithmetic survives the
Fourier-Motzkin pipeline; tolerances are scaled by row norms where needed.
"""

from dataclasses import dataclass

import numpy as np

from .solver import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    solve_lp_fast,
    project_point as _project_point,
)

TAU_SET = 1e-6
TAU_VERT = 1e-9
ROW_CAP = 10_000
VERTEX_DIM_CAP = 6
_DUAL_HULL_MAX_DIM = 6


class EmptyPolytopeError(ValueError):
    pass


class UnboundedError(ValueError):
    pass


class NormalFormError(ValueError):
    """Raised when an operation needs h > 0 (origin in the interior)."""


class BudgetExceededError(RuntimeError):
    """Row or dimension budget blown; results would be untrustworthy or slow."""


class HPolytope:
    """Convex polytope {x : Hx <= h}; the universal set carrier."""

    __slots__ = ("H", "h", "_empty", "_cheby")

    def __init__(self, H, h):
        H = np.atleast_2d(np.asarray(H, dtype=float))
        h = np.atleast_1d(np.asarray(h, dtype=float))
        if H.ndim != 2 or h.ndim != 1 or H.shape[0] != h.shape[0]:
            raise ValueError("H must be q x n with h of length q")
        if H.shape[0] < 1:
            raise ValueError("need at least one row")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(h))):
            raise ValueError("polytope data must be finite")
        self.H = H
        self.h = h
        self._empty = None
        self._cheby = None

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    @property
    def num_rows(self) -> int:
        return self.H.shape[0]

    @property
    def in_normal_form(self) -> bool:
        """h > 0 componentwise, i.e. the origin is strictly feasible."""
        return bool(np.all(self.h > 0))

    def __repr__(self):
        return f"HPolytope(dim={self.dim}, rows={self.num_rows})"

    @classmethod
    def empty(cls, dim: int) -> "HPolytope":
        P = cls(np.zeros((1, dim)), np.array([-1.0]))
        P._empty = True
        return P

    @classmethod
    def universe(cls, dim: int) -> "HPolytope":
        return cls(np.zeros((1, dim)), np.array([1.0]))

    def is_empty(self) -> bool:
        if self._empty is None:
            norms = np.linalg.norm(self.H, axis=1)
            degenerate = norms <= 1e-14
            if np.any(self.h[degenerate] < -1e-12):
                self._empty = True
            else:
                sol = solve_lp_fast(np.zeros(self.dim), self.H, self.h)
                self._empty = sol.status == INFEASIBLE
        return self._empty

    def contains_point(self, x, tol=1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        norms = np.maximum(np.linalg.norm(self.H, axis=1), 1.0)
        return bool(np.all(self.H @ x - self.h <= tol * norms))

    def chebyshev_center(self):
        """(center, radius) of a largest inscribed ball; radius capped at 1e9."""
        if self._cheby is None:
            n = self.dim
            norms = np.linalg.norm(self.H, axis=1)
            A = np.hstack([self.H, norms[:, None]])
            A = np.vstack([A, np.r_[np.zeros(n), 1.0]])
            b = np.r_[self.h, 1e9]
            c = np.r_[np.zeros(n), -1.0]
            sol = solve_lp_fast(c, A, b)
            if not sol.optimal:
                raise EmptyPolytopeError("no Chebyshev center: polytope is empty")
            self._cheby = (sol.point[:n], float(sol.point[n]))
        return self._cheby


@dataclass
class Box:
    """Axis-aligned box; convertible to an HPolytope with 2n rows."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape:
            raise ValueError("bounds must have equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def to_polytope(self) -> HPolytope:
        n = self.dim
        eye = np.eye(n)
        return HPolytope(np.vstack([eye, -eye]), np.r_[self.upper, -self.lower])

    def corners(self) -> np.ndarray:
        n = self.dim
        out = np.empty((2 ** n, n))
        for i in range(2 ** n):
            bits = [(i >> k) & 1 for k in range(n)]
            out[i] = np.where(bits, self.upper, self.lower)
        return out


def unit_box(n: int) -> HPolytope:
    """The hypercube [-1, 1]^n."""
    return Box(-np.ones(n), np.ones(n)).to_polytope()


def interval(lo: float, hi: float) -> HPolytope:
    return Box(np.array([lo]), np.array([hi])).to_polytope()


# ---------------------------------------------------------------------------
# basic algebra


def intersect(P: HPolytope, Q: HPolytope) -> HPolytope:
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch in intersection")
    return HPolytope(np.vstack([P.H, Q.H]), np.r_[P.h, Q.h])


def scale(P: HPolytope, lam: float) -> HPolytope:
    """lam * P for lam >= 0 (for lam = 0 the input must be bounded)."""
    if lam < 0:
        raise ValueError("scale factor must be nonnegative")
    return HPolytope(P.H.copy(), lam * P.h)


def translate(P: HPolytope, t) -> HPolytope:
    """{x + t : x in P}."""
    t = np.asarray(t, dtype=float)
    return HPolytope(P.H.copy(), P.h + P.H @ t)


def cartesian_product(P: HPolytope, Q: HPolytope) -> HPolytope:
    Hp, Hq = P.H, Q.H
    H = np.block([
        [Hp, np.zeros((Hp.shape[0], Q.dim))],
        [np.zeros((Hq.shape[0], P.dim)), Hq],
    ])
    return HPolytope(H, np.r_[P.h, Q.h])


def power_product(P: HPolytope, k: int) -> HPolytope:
    """P^k, the k-fold Cartesian product (k >= 1)."""
    out = P
    for _ in range(k - 1):
        out = cartesian_product(out, P)
    return out


def affine_preimage(P: HPolytope, M, v=None) -> HPolytope:
    """{z : Mz + v in P} = {z : (HM) z <= h - Hv}."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != P.dim:
        raise ValueError("map range does not match polytope dimension")
    h = P.h.copy()
    if v is not None:
        h = h - P.H @ np.asarray(v, dtype=float)
    return HPolytope(P.H @ M, h)


def support(P: HPolytope, direction) -> float:
    """sup over P of <direction, x>; raises on empty P or unbounded direction."""
    d = np.asarray(direction, dtype=float)
    if not np.any(d):
        if P.is_empty():
            raise EmptyPolytopeError("support of an empty polytope")
        return 0.0
    sol = solve_lp_fast(-d, P.H, P.h)
    if sol.status == UNBOUNDED:
        raise UnboundedError("polytope is unbounded along the requested direction")
    if sol.status == INFEASIBLE:
        raise EmptyPolytopeError("support of an empty polytope")
    return -sol.objective


def erode_rows(P: HPolytope, E, D: HPolytope) -> HPolytope:
    """Rowwise worst-case tightening: h_i - sup_{d in D} (H_i E) d.

    The result may be empty. D must be nonempty and bounded.
    """
    E = np.atleast_2d(np.asarray(E, dtype=float))
    dirs = P.H @ E
    h = P.h.copy()
    seen: dict[bytes, float] = {}
    for i in range(dirs.shape[0]):
        row = dirs[i]
        if not np.any(row):
            continue
        key = row.tobytes()
        val = seen.get(key)
        if val is None:
            val = support(D, row)
            seen[key] = val
        h[i] -= val
    return HPolytope(P.H.copy(), h)


def contains(P: HPolytope, Q: HPolytope, tol=TAU_SET) -> bool:
    """Q ⊆ P, checked by support LPs over Q against every row of P."""
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch in containment check")
    if Q.is_empty():
        return True
    norms = np.maximum(np.linalg.norm(P.H, axis=1), 1e-300)
    for i in range(P.num_rows):
        try:
            s = support(Q, P.H[i])
        except UnboundedError:
            return False
        if s > P.h[i] + tol * max(norms[i], 1.0):
            return False
    return True


def set_equal(P: HPolytope, Q: HPolytope, tol=TAU_SET) -> bool:
    return contains(P, Q, tol) and contains(Q, P, tol)


# ---------------------------------------------------------------------------
# redundancy removal


def _dedupe_rows(H, h):
    """Drop exact-duplicate directions keeping the tightest offset.

    Comparison happens on norm-scaled copies; the returned rows are the
    original (unscaled) ones.
    """
    norms = np.linalg.norm(H, axis=1)
    keep_trivial = []
    work = norms > 1e-14
    if np.any(~work):
        if np.any(h[~work] < -1e-12):
            return None, None  # infeasible zero row
    Hw, hw, nw = H[work], h[work], norms[work]
    if Hw.shape[0] == 0:
        return np.zeros((0, H.shape[1])), np.zeros(0)
    Hn = Hw / nw[:, None]
    hn = hw / nw
    key = np.round(Hn, 12)
    # direction columns are the significant keys; offset breaks ties ascending
    order = np.lexsort((hn, *key.T))
    key_sorted = key[order]
    first = np.r_[True, np.any(np.diff(key_sorted, axis=0) != 0, axis=1)]
    keep = order[first]  # smallest offset within each direction group
    keep.sort()
    return Hw[keep], hw[keep]


def _support_fast(H, h, d):
    sol = solve_lp_fast(-d, H, h)
    if sol.status == OPTIMAL:
        return -sol.objective, sol.point
    if sol.status == UNBOUNDED:
        return np.inf, None
    raise EmptyPolytopeError("support of an empty polytope")


def _reduce_lp(H, h, box=None):
    """Keep irredundant rows, certifying each removal with an LP.

    box, when given, is any (lower, upper) pair whose box contains the set.
    Its 2n axis rows are appended to the system first; with them present,
    any original row implied by the box alone can be dropped without an LP.
    """
    if box is not None:
        lo, hi = np.asarray(box[0], dtype=float), np.asarray(box[1], dtype=float)
        n = H.shape[1]
        norms = np.maximum(np.linalg.norm(H, axis=1), 1e-300)
        sup_box = np.where(H > 0, H * hi, H * lo).sum(axis=1)
        keep0 = ~(sup_box <= h + 1e-12 * norms)
        eye = np.eye(n)
        H = np.vstack([H[keep0], eye, -eye])
        h = np.r_[h[keep0], hi, -lo]
        H, h = _dedupe_rows(H, h)
        if H is None:
            return None, None
    q = H.shape[0]
    alive = np.ones(q, dtype=bool)
    norms = np.maximum(np.linalg.norm(H, axis=1), 1e-300)
    for i in range(q):
        others = np.flatnonzero(alive)
        others = others[others != i]
        rows = np.vstack([H[others], H[i][None, :]])
        rhs = np.r_[h[others], h[i] + 1.0 + abs(h[i])]
        try:
            val, _ = _support_fast(rows, rhs, H[i])
        except EmptyPolytopeError:
            break
        if val <= h[i] + 1e-9 * max(norms[i], 1.0):
            alive[i] = False
    keep = np.flatnonzero(alive)
    if keep.size == 0:
        return H[:1] * 0.0 + 0.0, np.array([1.0])  # whole space marker
    return H[keep], h[keep]


def _reduce_dual_hull(H, h, center):
    """Facet identification through polar duality around an interior point."""
    from scipy.spatial import ConvexHull, QhullError

    d = h - H @ center
    if np.any(d <= 1e-12 * np.maximum(np.linalg.norm(H, axis=1), 1.0)):
        return None
    pts = H / d[:, None]
    if pts.shape[0] <= pts.shape[1] + 1:
        return H, h
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return None
    keep = np.sort(hull.vertices)
    return H[keep], h[keep]


def _reduce_1d(H, h):
    a = H[:, 0]
    ub = np.inf
    lb = -np.inf
    for ai, hi in zip(a, h):
        if ai > 1e-14:
            ub = min(ub, hi / ai)
        elif ai < -1e-14:
            lb = max(lb, hi / ai)
        elif hi < -1e-12:
            return None, None
    if lb > ub + 1e-15 * max(1.0, abs(lb), abs(ub)):
        return None, None
    rows, rhs = [], []
    if np.isfinite(ub):
        rows.append([1.0])
        rhs.append(ub)
    if np.isfinite(lb):
        rows.append([-1.0])
        rhs.append(-lb)
    if not rows:
        return np.zeros((1, 1)), np.array([1.0])
    return np.array(rows), np.array(rhs)


def remove_redundancy(P: HPolytope, bounded_hint=None, box_hint=None) -> HPolytope:
    """Same set, irredundant rows.

    Full-dimensional bounded sets in low dimension go through a dual convex
    hull; everything else falls back to per-row LP certificates.
    """
    if P.is_empty():
        return HPolytope.empty(P.dim)
    Hd, hd = _dedupe_rows(P.H, P.h)
    if Hd is None:
        return HPolytope.empty(P.dim)
    if Hd.shape[0] == 0:
        return HPolytope.universe(P.dim)
    if P.dim == 1:
        H1, h1 = _reduce_1d(Hd, hd)
        if H1 is None:
            return HPolytope.empty(1)
        return HPolytope(H1, h1)
    work = HPolytope(Hd, hd)
    if P.dim <= _DUAL_HULL_MAX_DIM and bounded_hint:
        try:
            center, radius = work.chebyshev_center()
        except EmptyPolytopeError:
            return HPolytope.empty(P.dim)
        if radius > 1e-9:
            out = _reduce_dual_hull(Hd, hd, center)
            if out is not None:
                return HPolytope(out[0], out[1])
    Hr, hr = _reduce_lp(Hd, hd, box=box_hint)
    if Hr is None:
        return HPolytope.empty(P.dim)
    return HPolytope(Hr, hr)


# ---------------------------------------------------------------------------
# projection (Fourier-Motzkin)


def _fm_eliminate(H, h, j):
    """Eliminate coordinate j by pairwise combination; column j is dropped."""
    scale_row = np.max(np.abs(H), axis=1)
    scale_row = np.maximum(scale_row, 1e-300)
    coef = H[:, j]
    zero = np.abs(coef) <= 1e-12 * scale_row
    pos = (~zero) & (coef > 0)
    neg = (~zero) & (coef < 0)
    keep_cols = np.r_[np.arange(j), np.arange(j + 1, H.shape[1])]
    rows = [np.empty((0, keep_cols.size))]
    rhs = [np.empty(0)]
    if np.any(zero):
        rows.append(H[np.ix_(zero, keep_cols)])
        rhs.append(h[zero])
    if np.any(pos) and np.any(neg):
        Hp, hp, cp = H[pos][:, keep_cols], h[pos], coef[pos]
        Hn, hn, cn = H[neg][:, keep_cols], h[neg], coef[neg]
        # row_p * (-c_n) + row_n * c_p  (both multipliers positive)
        newH = (Hp[:, None, :] * (-cn)[None, :, None]
                + Hn[None, :, :] * cp[:, None, None])
        newh = hp[:, None] * (-cn)[None, :] + hn[None, :] * cp[:, None]
        rows.append(newH.reshape(-1, keep_cols.size))
        rhs.append(newh.reshape(-1))
    H_out = np.vstack(rows)
    h_out = np.concatenate(rhs)
    if H_out.shape[0] == 0:
        return np.zeros((1, keep_cols.size)), np.array([1.0])
    # Rescale by a power of two to keep magnitudes tame without rounding.
    mags = np.max(np.abs(H_out), axis=1)
    big = mags > 0
    expo = np.zeros_like(mags)
    expo[big] = np.exp2(np.ceil(np.log2(mags[big])))
    expo[~big] = 1.0
    return H_out / expo[:, None], h_out / expo


def project(P: HPolytope, keep: int, bounded_hint=None, box_hint=None,
            row_cap=ROW_CAP) -> HPolytope:
    """Exact orthogonal projection onto the first `keep` coordinates."""
    n = P.dim
    if keep > n:
        raise ValueError("cannot keep more coordinates than the dimension")
    if keep == n:
        return P
    if P.is_empty():
        return HPolytope.empty(keep)
    H, h = P.H, P.h
    colmap = list(range(n))  # original coordinate index of each current column
    remaining = list(range(keep, n))
    while remaining:
        # Eliminate the coordinate with the fewest pairwise combinations.
        best, best_cost = None, None
        scale_row = np.maximum(np.max(np.abs(H), axis=1), 1e-300)
        for j, orig in enumerate(colmap):
            if orig not in remaining:
                continue
            coef = H[:, j]
            nz = np.abs(coef) > 1e-12 * scale_row
            p = int(np.sum(nz & (coef > 0)))
            m = int(np.sum(nz & (coef < 0)))
            cost = p * m - p - m
            if best_cost is None or cost < best_cost:
                best, best_cost = j, cost
        remaining.remove(colmap[best])
        colmap.pop(best)
        H, h = _fm_eliminate(H, h, best)
        if H.shape[0] > row_cap:
            raise BudgetExceededError(
                f"Fourier-Motzkin exceeded the {row_cap}-row cap")
        Hd, hd = _dedupe_rows(H, h)
        if Hd is None:
            return HPolytope.empty(keep)
        if Hd.shape[0] == 0:
            Hd, hd = np.zeros((1, len(colmap))), np.array([1.0])
        box = None
        if box_hint is not None:
            lo, hi = box_hint
            box = (np.asarray(lo)[colmap], np.asarray(hi)[colmap])
        reduced = remove_redundancy(HPolytope(Hd, hd), bounded_hint=bounded_hint,
                                    box_hint=box)
        if reduced.is_empty():
            return HPolytope.empty(keep)
        H, h = reduced.H, reduced.h
    return HPolytope(H, h)


# ---------------------------------------------------------------------------
# containment programs


def containment_ratio(P1: HPolytope, P2: HPolytope) -> float:
    """Minimal r >= 0 with P1 ⊆ r P2, through the multiplier-matrix LP.

    P2 must be in origin-interior normal form (h > 0); P1 nonempty, bounded.
    """
    if P1.dim != P2.dim:
        raise ValueError("dimension mismatch")
    if not P2.in_normal_form:
        raise NormalFormError("containment_ratio needs h > 0 for the outer set")
    H1, h1 = P1.H, P1.h
    H2, h2 = P2.H, P2.h
    q1, q2, n = H1.shape[0], H2.shape[0], P1.dim
    nv = q2 * q1 + 1  # vec(Lambda) row-major, then r
    A_eq = np.zeros((q2 * n, nv))
    b_eq = np.empty(q2 * n)
    for i in range(q2):
        A_eq[i * n:(i + 1) * n, i * q1:(i + 1) * q1] = H1.T
        b_eq[i * n:(i + 1) * n] = H2[i]
    A_ub = np.zeros((q2, nv))
    for i in range(q2):
        A_ub[i, i * q1:(i + 1) * q1] = h1
        A_ub[i, -1] = -h2[i]
    c = np.zeros(nv)
    c[-1] = 1.0
    nonneg = np.ones(nv, dtype=bool)  # r >= 0 is harmless: minimal r is >= 0
    sol = solve_lp_fast(c, A_ub, np.zeros(q2), A_eq, b_eq, nonneg=nonneg)
    if not sol.optimal:
        raise ValueError(f"containment LP returned {sol.status}; "
                         "is the inner set bounded and nonempty?")
    return float(sol.objective)


def containment_ratio_projected(P1: HPolytope, P2: HPolytope) -> float:
    """Upper bound on the minimal r with P1 ⊆ r * Proj(P2).

    Certificate LP over (r, Gamma, beta, Lambda); infeasibility means "no
    certificate" and is reported as +inf, not as proof of non-containment.
    """
    n, npz = P1.dim, P2.dim
    if npz < n:
        raise ValueError("the lifted set must live in at least dim(P1)")
    if not P2.in_normal_form:
        raise NormalFormError("projected containment needs h > 0 on the lifted set")
    H1, h1 = P1.H, P1.h
    H2, h2 = P2.H, P2.h
    q1, q2 = H1.shape[0], H2.shape[0]
    # variables: r (1), Gamma (npz*n row-major), beta (npz), Lambda (q2*q1)
    ir = 0
    ig = 1
    ib = ig + npz * n
    il = ib + npz
    nv = il + q2 * q1
    rows_eq = []
    rhs_eq = []
    # Lambda H1 = H2 Gamma  (q2 x n)
    for i in range(q2):
        for k in range(n):
            row = np.zeros(nv)
            row[il + i * q1:il + (i + 1) * q1] = H1[:, k]
            for s in range(npz):
                row[ig + s * n + k] -= H2[i, s]
            rows_eq.append(row)
            rhs_eq.append(0.0)
    # P Gamma = I and P beta = 0 (P keeps the first n coordinates)
    for kk in range(n):
        for k in range(n):
            row = np.zeros(nv)
            row[ig + kk * n + k] = 1.0
            rows_eq.append(row)
            rhs_eq.append(1.0 if kk == k else 0.0)
    for kk in range(n):
        row = np.zeros(nv)
        row[ib + kk] = 1.0
        rows_eq.append(row)
        rhs_eq.append(0.0)
    # Lambda h1 <= r h2 + H2 beta
    A_ub = np.zeros((q2, nv))
    for i in range(q2):
        A_ub[i, il + i * q1:il + (i + 1) * q1] = h1
        A_ub[i, ir] = -h2[i]
        A_ub[i, ib:ib + npz] = -H2[i]
    c = np.zeros(nv)
    c[ir] = 1.0
    nonneg = np.zeros(nv, dtype=bool)
    nonneg[il:] = True
    nonneg[ir] = True
    sol = solve_lp_fast(c, A_ub, np.zeros(q2), np.vstack(rows_eq),
                        np.asarray(rhs_eq), nonneg=nonneg)
    if sol.status == INFEASIBLE:
        return np.inf
    if not sol.optimal:
        raise ValueError(f"projected containment LP returned {sol.status}")
    return float(sol.objective)


def max_inscribed_ball_at(P: HPolytope, center) -> float:
    """Largest eps with center + eps*B(n) ⊆ P (sup-norm ball), 0 if outside."""
    center = np.asarray(center, dtype=float)
    rowsum = np.sum(np.abs(P.H), axis=1)
    slack = P.h - P.H @ center
    vals = []
    for rs, sl in zip(rowsum, slack):
        if rs <= 1e-14:
            if sl < -1e-12:
                return 0.0
            continue
        vals.append(sl / rs)
    if not vals:
        return np.inf
    eps = min(vals)
    return float(max(eps, 0.0))


# ---------------------------------------------------------------------------
# vertices, boxes, radii, Hausdorff distance


def bounding_box(P: HPolytope) -> Box:
    n = P.dim
    lo = np.empty(n)
    hi = np.empty(n)
    e = np.zeros(n)
    for i in range(n):
        e[i] = 1.0
        hi[i] = support(P, e)
        lo[i] = -support(P, -e)
        e[i] = 0.0
    return Box(lo, hi)


def _vertices_1d(P):
    hi = support(P, np.ones(1))
    lo = -support(P, -np.ones(1))
    if abs(hi - lo) <= TAU_VERT * max(1.0, abs(hi)):
        return np.array([[lo]])
    return np.array([[lo], [hi]])


def _vertices_2d_ordered(H, h):
    """Vertices of a full-dimensional irredundant 2D polytope, ccw by facet."""
    ang = np.arctan2(H[:, 1], H[:, 0])
    order = np.argsort(ang)
    Hs, hs = H[order], h[order]
    q = Hs.shape[0]
    verts = []
    for i in range(q):
        j = (i + 1) % q
        A = np.vstack([Hs[i], Hs[j]])
        det = np.linalg.det(A)
        if abs(det) < 1e-12 * max(np.abs(A).max(), 1.0) ** 2:
            return None
        v = np.linalg.solve(A, np.array([hs[i], hs[j]]))
        verts.append(v)
    verts = np.array(verts)
    norms = np.maximum(np.linalg.norm(H, axis=1), 1e-300)
    feas = np.all(H @ verts.T - h[:, None] <= 1e-7 * norms[:, None], axis=0)
    if not np.all(feas):
        return None
    return verts


def _vertices_qhull(P, center):
    from scipy.spatial import HalfspaceIntersection, QhullError

    norms = np.linalg.norm(P.H, axis=1)
    good = norms > 1e-14
    halfspaces = np.hstack([P.H[good] / norms[good, None],
                            -(P.h[good] / norms[good])[:, None]])
    try:
        hs = HalfspaceIntersection(halfspaces, center)
    except QhullError:
        return None
    return hs.intersections


def _vertices_combinatorial(P):
    """Basic-solution enumeration; exact but exponential, for degenerate sets."""
    from itertools import combinations

    H, h = P.H, P.h
    n = P.dim
    norms = np.maximum(np.linalg.norm(H, axis=1), 1e-300)
    if H.shape[0] > 60:
        raise BudgetExceededError("too many rows for combinatorial vertex search")
    verts = []
    for idx in combinations(range(H.shape[0]), n):
        A = H[list(idx)]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        v = np.linalg.solve(A, h[list(idx)])
        if np.all(H @ v - h <= 1e-7 * norms):
            verts.append(v)
    return np.array(verts) if verts else np.zeros((0, n))


def _dedupe_points(pts, tol=TAU_VERT):
    if pts.shape[0] == 0:
        return pts
    out = []
    for p in pts:
        if not any(np.linalg.norm(p - q) <= tol * (1.0 + np.linalg.norm(q)) for q in out):
            out.append(p)
    return np.array(out)


def vertices(P: HPolytope, dim_cap=VERTEX_DIM_CAP) -> np.ndarray:
    """Exact vertex set of a bounded polytope (deduplicated)."""
    n = P.dim
    if n > dim_cap:
        raise BudgetExceededError(
            f"vertex enumeration capped at dimension {dim_cap}; "
            "use the bounding-box fallback")
    if P.is_empty():
        raise EmptyPolytopeError("empty polytope has no vertices")
    if n == 1:
        return _vertices_1d(P)
    center, radius = P.chebyshev_center()
    if radius > 1e-9:
        R = remove_redundancy(P, bounded_hint=True)
        if n == 2:
            out = _vertices_2d_ordered(R.H, R.h)
            if out is not None:
                return _dedupe_points(out)
        out = _vertices_qhull(R, center)
        if out is not None:
            return _dedupe_points(out)
    return _dedupe_points(_vertices_combinatorial(P))


def radius_from_origin(P: HPolytope, mode="exact") -> float:
    """Radius of the smallest origin-centered ball containing P."""
    if not P.contains_point(np.zeros(P.dim)):
        raise ValueError("radius_from_origin expects the origin inside P")
    if mode == "exact":
        V = vertices(P)
        return float(np.max(np.linalg.norm(V, axis=1)))
    if mode == "box":
        b = bounding_box(P)
        return float(np.sqrt(np.sum(np.maximum(b.lower ** 2, b.upper ** 2))))
    raise ValueError(f"unknown mode {mode!r}")


def hausdorff_nested(X: HPolytope, Y: HPolytope, containment_tol=1e-7) -> float:
    """Hausdorff distance for nested polytopes X ⊆ Y (2-norm, exact).

    Equals the largest distance from a vertex of the outer set to the inner
    set; verified containment is a precondition.
    """
    if X.dim != Y.dim:
        raise ValueError("dimension mismatch")
    if not contains(Y, X, tol=containment_tol):
        raise ValueError("hausdorff_nested requires X ⊆ Y")
    best = 0.0
    for v in vertices(Y):
        _, dist = _project_point(v, X)
        if dist > best:
            best = dist
    return float(best)

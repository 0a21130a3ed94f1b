"""Alternating quadrisecants of polygonal long knots and the signed count v2.

A line meeting the knot at ``t1 < t2 < t3 < t4`` is an alternating
quadrisecant when, oriented from ``x3`` to ``x2``, the points appear in the
order ``x3, x1, x4, x2``.  Then ``x1`` and ``x4`` lie inside the box spanned
by the segments carrying ``x2`` and ``x3``, which is the pruning test used
below.

For a segment pair ``(b, c)`` the lines through ``P(s) = B0 + s db`` and
``Q(u) = C0 + u dc`` that also meet the line of a third segment form a
bilinear curve in ``(s, u)``; two such curves meet in at most two points,
found from a quadratic in ``s``.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .knots import LongKnotPL, perturb, reach_estimate

MARGIN = 1e-9
MAX_RETRIES = 5


class DegeneracyError(RuntimeError):
    """The knot is not generic enough for the enumeration; perturb and retry."""


@dataclass(frozen=True)
class Quadrisecant:
    t: tuple[float, float, float, float]
    points: np.ndarray = field(repr=False)
    line_point: np.ndarray = field(repr=False)
    line_dir: np.ndarray = field(repr=False)
    sign: int = 0
    residual: float = 0.0
    segments: tuple[int, int, int, int] = (0, 0, 0, 0)

    def to_dict(self) -> dict:
        return {
            "t": [float(x) for x in self.t],
            "points": self.points.tolist(),
            "line": {"point": self.line_point.tolist(), "direction": self.line_dir.tolist()},
            "sign": int(self.sign),
            "residual": float(self.residual),
        }


def default_threads() -> int:
    env = os.environ.get("KNOTCUBES_THREADS")
    if env:
        return max(1, int(env))
    return 1


# --- predicates -------------------------------------------------------------

def collinearity_residual(x1, x2, x3, x4) -> float:
    """Largest distance of x1, x4 from the line through x3 and x2."""
    x1, x2, x3, x4 = (np.asarray(x, dtype=float) for x in (x1, x2, x3, x4))
    L = x2 - x3
    n2 = L @ L
    if n2 == 0:
        raise ValueError("x2 and x3 coincide")
    res = 0.0
    for x in (x1, x4):
        w = x - x3
        res = max(res, float(np.linalg.norm(w - (w @ L) / n2 * L)))
    return res


def is_alternating(x1, x2, x3, x4, tol: float = 1e-9) -> bool:
    """Order along the line from x3 to x2 is x3, x1, x4, x2."""
    pts = [np.asarray(x, dtype=float) for x in (x1, x2, x3, x4)]
    scale = max(1.0, max(float(np.abs(p).max()) for p in pts))
    if collinearity_residual(*pts) > tol * scale:
        raise ValueError("points are not collinear")
    x1, x2, x3, x4 = pts
    L = x2 - x3
    tau1 = (x1 - x3) @ L / (L @ L)
    tau4 = (x4 - x3) @ L / (L @ L)
    return bool(0 < tau1 < tau4 < 1)


# --- segment tables ---------------------------------------------------------

def _segment_table(f: LongKnotPL):
    """Start points, directions, upper limits and forward tangents.

    Row 0 is the left tail written as a ray ``p0 - r e1`` (``r >= 0``), the
    last row the right tail ``pm + r e1``; interior rows are the polygon edges
    with ``r`` in ``[0, 1]``.
    """
    P = f.P
    n = P.shape[1]
    e = np.zeros(n)
    e[0] = 1.0
    A = np.vstack([P[:1], P[:-1], P[-1:]])
    D = np.vstack([-e, np.diff(P, axis=0), e])
    hi = np.concatenate([[np.inf], np.ones(len(P) - 1), [np.inf]])
    T = np.vstack([e, np.diff(P, axis=0), e])
    return A, D, hi, T


def _param_of(f: LongKnotPL, seg: int, r: float) -> float:
    if seg == 0:
        return f.ts[0] - r
    if seg == len(f.ts):
        return f.ts[-1] + r
    return f.ts[seg - 1] + r * (f.ts[seg] - f.ts[seg - 1])


def _bbox_hits(A, D, hi, lo_box, hi_box, pad):
    """Which segments/rays meet the box (slab test, vectorised)."""
    lo_box = lo_box - pad
    hi_box = hi_box + pad
    r0 = np.zeros(len(A))
    r1 = np.where(np.isinf(hi), 1e6, hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(A.shape[1]):
            a, d = A[:, k], D[:, k]
            flat = np.abs(d) < 1e-300
            inside = (a >= lo_box[k]) & (a <= hi_box[k])
            ta = (lo_box[k] - a) / d
            tb = (hi_box[k] - a) / d
            tmin = np.where(flat, np.where(inside, -np.inf, np.inf), np.minimum(ta, tb))
            tmax = np.where(flat, np.where(inside, np.inf, -np.inf), np.maximum(ta, tb))
            r0 = np.maximum(r0, tmin)
            r1 = np.minimum(r1, tmax)
    return r0 <= r1


def _bilinear(B0, db, C0, dc, A0, da):
    """Coefficients of ``c0 + c1 s + c2 u + c3 s u = 0``: line PQ meets line a."""
    w = B0 - A0
    CB = C0 - B0
    x_cb = np.cross(CB, da)
    x_db = np.cross(db, da)
    x_dc = np.cross(dc, da)
    c0 = np.einsum("...i,...i", w, x_cb)
    c1 = np.einsum("...i,...i", db[None, :] if db.ndim == 1 else db, x_cb) - np.einsum("...i,...i", w, x_db)
    c2 = np.einsum("...i,...i", w, x_dc)
    c3 = np.einsum("...i,...i", db[None, :] if db.ndim == 1 else db, x_dc)
    return c0, c1, c2, c3


def _solve_pair(B0, db, C0, dc, A0a, Da, A0d, Dd):
    """All (s, u) with line P(s)Q(u) meeting both lines a and d.

    Inputs for a and d broadcast as ``(na, 1, 3)`` and ``(1, nd, 3)``.
    Returns s, u arrays of shape ``(na, nd, 2)`` plus a validity mask and a
    flag array marking numerically degenerate configurations.
    """
    a0, a1, a2, a3 = _bilinear(B0, db, C0, dc, A0a, Da)
    b0, b1, b2, b3 = _bilinear(B0, db, C0, dc, A0d, Dd)
    # (b0 + b1 s)(a2 + a3 s) - (b2 + b3 s)(a0 + a1 s) = 0
    q2 = b1 * a3 - b3 * a1
    q1 = b0 * a3 + b1 * a2 - b2 * a1 - b3 * a0
    q0 = b0 * a2 - b2 * a0
    scale = np.maximum.reduce([np.abs(q2), np.abs(q1), np.abs(q0)])
    degenerate = scale <= 1e-24
    disc = q1 * q1 - 4 * q2 * q0
    quad = np.abs(q2) > 1e-14 * np.maximum(scale, 1e-300)
    sq = np.sqrt(np.maximum(disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        qq = -0.5 * (q1 + np.copysign(sq, q1))
        r1 = np.where(quad, qq / q2, -q0 / q1)
        r2 = np.where(quad, q0 / qq, np.nan)
    real = ~quad | (disc >= 0)
    s = np.stack([r1, r2], -1)
    ok = np.stack([real, real & quad], -1) & np.isfinite(s)
    # u from whichever equation is better conditioned
    with np.errstate(divide="ignore", invalid="ignore"):
        den_a = a2[..., None] + a3[..., None] * s
        den_b = b2[..., None] + b3[..., None] * s
        use_a = np.abs(den_a) >= np.abs(den_b)
        u = np.where(use_a, -(a0[..., None] + a1[..., None] * s) / den_a,
                     -(b0[..., None] + b1[..., None] * s) / den_b)
    ok &= np.isfinite(u)
    near_double = quad & (np.abs(disc) <= 1e-20 * np.maximum(q1 * q1, 1e-300))
    return s, u, ok, degenerate, near_double


def _hit(x3, L, P0, dp):
    """Least-squares ``x3 + tau L = P0 + r dp``; returns tau, r, residual."""
    w = P0 - x3
    LL = np.einsum("...i,...i", L, L)
    Ld = np.einsum("...i,...i", L, dp)
    dd = np.einsum("...i,...i", dp, dp)
    Lw = np.einsum("...i,...i", L, w)
    dw = np.einsum("...i,...i", dp, w)
    det = LL * dd - Ld * Ld
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = (Lw * dd - Ld * dw) / det
        r = (Ld * Lw - LL * dw) / det
    diff = x3 + tau[..., None] * L - (P0 + r[..., None] * dp)
    return tau, r, np.sqrt(np.einsum("...i,...i", diff, diff))


def _in_range(x, lo, hi, margin):
    strict = (x > lo + margin) & (x < hi - margin)
    loose = (x > lo - margin) & (x < hi + margin)
    return strict, loose


@np.errstate(all="ignore")
def _scan_pair(b, c, A, D, hi, margin, prune=True):
    """Candidate quadrisecants with x2 on segment b and x3 on segment c."""
    B0, db, C0, dc = A[b], D[b], A[c], D[c]
    if prune:
        ends = np.vstack([B0, B0 + db, C0, C0 + dc])
        hit = _bbox_hits(A, D, hi, ends.min(0), ends.max(0), 1e-9)
    else:
        hit = np.ones(len(A), dtype=bool)
    ia = np.nonzero(hit[:b])[0]
    idd = np.nonzero(hit[c + 1:])[0] + c + 1
    if len(ia) == 0 or len(idd) == 0:
        return [], False
    A0a, Da = A[ia][:, None, :], D[ia][:, None, :]
    A0d, Dd = A[idd][None, :, :], D[idd][None, :, :]
    s, u, ok, deg, near_double = _solve_pair(B0, db, C0, dc, A0a, Da, A0d, Dd)
    s_st, s_lo = _in_range(s, 0.0, 1.0, margin)
    u_st, u_lo = _in_range(u, 0.0, 1.0, margin)
    x2 = B0 + s[..., None] * db
    x3 = C0 + u[..., None] * dc
    L = x2 - x3
    tau1, r1, res1 = _hit(x3, L, A0a[:, :, None, :], Da[:, :, None, :])
    tau4, r4, res4 = _hit(x3, L, A0d[:, :, None, :], Dd[:, :, None, :])
    hia = hi[ia][:, None, None]
    hid = hi[idd][None, :, None]
    r1_st, r1_lo = _in_range(r1, 0.0, hia, margin)
    r4_st, r4_lo = _in_range(r4, 0.0, hid, margin)
    o_st = (tau1 > margin) & (tau4 - tau1 > margin) & (tau4 < 1 - margin)
    o_lo = (tau1 > -margin) & (tau4 - tau1 > -margin) & (tau4 < 1 + margin)
    strict = ok & s_st & u_st & r1_st & r4_st & o_st
    loose = ok & s_lo & u_lo & r1_lo & r4_lo & o_lo
    degenerate = bool(np.any(loose & ~strict)) or bool(np.any(deg[..., None] & loose))
    degenerate |= bool(np.any(near_double[..., None] & strict))
    out = []
    for i, k, z in zip(*np.nonzero(strict)):
        out.append((int(ia[i]), b, c, int(idd[k]), float(r1[i, k, z]), float(s[i, k, z]),
                    float(u[i, k, z]), float(r4[i, k, z]), float(tau1[i, k, z]), float(tau4[i, k, z]),
                    max(float(res1[i, k, z]), float(res4[i, k, z]))))
    return out, degenerate


def _perp_basis(d: np.ndarray):
    d = d / np.linalg.norm(d)
    a = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(d, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def sign_jacobian(points, tangents, lam1: float, lam4: float) -> np.ndarray:
    """Jacobian of the collinearity map at a quadrisecant (R^3 case).

    The map sends ``(t1..t4)`` to the components of ``x1 - x3 - lam1 (x2 - x3)``
    and ``x4 - x3 - lam4 (x2 - x3)`` normal to the line.  Columns follow the
    parameter order, rows the two normal components of each residual.
    """
    x1, x2, x3, x4 = points
    e1, e2 = _perp_basis(np.asarray(x2) - np.asarray(x3))
    P = lambda v: np.array([v @ e1, v @ e2])
    u1, u2, u3, u4 = (np.asarray(t, dtype=float) for t in tangents)
    J = np.zeros((4, 4))
    J[0:2, 0] = P(u1)
    J[0:2, 1] = -lam1 * P(u2)
    J[2:4, 1] = -lam4 * P(u2)
    J[0:2, 2] = -(1 - lam1) * P(u3)
    J[2:4, 2] = -(1 - lam4) * P(u3)
    J[2:4, 3] = P(u4)
    return J


def quadrisecant_sign_from_data(points, tangents, lam1, lam4) -> int:
    J = sign_jacobian(points, [t / np.linalg.norm(t) for t in tangents], lam1, lam4)
    det = np.linalg.det(J)
    if abs(det) <= 1e-12:
        raise DegeneracyError("singular collinearity Jacobian")
    # global orientation convention: the right trefoil counts +1
    return -int(np.sign(det))


def quadrisecant_sign(q: Quadrisecant, f: LongKnotPL) -> int:
    _, _, _, T = _segment_table(f)
    x1, x2, x3, x4 = q.points
    L = x2 - x3
    lam1 = float((x1 - x3) @ L / (L @ L))
    lam4 = float((x4 - x3) @ L / (L @ L))
    return quadrisecant_sign_from_data(q.points, [T[k] for k in q.segments], lam1, lam4)


def _enumerate_once(f: LongKnotPL, threads: int, prune: bool, margin: float):
    A, D, hi, T = _segment_table(f)
    m = len(A)
    pairs = [(b, c) for b in range(1, m - 1) for c in range(b + 1, m - 1)]
    work = lambda bc: _scan_pair(bc[0], bc[1], A, D, hi, margin, prune)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, pairs, chunksize=32))
    else:
        results = [work(p) for p in pairs]
    raw, degenerate = [], False
    for found, deg in results:
        raw.extend(found)
        degenerate |= deg
    if degenerate:
        raise DegeneracyError("a candidate quadrisecant sits on a segment boundary")
    diam = float(np.ptp(f.P, axis=0).max()) or 1.0
    out = []
    for a, b, c, d, r1, s, u, r4, tau1, tau4, res in raw:
        x2 = A[b] + s * D[b]
        x3 = A[c] + u * D[c]
        L = x2 - x3
        x1 = x3 + tau1 * L
        x4 = x3 + tau4 * L
        if res > 1e-10 * diam:
            raise DegeneracyError(f"collinearity residual {res:.3g} too large")
        sign = quadrisecant_sign_from_data([x1, x2, x3, x4], [T[a], T[b], T[c], T[d]], tau1, tau4)
        ts = (_param_of(f, a, r1), _param_of(f, b, s), _param_of(f, c, u), _param_of(f, d, r4))
        out.append(Quadrisecant(ts, np.array([x1, x2, x3, x4]), x3, L / np.linalg.norm(L),
                                sign, res, (a, b, c, d)))
    out.sort(key=lambda q: q.t)
    deduped = []
    for q in out:
        if deduped and max(abs(x - y) for x, y in zip(q.t, deduped[-1].t)) < 1e-10:
            continue
        deduped.append(q)
    return deduped


@dataclass
class Enumeration:
    quadrisecants: list[Quadrisecant]
    knot: LongKnotPL
    perturbations: list[dict]

    @property
    def v2(self) -> int:
        return int(sum(q.sign for q in self.quadrisecants))


def enumerate_alternating_quadrisecants(f: LongKnotPL, seed: int = 0, threads: int | None = None,
                                        prune: bool = True, retries: int = MAX_RETRIES,
                                        margin: float = MARGIN) -> Enumeration:
    """All alternating quadrisecants, sorted by parameters.

    On a degeneracy the knot is perturbed (seeded, magnitude
    ``reach/100 * 2^k``, capped below ``reach/10``) and the enumeration is
    repeated; the perturbations are recorded.
    """
    if f.ambient_dim != 3:
        raise ValueError("quadrisecant enumeration works in R^3; use family_nu2 in R^4")
    threads = default_threads() if threads is None else max(1, int(threads))
    log: list[dict] = []
    g = f
    for k in range(retries + 1):
        try:
            qs = _enumerate_once(g, threads, prune, margin)
            return Enumeration(qs, g, log)
        except DegeneracyError as exc:
            if k == retries:
                raise DegeneracyError(f"still degenerate after {retries} perturbations: {exc}")
            reach = reach_estimate(f)
            mag = min(reach / 100 * 2 ** k, reach / 10 * 0.99)
            g = perturb(f, seed + k, mag)
            log.append({"attempt": k + 1, "seed": seed + k, "magnitude": mag, "reason": str(exc)})
    raise AssertionError("unreachable")


def v2(f: LongKnotPL, seed: int = 0, threads: int | None = None) -> int:
    return enumerate_alternating_quadrisecants(f, seed=seed, threads=threads).v2


# --- transversals to four segments -------------------------------------------

@np.errstate(all="ignore")
def segment_transversals(s1, s2, s3, s4, margin: float = MARGIN) -> list[dict]:
    """Lines meeting four segments of R^3 in their interiors.

    Each segment is a pair of endpoints.  Returns dicts with the line
    (point, unit direction) and the hit parameters on each segment.
    """
    segs = [tuple(np.asarray(p, dtype=float) for p in s) for s in (s1, s2, s3, s4)]
    (A0, A1), (B0, B1), (C0, C1), (E0, E1) = segs
    da, db, dc, de = A1 - A0, B1 - B0, C1 - C0, E1 - E0
    for d in (da, db, dc, de):
        if np.linalg.norm(d) == 0:
            raise DegeneracyError("zero-length segment")
    pts = np.vstack([A0, A1, B0, B1, C0, C1, E0, E1])
    centred = pts - pts.mean(0)
    if np.linalg.svd(centred, compute_uv=False)[-1] <= 1e-12 * max(1.0, np.abs(pts).max()):
        raise DegeneracyError("coplanar configuration; perturb and retry")
    s, u, ok, deg, _ = _solve_pair(B0, db, C0, dc, A0[None, None], da[None, None],
                                   E0[None, None], de[None, None])
    if bool(deg.any()):
        raise DegeneracyError("degenerate configuration; perturb and retry")
    out = []
    for z in range(2):
        if not ok[0, 0, z]:
            continue
        sz, uz = float(s[0, 0, z]), float(u[0, 0, z])
        x2 = B0 + sz * db
        x3 = C0 + uz * dc
        L = x2 - x3
        if np.linalg.norm(L) < 1e-14:
            continue
        tau1, r1, res1 = _hit(x3, L, A0, da)
        tau4, r4, res4 = _hit(x3, L, E0, de)
        params = (float(r1), sz, uz, float(r4))
        if all(margin < p < 1 - margin for p in params):
            out.append({"point": x3, "direction": L / np.linalg.norm(L), "params": params,
                        "residual": max(float(res1), float(res4))})
    return out


# --- two-parameter families in R^4 ----------------------------------------------

@dataclass
class FamilySolution:
    theta: tuple[float, float]
    t: tuple[float, float, float, float]
    lam: tuple[float, float]
    sign: int
    conditioning: float
    residual: float

    def to_dict(self) -> dict:
        return {"theta": list(self.theta), "t": list(self.t), "lambda": list(self.lam),
                "sign": self.sign, "conditioning": self.conditioning, "residual": self.residual}


@dataclass
class FamilyNu2:
    count: int
    stable: bool
    certified: bool
    grid: int
    solutions: list[FamilySolution]
    refined_count: int | None = None
    rejected_degenerate: int = 0
    unresolved: int = 0
    seeds: int = 0

    def to_dict(self) -> dict:
        return {"nu2": self.count, "stable": self.stable, "certified": self.certified,
                "grid": self.grid, "refined_count": self.refined_count,
                "rejected_degenerate": self.rejected_degenerate, "unresolved": self.unresolved,
                "seeds": self.seeds, "solutions": [s.to_dict() for s in self.solutions]}


def _family_system(fam, Z):
    """Residuals ``(S, 2n)`` and Jacobians ``(S, 2n, 8)`` for a batch of unknowns."""
    th1 = np.repeat(Z[:, 0:1], 4, 1)
    th2 = np.repeat(Z[:, 1:2], 4, 1)
    t = Z[:, 2:6]
    l1, l4 = Z[:, 6:7], Z[:, 7:8]
    X = fam.evaluate(th1, th2, t)
    dT, d1, d2 = fam.derivatives(th1, th2, t)
    L = X[:, 1] - X[:, 2]
    F = np.concatenate([X[:, 0] - X[:, 2] - l1 * L, X[:, 3] - X[:, 2] - l4 * L], 1)
    S, n = len(Z), X.shape[2]
    J = np.zeros((S, 2 * n, 8))
    for col, dX in ((0, d1), (1, d2)):
        J[:, :n, col] = dX[:, 0] - dX[:, 2] - l1 * (dX[:, 1] - dX[:, 2])
        J[:, n:, col] = dX[:, 3] - dX[:, 2] - l4 * (dX[:, 1] - dX[:, 2])
    J[:, :n, 2] = dT[:, 0]
    J[:, :n, 3] = -l1 * dT[:, 1]
    J[:, n:, 3] = -l4 * dT[:, 1]
    J[:, :n, 4] = -(1 - l1) * dT[:, 2]
    J[:, n:, 4] = -(1 - l4) * dT[:, 2]
    J[:, n:, 5] = dT[:, 3]
    J[:, :n, 6] = -L
    J[:, n:, 7] = -L
    return F, J


def _newton(fam, Z, iters: int, tol: float):
    """Damped Gauss-Newton on a batch; steps are capped at 0.1 in max norm."""
    Z = np.array(Z, dtype=float)
    active = np.ones(len(Z), dtype=bool)
    for _ in range(iters):
        if not np.any(active):
            break
        F, J = _family_system(fam, Z[active])
        res = np.abs(F).max(1)
        idx = np.nonzero(active)[0]
        active[idx[res < tol]] = False
        go = res >= tol
        if not np.any(go):
            break
        step = -np.einsum("sij,sj->si", np.linalg.pinv(J[go]), F[go])
        scale = np.maximum(1.0, np.abs(step).max(1) / 0.1)
        Z[idx[go]] += step / scale[:, None]
    F, J = _family_system(fam, Z)
    return Z, np.abs(F).max(1), J


def _projected_seeds(fam, th1, th2, seed, cache):
    f = fam.knot(th1, th2)
    g = LongKnotPL(f.params, tuple(p[:3] for p in f.points))
    key = g.points
    if key not in cache:
        try:
            qs = enumerate_alternating_quadrisecants(g, seed=seed, threads=1).quadrisecants
        except DegeneracyError:
            qs = []
        seeds = []
        for q in qs:
            x1, x2, x3, x4 = q.points
            L = x2 - x3
            seeds.append((*q.t, float((x1 - x3) @ L / (L @ L)), float((x4 - x3) @ L / (L @ L))))
        cache[key] = seeds
    return np.array(cache[key], dtype=float).reshape(-1, 6)


def _family_pass(fam, grid, stride, seed, threads, iters, tol, cond_tol, margin, cache):
    step = 2 * np.pi / grid
    coarse = list(range(0, grid, stride))
    tasks = [(a, b) for a in coarse for b in coarse]
    work = lambda ab: _projected_seeds(fam, ab[0] * step, ab[1] * step, seed, cache)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            seed_lists = dict(zip(tasks, ex.map(work, tasks)))
    else:
        seed_lists = {ab: work(ab) for ab in tasks}
    # every grid node borrows the curve seeds of its coarse node
    rows = []
    for i in range(grid):
        for j in range(grid):
            sd = seed_lists[(i - i % stride, j - j % stride)]
            if len(sd):
                rows.append(np.column_stack([np.full(len(sd), i * step), np.full(len(sd), j * step), sd]))
    if not rows:
        return [], 0, 0, 0
    Z0 = np.vstack(rows)
    Z, res, J = _newton(fam, Z0, iters, tol)
    unresolved = int(np.sum((res >= tol) & (res < 1e-6)))
    found, degenerate = [], 0
    breaks = np.asarray(fam.breakpoints(), dtype=float)
    for z, r, Jz in zip(Z[res < tol], res[res < tol], J[res < tol]):
        t, l1, l4 = z[2:6], z[6], z[7]
        if not (np.all(np.diff(t) > margin) and margin < l1 < l4 - margin and l4 < 1 - margin):
            continue
        if np.abs(t[:, None] - breaks[None, :]).min() < 1e-9:
            # a root on a vertex of the PL curve is not a transverse crossing
            degenerate += 1
            continue
        sv = np.linalg.svd(Jz, compute_uv=False)
        cond = float(sv[-1] / sv[0])
        if cond < cond_tol:
            degenerate += 1
            continue
        th = tuple(float(np.mod(x, 2 * np.pi)) for x in z[:2])
        found.append(FamilySolution(th, tuple(float(x) for x in t), (float(l1), float(l4)),
                                    int(np.sign(np.linalg.det(Jz))), cond, float(r)))
    found.sort(key=lambda s: s.theta + s.t)
    uniq: list[FamilySolution] = []
    for s in found:
        close = lambda o: (max(abs(x - y) for x, y in zip(s.t, o.t)) < 1e-7 and
                           all(min(abs(x - y), 2 * np.pi - abs(x - y)) < 1e-7 for x, y in zip(s.theta, o.theta)))
        if not any(close(o) for o in uniq):
            uniq.append(s)
    return uniq, degenerate, unresolved, len(Z0)


def family_nu2(fam, grid: int = 64, stride: int = 8, seed: int = 0, threads: int | None = None,
               iters: int = 40, tol: float = 1e-12, cond_tol: float = 1e-8,
               margin: float = 1e-9, refine: bool = True) -> FamilyNu2:
    """Signed count of alternating quadrisecants in a torus family of knots in R^4.

    ``fam`` provides ``knot(th1, th2)``, ``evaluate(th1, th2, t)`` and
    ``derivatives(th1, th2, t)`` for angles in ``[0, 2 pi)``.  The R^3
    projections are enumerated at every ``stride``-th grid node; each grid
    node then starts Newton on the 8x8 collinearity system in
    ``(th1, th2, t1..t4, lam1, lam4)`` from the curve seeds of its coarse
    node.  Solutions with a near-singular Jacobian are rejected as
    non-transverse.  The count is ``stable`` when the doubled grid finds the
    same solutions, and ``certified`` when it is stable and no seed stalled
    short of convergence.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    cache: dict = {}
    sols, deg, unres, nseeds = _family_pass(fam, grid, stride, seed, threads, iters, tol,
                                            cond_tol, margin, cache)
    count = int(sum(s.sign for s in sols))
    out = FamilyNu2(count, False, False, grid, sols, None, deg, unres, nseeds)
    if refine:
        sols2, _, unres2, _ = _family_pass(fam, 2 * grid, 2 * stride, seed, threads, iters, tol,
                                           cond_tol, margin, cache)
        out.refined_count = int(sum(s.sign for s in sols2))
        same = len(sols2) == len(sols) and all(
            max(abs(x - y) for x, y in zip(a.t, b.t)) < 1e-7 for a, b in zip(sols, sols2))
        out.stable = same and out.refined_count == count
        out.unresolved += unres2
    out.certified = out.stable and out.unresolved == 0
    return out

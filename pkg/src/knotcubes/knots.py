"""Piecewise-linear long knots R -> R^n and their validation.

Vertices are stored exactly as rationals.  Float copies are derived on
demand for evaluation and for the numerical parts of the toolkit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .geometry import as_fraction, fraction_str

KNOT_JSON_VERSION = 1


class KnotError(ValueError):
    pass


def _frac_vec(v) -> tuple[Fraction, ...]:
    return tuple(as_fraction(x) for x in v)


def _standard_point(t: Fraction, n: int) -> tuple[Fraction, ...]:
    return (t,) + (Fraction(0),) * (n - 1)


@dataclass(frozen=True, eq=False)
class LongKnotPL:
    """A long knot given by vertices ``(t_k, p_k)`` with standard tails.

    ``f(t) = (t, 0, ..., 0)`` for ``t <= t_0`` and ``t >= t_m``; in between
    the map interpolates linearly.
    """

    params: tuple[Fraction, ...]
    points: tuple[tuple[Fraction, ...], ...]
    name: str = ""

    def __post_init__(self):
        params = tuple(as_fraction(t) for t in self.params)
        points = tuple(_frac_vec(p) for p in self.points)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "points", points)
        if len(params) < 2 or len(params) != len(points):
            raise KnotError("need at least two vertices, one point per parameter")
        n = len(points[0])
        if n < 2 or any(len(p) != n for p in points):
            raise KnotError("inconsistent ambient dimension")
        if any(b <= a for a, b in zip(params, params[1:])):
            raise KnotError("parameters must be strictly increasing")
        if params[0] < -1 or params[-1] > 1:
            raise KnotError("vertex parameters must lie in [-1, 1]")
        if points[0] != _standard_point(params[0], n) or points[-1] != _standard_point(params[-1], n):
            raise KnotError("end vertices must sit on the standard line")
        if points[1][0] <= points[0][0] or points[-1][0] <= points[-2][0]:
            raise KnotError("end segments must leave/enter along the positive first axis")
        for p, q in zip(points, points[1:]):
            if p == q:
                raise KnotError("consecutive vertices coincide")
        for p in points[1:-1]:
            if any(abs(x) >= 1 for x in p):
                raise KnotError(f"interior vertex {p} is not inside the open cube")

    # --- basic data -------------------------------------------------------
    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    @property
    def domain_dim(self) -> int:
        return 1

    @property
    def num_segments(self) -> int:
        return len(self.params) - 1

    @cached_property
    def ts(self) -> np.ndarray:
        return np.array([float(t) for t in self.params])

    @cached_property
    def P(self) -> np.ndarray:
        return np.array([[float(x) for x in p] for p in self.points])

    def __call__(self, t):
        return eval_knot(self, t)

    def is_standard_vertex(self, k: int) -> bool:
        return self.points[k] == _standard_point(self.params[k], self.ambient_dim)

    def support(self) -> tuple[Fraction, Fraction] | None:
        """Smallest parameter interval outside of which the knot is standard."""
        m = len(self.params) - 1
        k0 = 0
        while k0 < m and self.is_standard_vertex(k0 + 1):
            k0 += 1
        if k0 == m:
            return None
        k1 = m
        while self.is_standard_vertex(k1 - 1):
            k1 -= 1
        return self.params[k0], self.params[k1]

    def canonical(self) -> "LongKnotPL":
        """Same map with redundant vertices removed (for exact equality)."""
        verts = list(zip(self.params, self.points))
        n = self.ambient_dim
        out = [verts[0]]
        for k in range(1, len(verts) - 1):
            t0, p0 = out[-1]
            t1, p1 = verts[k]
            t2, p2 = verts[k + 1]
            lam = (t1 - t0) / (t2 - t0)
            if all(p1[i] == p0[i] + lam * (p2[i] - p0[i]) for i in range(n)):
                continue
            out.append(verts[k])
        out.append(verts[-1])
        while len(out) > 2 and out[1][1] == _standard_point(out[1][0], n):
            out.pop(0)
        while len(out) > 2 and out[-2][1] == _standard_point(out[-2][0], n):
            out.pop()
        if len(out) == 2 and out[0][1] == _standard_point(out[0][0], n):
            out = [(Fraction(-1), _standard_point(Fraction(-1), n)),
                   (Fraction(1), _standard_point(Fraction(1), n))]
        return LongKnotPL(tuple(t for t, _ in out), tuple(p for _, p in out), self.name)

    def same_map(self, other: "LongKnotPL") -> bool:
        a, b = self.canonical(), other.canonical()
        return a.params == b.params and a.points == b.points

    def with_name(self, name: str) -> "LongKnotPL":
        return LongKnotPL(self.params, self.points, name)

    # --- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "version": KNOT_JSON_VERSION,
            "name": self.name,
            "ambient_dim": self.ambient_dim,
            "kind": "embedded",
            "vertices": [[fraction_str(t)] + [fraction_str(x) for x in p]
                         for t, p in zip(self.params, self.points)],
            "double_points": [],
        }


@dataclass(frozen=True, eq=False)
class ImmersedKnotPL(LongKnotPL):
    """A PL long immersion with a listed set of transverse double points."""

    double_points: tuple[tuple[Fraction, Fraction], ...] = field(default=())

    def __post_init__(self):
        super().__post_init__()
        dps = tuple(tuple(sorted((as_fraction(a), as_fraction(b)))) for a, b in self.double_points)
        object.__setattr__(self, "double_points", dps)
        for ta, tb in dps:
            if ta == tb:
                raise KnotError("a double point needs two distinct parameters")
            if exact_eval(self, ta) != exact_eval(self, tb):
                raise KnotError(f"f({ta}) != f({tb})")
            for t in (ta, tb):
                if t in self.params:
                    raise KnotError("double points must lie inside segments")
            ua, ub = self.tangent(ta), self.tangent(tb)
            if np.linalg.matrix_rank(np.vstack([ua, ub]), tol=1e-12) < 2:
                raise KnotError("double point is not transverse")
        expected = sorted(tuple(int(segment_index(self, float(t))) + 1 for t in dp) for dp in dps)
        found = sorted(intersecting_segment_pairs(self))
        if found != expected:
            raise KnotError(f"self-intersections {found} do not match the listed double points")

    def tangent(self, t) -> np.ndarray:
        k = segment_index(self, float(t))
        d = self.P[k + 1] - self.P[k]
        return d / np.linalg.norm(d)

    def embedded_part(self) -> LongKnotPL:
        return LongKnotPL(self.params, self.points, self.name)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["kind"] = "immersed"
        d["double_points"] = [[fraction_str(a), fraction_str(b)] for a, b in self.double_points]
        return d


def knot_from_dict(d: dict) -> LongKnotPL:
    if int(d.get("version", 1)) != KNOT_JSON_VERSION:
        raise KnotError(f"unsupported knot JSON version {d.get('version')}")
    verts = [[as_fraction(x) if not isinstance(x, str) else Fraction(x) for x in v]
             for v in d["vertices"]]
    n = int(d["ambient_dim"])
    if any(len(v) != n + 1 for v in verts):
        raise KnotError("vertex rows must have ambient_dim + 1 entries")
    params = tuple(v[0] for v in verts)
    points = tuple(tuple(v[1:]) for v in verts)
    name = d.get("name", "")
    if d.get("kind", "embedded") == "immersed":
        dps = tuple((Fraction(a) if isinstance(a, str) else as_fraction(a),
                     Fraction(b) if isinstance(b, str) else as_fraction(b))
                    for a, b in d.get("double_points", []))
        return ImmersedKnotPL(params, points, name, dps)
    return LongKnotPL(params, points, name)


# --- evaluation --------------------------------------------------------------

def eval_knot(f: LongKnotPL, t) -> np.ndarray:
    """Evaluate at a scalar or array of parameters; shape ``(..., n)``."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (f.ambient_dim,))
    for i in range(f.ambient_dim):
        out[..., i] = np.interp(t, f.ts, f.P[:, i])
    outside = (t <= f.ts[0]) | (t >= f.ts[-1])
    out[outside, 0] = t[outside]
    out[outside, 1:] = 0.0
    return out


def exact_eval(f: LongKnotPL, t) -> tuple[Fraction, ...]:
    t = as_fraction(t)
    n = f.ambient_dim
    if t <= f.params[0] or t >= f.params[-1]:
        return _standard_point(t, n)
    for k in range(f.num_segments):
        t0, t1 = f.params[k], f.params[k + 1]
        if t0 <= t <= t1:
            lam = (t - t0) / (t1 - t0)
            p0, p1 = f.points[k], f.points[k + 1]
            return tuple(a + lam * (b - a) for a, b in zip(p0, p1))
    raise AssertionError("unreachable")


def segment_index(f: LongKnotPL, t) -> np.ndarray:
    """Index k of the segment [t_k, t_{k+1}] containing t (clipped)."""
    k = np.searchsorted(f.ts, t, side="right") - 1
    return np.clip(k, 0, f.num_segments - 1)


def tail_extent(f: LongKnotPL) -> Fraction:
    return max(Fraction(2), max(abs(x) for p in f.points for x in p) + 1)


def exact_segments(f: LongKnotPL) -> list[tuple[tuple[Fraction, ...], tuple[Fraction, ...]]]:
    """Segments in parameter order, tails truncated far outside the body."""
    n = f.ambient_dim
    X = tail_extent(f)
    segs = [(_standard_point(-X, n), f.points[0])]
    segs += list(zip(f.points[:-1], f.points[1:]))
    segs.append((f.points[-1], _standard_point(X, n)))
    return segs


def float_segments(f: LongKnotPL) -> tuple[np.ndarray, np.ndarray]:
    segs = exact_segments(f)
    A = np.array([[float(x) for x in a] for a, _ in segs])
    B = np.array([[float(x) for x in b] for _, b in segs])
    return A, B


# --- segment distances -------------------------------------------------------

def segment_distances(A0, A1, B0, B1) -> np.ndarray:
    """Vectorised minimum distance between segments [A0, A1] and [B0, B1]."""
    d1 = A1 - A0
    d2 = B1 - B0
    r = A0 - B0
    a = np.einsum("...i,...i", d1, d1)
    e = np.einsum("...i,...i", d2, d2)
    b = np.einsum("...i,...i", d1, d2)
    c = np.einsum("...i,...i", d1, r)
    f = np.einsum("...i,...i", d2, r)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300, (b * f - c * e) / denom, 0.0)
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(e > 1e-300, (b * s + f) / e, 0.0)
    # re-clamp u and recompute s when u leaves [0, 1]
    u_cl = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(u != u_cl, np.clip(np.where(a > 1e-300, (b * u_cl - c) / a, 0.0), 0, 1), s)
    u = u_cl
    diff = (A0 + s[..., None] * d1) - (B0 + u[..., None] * d2)
    return np.sqrt(np.einsum("...i,...i", diff, diff))


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _point_segment_dist2(x, p0, p1) -> Fraction:
    d = _sub(p1, p0)
    dd = _dot(d, d)
    lam = _dot(_sub(x, p0), d) / dd
    lam = min(max(lam, Fraction(0)), Fraction(1))
    q = tuple(a + lam * b for a, b in zip(p0, d))
    w = _sub(x, q)
    return _dot(w, w)


def exact_segment_dist2(p0, p1, q0, q1) -> Fraction:
    """Exact squared distance between two segments with rational endpoints."""
    d1, d2, r = _sub(p1, p0), _sub(q1, q0), _sub(p0, q0)
    a, e, b = _dot(d1, d1), _dot(d2, d2), _dot(d1, d2)
    c, f = _dot(d1, r), _dot(d2, r)
    cands = [_point_segment_dist2(p0, q0, q1), _point_segment_dist2(p1, q0, q1),
             _point_segment_dist2(q0, p0, p1), _point_segment_dist2(q1, p0, p1)]
    denom = a * e - b * b
    if denom != 0:
        s = (b * f - c * e) / denom
        u = (a * f - b * c) / denom
        if 0 <= s <= 1 and 0 <= u <= 1:
            w = tuple(p + s * x - q - u * y for p, x, q, y in zip(p0, d1, q0, d2))
            cands.append(_dot(w, w))
    return min(cands)


def _adjacent_fold(p, q, r) -> bool:
    """True if segments [p, q] and [q, r] overlap beyond their common vertex."""
    u, v = _sub(q, p), _sub(r, q)
    n = len(u)
    collinear = all(u[i] * v[k] == u[k] * v[i] for i in range(n) for k in range(i + 1, n))
    return collinear and _dot(u, v) < 0


def intersecting_segment_pairs(f: LongKnotPL, tol: float = 1e-9) -> list[tuple[int, int]]:
    """All non-adjacent segment pairs that meet, decided exactly.

    A float distance above ``tol`` certifies disjointness (coordinates are
    bounded, so rounding error is many orders of magnitude smaller); the
    remaining pairs are settled in rational arithmetic.
    """
    segs = exact_segments(f)
    A, B = float_segments(f)
    m = len(segs)
    I, J = np.triu_indices(m, k=2)
    dist = segment_distances(A[I], B[I], A[J], B[J])
    hits = []
    for i, j in zip(I[dist <= tol], J[dist <= tol]):
        (p0, p1), (q0, q1) = segs[i], segs[j]
        if exact_segment_dist2(p0, p1, q0, q1) == 0:
            hits.append((int(i), int(j)))
    for i in range(m - 1):
        if _adjacent_fold(segs[i][0], segs[i][1], segs[i + 1][1]):
            hits.append((i, i + 1))
    return hits


def is_embedding_pl(f: LongKnotPL) -> bool:
    """Exact injectivity certificate for a PL long knot."""
    return not intersecting_segment_pairs(f)


def injectivity_proxy(domain_pts: np.ndarray, image_pts: np.ndarray,
                      delta: float, eps: float) -> bool:
    """No two samples at domain distance >= delta land within eps."""
    tree = cKDTree(image_pts)
    pairs = tree.query_pairs(eps, output_type="ndarray")
    if len(pairs) == 0:
        return True
    dd = np.linalg.norm(domain_pts[pairs[:, 0]] - domain_pts[pairs[:, 1]], axis=1)
    return bool(np.all(dd < delta))


def is_embedding_sampled(f, samples: int = 512, delta: float | None = None,
                         eps: float | None = None) -> bool:
    """Numerical injectivity check.

    PL knots also get the exact segment test; tube embeddings are checked on
    a ``samples x 8 x 8`` grid of the solid tube.
    """
    from .tubes import TubeEmbedding, default_tube_eps, tube_sample_grid

    if delta is None:
        delta = 2.0 / samples
    if isinstance(f, TubeEmbedding):
        dom = tube_sample_grid(f.j, f.k, samples, 8)
        if eps is None:
            eps = default_tube_eps(f)
        return injectivity_proxy(dom, f(dom), delta, eps)
    if isinstance(f, ImmersedKnotPL) and f.double_points:
        return False
    if eps is None:
        r = reach_estimate(f)
        eps = 1e-3 if math.isinf(r) else r / 100
    t = np.linspace(-1.25, 1.25, samples)
    ok = injectivity_proxy(t[:, None], eval_knot(f, t), delta, eps)
    return ok and is_embedding_pl(f)


# --- reach -------------------------------------------------------------------

def straight_pieces(f: LongKnotPL) -> tuple[np.ndarray, np.ndarray]:
    """Maximal straight pieces of the polygon (tails included, truncated)."""
    A, B = float_segments(f)
    starts, ends = [A[0]], [B[0]]
    for a, b in zip(A[1:], B[1:]):
        d_prev = ends[-1] - starts[-1]
        d = b - a
        cross = np.linalg.norm(np.outer(d_prev, d) - np.outer(d, d_prev))
        if cross <= 1e-14 * np.linalg.norm(d_prev) * np.linalg.norm(d) and d_prev @ d > 0:
            ends[-1] = b
        else:
            starts.append(a)
            ends.append(b)
    return np.array(starts), np.array(ends)


def reach_estimate(f: LongKnotPL) -> float:
    """PL surrogate for the cut radius.

    Minimum of the distances between non-adjacent straight pieces and of the
    local feature size ``min(len_in, len_out) / (2 tan(angle / 2))`` at each
    corner.  ``inf`` for the standard line.
    """
    segs = exact_segments(f)
    for a, b in segs:
        if a == b:
            raise KnotError("zero-length segment")
    S, E = straight_pieces(f)
    m = len(S)
    best = math.inf
    if m >= 3:
        I, J = np.triu_indices(m, k=2)
        best = float(segment_distances(S[I], E[I], S[J], E[J]).min())
    for k in range(1, m):
        d_in, d_out = E[k - 1] - S[k - 1], E[k] - S[k]
        l_in, l_out = np.linalg.norm(d_in), np.linalg.norm(d_out)
        cosang = np.clip(d_in @ d_out / (l_in * l_out), -1.0, 1.0)
        ang = math.acos(cosang)
        if ang > 0:
            best = min(best, min(l_in, l_out) / (2 * math.tan(ang / 2)))
    return best


# --- constructions -----------------------------------------------------------

def knot_from_arrays(params: Sequence, points: np.ndarray | Sequence, name: str = "",
                     denominator: int | None = None) -> LongKnotPL:
    """Build a knot from float data, optionally rounding to a dyadic grid."""
    def conv(x):
        if denominator is None:
            return as_fraction(float(x)) if not isinstance(x, Fraction) else x
        return Fraction(round(float(x) * denominator), denominator)

    ps = tuple(conv(t) for t in params)
    pts = [tuple(conv(x) for x in p) for p in np.asarray(points, dtype=object)]
    n = len(pts[0])
    pts[0] = _standard_point(ps[0], n)
    pts[-1] = _standard_point(ps[-1], n)
    return LongKnotPL(ps, tuple(pts), name)


def perturb(f: LongKnotPL, seed: int, magnitude: float) -> LongKnotPL:
    """Move every interior vertex by at most ``magnitude`` (seeded)."""
    magnitude = float(magnitude)
    if magnitude == 0:
        return f
    if magnitude < 0:
        raise KnotError("magnitude must be non-negative")
    r = reach_estimate(f)
    if magnitude >= r / 10:
        raise KnotError(f"perturbation {magnitude} is not below reach/10 = {r / 10}")
    rng = np.random.default_rng(seed)
    m, n = len(f.points), f.ambient_dim
    dirs = rng.normal(size=(m, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = magnitude * rng.uniform(0.0, 1.0, size=m)
    pts = list(f.points)
    for k in range(1, m - 1):
        disp = dirs[k] * radii[k]
        pts[k] = tuple(x + Fraction(float(dx)) for x, dx in zip(pts[k], disp))
    return LongKnotPL(f.params, tuple(pts), f.name)


def mirror(f: LongKnotPL) -> LongKnotPL:
    """Reflect the last ambient coordinate."""
    pts = tuple(p[:-1] + (-p[-1],) for p in f.points)
    if isinstance(f, ImmersedKnotPL):
        return ImmersedKnotPL(f.params, pts, f.name + "_mirror", f.double_points)
    return LongKnotPL(f.params, pts, f.name + "_mirror" if f.name else "")


def push_into(f: LongKnotPL, n: int) -> LongKnotPL:
    """Include R^m into R^n by padding zeros."""
    pad = (Fraction(0),) * (n - f.ambient_dim)
    pts = tuple(p + pad for p in f.points)
    if isinstance(f, ImmersedKnotPL):
        return ImmersedKnotPL(f.params, pts, f.name, f.double_points)
    return LongKnotPL(f.params, pts, f.name)


def refine(f: LongKnotPL, extra: Iterable) -> LongKnotPL:
    """Insert vertices at the given parameters without changing the map."""
    ts = sorted(set(f.params) | {as_fraction(t) for t in extra if f.params[0] < as_fraction(t) < f.params[-1]})
    pts = tuple(exact_eval(f, t) for t in ts)
    return LongKnotPL(tuple(ts), pts, f.name)


def sup_distance(f: LongKnotPL, g: LongKnotPL, samples: int = 1000) -> float:
    t = np.unique(np.concatenate([np.linspace(-1.1, 1.1, samples), f.ts, g.ts]))
    return float(np.max(np.linalg.norm(eval_knot(f, t) - eval_knot(g, t), axis=1)))

"""Graphing and spinning: loops of knots become knots one dimension up.

* ``gr1``: a based loop ``s -> f_s`` of long knots in R^n gives the long
  2-knot ``(s, t) -> (s, f_s(t))`` in R^{n+1}; ``gr_i`` iterates this over
  an i-parameter grid family.
* Litherland spinning wraps a free loop around the origin with the polar
  map ``P_2(t1, t2) = ((t2 + 2)/3 cos(pi t1), (t2 + 2)/3 sin(pi t1))``.
* The resolution family pushes apart the two double points of an immersed
  long knot; the null-homotopy family shrinks a knot away in R^{n+1}.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .geometry import AffineInc, CAutElement, DimensionError, as_fraction
from .knots import (ImmersedKnotPL, KnotError, LongKnotPL, eval_knot, exact_eval,
                    float_segments, injectivity_proxy, is_embedding_pl, knot_from_dict,
                    push_into, reach_estimate, segment_distances, segment_index)
from .operad import CubeConfig, height_permutation
from .profiles import bump, smoothing_profiles, wet_blanket  # noqa: F401  (re-exported)
from .tubes import TubeEmbedding

DEFAULT_CAP = 4_000_000


class LoopError(ValueError):
    pass


# --- families of long knots ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridFamily:
    """Knots on a product grid in ``[-1, 1]^i``, multilinear in between.

    ``knots`` is a nested list indexed like the grid.  Outside the grid box
    the family is constant at ``base``.
    """

    axes: tuple[np.ndarray, ...]
    knots: object
    base: LongKnotPL

    @property
    def order(self) -> int:
        return len(self.axes)

    @property
    def ambient_dim(self) -> int:
        return self.base.ambient_dim

    def knot_at(self, idx: Sequence[int]) -> LongKnotPL:
        node = self.knots
        for i in idx:
            node = node[i]
        return node

    def all_indices(self):
        return itertools.product(*(range(len(a)) for a in self.axes))

    def boundary_indices(self):
        for idx in self.all_indices():
            if any(i in (0, len(a) - 1) for i, a in zip(idx, self.axes)):
                yield idx

    def is_based(self) -> bool:
        return all(self.knot_at(idx).same_map(self.base) for idx in self.boundary_indices())

    def evaluate(self, S: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Values ``F(s)(t)`` for rows ``s`` of ``S`` and matching ``t``."""
        S = np.atleast_2d(np.asarray(S, dtype=float))
        t = np.asarray(t, dtype=float)
        N = len(t)
        out = np.zeros((N, self.ambient_dim))
        outside = np.zeros(N, dtype=bool)
        cells, weights = [], []
        for a, col in zip(self.axes, S.T):
            outside |= (col < a[0]) | (col > a[-1])
            c = np.clip(np.searchsorted(a, col, side="right") - 1, 0, len(a) - 2)
            lam = np.clip((col - a[c]) / (a[c + 1] - a[c]), 0.0, 1.0)
            cells.append(c)
            weights.append(lam)
        inside = ~outside
        if np.any(outside):
            out[outside] = eval_knot(self.base, t[outside])
        if not np.any(inside):
            return out
        rows = np.nonzero(inside)[0]
        tin = t[rows]
        vals = {}
        for corner in itertools.product((0, 1), repeat=self.order):
            keys = np.stack([c[rows] + bit for bit, c in zip(corner, cells)], -1)
            V = np.zeros((len(rows), self.ambient_dim))
            uniq, inv = np.unique(keys, axis=0, return_inverse=True)
            inv = np.asarray(inv).ravel()
            for u_i, key in enumerate(uniq):
                r = inv == u_i
                V[r] = eval_knot(self.knot_at(tuple(key)), tin[r])
            vals[corner] = V
        # nested lerps a + lam (b - a) keep equal corner values exact
        for axis in reversed(range(self.order)):
            lam = weights[axis][rows][:, None]
            vals = {c[:axis]: vals[c[:axis] + (0,)] + lam * (vals[c[:axis] + (1,)] - vals[c[:axis] + (0,)])
                    for c in vals if len(c) == axis + 1}
        out[rows] = vals[()]
        return out


class KnotLoop(GridFamily):
    """A loop of long knots sampled at ``s_0 = -1 < ... < s_q = 1``."""

    def __init__(self, entries: Sequence[tuple[float, LongKnotPL]], base: LongKnotPL | None = None):
        entries = sorted(((float(s), f) for s, f in entries), key=lambda e: e[0])
        ss = np.array([s for s, _ in entries])
        if len(ss) < 2 or ss[0] != -1.0 or ss[-1] != 1.0 or np.any(np.diff(ss) <= 0):
            raise LoopError("loop samples must increase strictly from -1 to 1")
        dims = {f.ambient_dim for _, f in entries}
        if len(dims) != 1:
            raise LoopError("loop entries must share the ambient dimension")
        knots = [f for _, f in entries]
        super().__init__((ss,), knots, base if base is not None else knots[0])

    @property
    def entries(self):
        return list(zip(self.axes[0].tolist(), self.knots))

    def is_closed(self) -> bool:
        return self.knots[0].same_map(self.knots[-1])

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(),
                "entries": [[s, f.to_dict()] for s, f in self.entries]}

    @classmethod
    def from_dict(cls, d: dict) -> "KnotLoop":
        base = knot_from_dict(d["base"]) if d.get("base") else None
        return cls([(float(s), knot_from_dict(k)) for s, k in d["entries"]], base)


def constant_loop(f: LongKnotPL, samples: int = 3) -> KnotLoop:
    return KnotLoop([(s, f) for s in np.linspace(-1, 1, samples)], f)


def _rotate_about_axis(f: LongKnotPL, angle: float) -> LongKnotPL:
    if f.ambient_dim < 3:
        raise DimensionError("rotation about the first axis needs n >= 3")
    c, s = math.cos(angle), math.sin(angle)
    pts = []
    for p in f.points:
        y, z = float(p[1]), float(p[2])
        pts.append((p[0], Fraction(c * y - s * z), Fraction(s * y + c * z)) + tuple(p[3:]))
    pts[0], pts[-1] = f.points[0], f.points[-1]
    return LongKnotPL(f.params, tuple(pts), f.name)


def gramain_loop(f: LongKnotPL, samples: int = 33) -> KnotLoop:
    """Rotate ``f`` once about the first axis (based at ``f``)."""
    ss = np.linspace(-1, 1, samples)
    entries = [(s, _rotate_about_axis(f, math.pi * (s + 1))) for s in ss[1:-1]]
    return KnotLoop([(-1.0, f)] + entries + [(1.0, f)], f)


# --- spun knots -------------------------------------------------------------------

@dataclass
class SpunKnotSampled:
    """A long knot R^j -> R^m given by a pointwise evaluator plus a sample grid."""

    domain_dim: int
    ambient_dim: int
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    grid: np.ndarray = field(repr=False)
    images: np.ndarray = field(repr=False)
    standard_outside: bool
    injective: bool | None = None
    source: object = field(default=None, repr=False)
    meta: dict = field(default_factory=dict)

    def __call__(self, T):
        return self.evaluate(np.atleast_2d(np.asarray(T, dtype=float)))

    def to_dict(self) -> dict:
        return {"domain_dim": self.domain_dim, "ambient_dim": self.ambient_dim,
                "standard_outside": self.standard_outside, "injective": self.injective,
                "grid": self.grid.tolist(), "images": self.images.tolist(), "meta": self.meta}

    def standard_deviation_outside(self, extent: float = 1.25) -> float:
        """Largest distance from the standard inclusion on sampled points outside I^j."""
        mask = np.any(np.abs(self.grid) > 1, axis=1)
        if not np.any(mask):
            return 0.0
        std = np.zeros((mask.sum(), self.ambient_dim))
        std[:, :self.domain_dim] = self.grid[mask]
        return float(np.abs(self.images[mask] - std).max())


def _grid(dim: int, samples: int, extent: float) -> np.ndarray:
    ax = np.linspace(-extent, extent, samples)
    return np.array(list(itertools.product(*([ax] * dim))))


def _default_eps(f: LongKnotPL) -> float:
    r = reach_estimate(f)
    return 1e-3 if math.isinf(r) else r / 100


def gr_i(family: GridFamily, i: int | None = None, samples: int = 64, extent: float = 1.25,
         cap: int = DEFAULT_CAP, check: bool = True, eps: float | None = None,
         require_based: bool = True) -> SpunKnotSampled:
    """``(s_1..s_i, t) -> (s_1..s_i, F(s)(t))``: R^{i+1} -> R^{n+i}."""
    order = family.order
    if i is not None and i != order:
        raise DimensionError(f"family has {order} parameters, asked for gr_{i}")
    if samples ** (order + 1) > cap:
        raise DimensionError(f"{samples}^{order + 1} samples exceed the cap {cap}")
    if require_based and not family.is_based():
        raise LoopError("family is not based: boundary entries differ from the base knot")
    n = family.ambient_dim

    def evaluate(T):
        T = np.atleast_2d(T)
        out = np.zeros((len(T), n + order))
        out[:, :order] = T[:, :order]
        out[:, order:] = family.evaluate(T[:, :order], T[:, order])
        return out

    grid = _grid(order + 1, samples, extent)
    images = evaluate(grid)
    standard = family.base.support() is None
    spun = SpunKnotSampled(order + 1, n + order, evaluate, grid, images, standard, source=family,
                           meta={"method": f"gr{order}", "samples": samples})
    if check:
        delta = 2.0 / samples
        spun.injective = injectivity_proxy(grid, images, delta,
                                           eps if eps is not None else _default_eps(family.base))
    return spun


def gr1_loop(loop: KnotLoop, samples: int = 64, extent: float = 1.25, check: bool = True,
             eps: float | None = None) -> SpunKnotSampled:
    """Graph of a based loop; ``standard_outside`` is False unless the base is trivial."""
    return gr_i(loop, 1, samples, extent, check=check, eps=eps)


def nested_family(fn: Callable[..., LongKnotPL], axes: Sequence[np.ndarray], base: LongKnotPL) -> GridFamily:
    """Tabulate ``fn(s_1, ..., s_i)`` on a product grid."""
    axes = tuple(np.asarray(a, dtype=float) for a in axes)

    def build(prefix, rest):
        if not rest:
            return fn(*prefix)
        return [build(prefix + (s,), rest[1:]) for s in rest[0]]

    return GridFamily(axes, build((), axes), base)


# --- loops of tube embeddings and gr1 on tubes ----------------------------------------

class TubeLoop:
    """A based loop ``s -> E_s`` in EC(j, D^k); identity for ``|s| >= 1``."""

    j: int
    k: int

    def eval(self, s: np.ndarray, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class SampledTubeLoop(TubeLoop):
    def __init__(self, entries: Sequence[tuple[float, TubeEmbedding]], check_based: bool = True):
        entries = sorted(entries, key=lambda e: e[0])
        self.s = np.array([float(s) for s, _ in entries])
        self.tubes = [E for _, E in entries]
        if self.s[0] != -1.0 or self.s[-1] != 1.0 or np.any(np.diff(self.s) <= 0):
            raise LoopError("loop samples must increase strictly from -1 to 1")
        self.j, self.k = self.tubes[0].j, self.tubes[0].k
        if any((E.j, E.k) != (self.j, self.k) for E in self.tubes):
            raise LoopError("loop entries must share (j, k)")
        if check_based:
            from .tubes import random_tube_points

            X = random_tube_points(self.j, self.k, 200, seed=0)
            for E in (self.tubes[0], self.tubes[-1]):
                if np.abs(E(X) - X).max() > 1e-12:
                    raise LoopError("loop of tubes is not based at the identity")

    def eval(self, s, X):
        s = np.asarray(s, dtype=float)
        out = X.copy()
        inside = (s > -1) & (s < 1)
        if not np.any(inside):
            return out
        c = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2)
        lam = (s - self.s[c]) / (self.s[c + 1] - self.s[c])
        for cell in np.unique(c[inside]):
            r = inside & (c == cell)
            Xr = X[r]
            out[r] = ((1 - lam[r])[:, None] * self.tubes[cell]._eval(Xr)
                      + lam[r][:, None] * self.tubes[cell + 1]._eval(Xr))
        return out


class ReparamLoop(TubeLoop):
    """``s -> loop(alpha^{-1}(s))``, the identity outside ``alpha(I)``."""

    def __init__(self, alpha: AffineInc, loop: TubeLoop):
        self.alpha, self.loop = alpha, loop
        self.j, self.k = loop.j, loop.k

    def eval(self, s, X):
        a, b = float(self.alpha.a), float(self.alpha.b)
        return self.loop.eval((np.asarray(s, dtype=float) - b) / a, X)


class KappaLoop(TubeLoop):
    """The action of (j+2)-cubes on based loops in EC(j, D^k).

    A cube ``L = alpha x beta`` reparametrises the loop by ``alpha`` and acts
    on its values by the overlap action of ``beta``; at each ``s`` the pieces
    are composed in height order of the last factor, lowest outermost.
    """

    def __init__(self, c: CubeConfig, loops: Sequence[TubeLoop], k: int | None = None):
        if c.arity != len(loops):
            raise LoopError(f"{c.arity} cubes but {len(loops)} loops")
        self.c, self.loops = c, list(loops)
        self.j = c.dim - 2
        self.k = loops[0].k if loops else k
        if self.k is None:
            raise ValueError("pass k for the nullary action")
        for lp in self.loops:
            if (lp.j, lp.k) != (self.j, self.k):
                raise DimensionError("loop type does not match the cube dimension")
        self.order = height_permutation(c)
        self._alpha = [(float(L.factors[0].a), float(L.factors[0].b)) for L in c.cubes]
        self._beta = [CAutElement(L.factors[1:-1]).as_float_arrays() for L in c.cubes]

    def eval(self, s, X):
        s = np.asarray(s, dtype=float)
        Y = X.copy()
        for i in reversed(self.order):
            a0, b0 = self._alpha[i]
            si = (s - b0) / a0
            ba, bb = self._beta[i]
            mask = (si > -1) & (si < 1)
            for d in range(self.j):
                mask &= (Y[:, d] > bb[d] - ba[d]) & (Y[:, d] < bb[d] + ba[d])
            if not np.any(mask):
                continue
            Z = Y[mask].copy()
            Z[:, :self.j] = (Z[:, :self.j] - bb) / ba
            W = self.loops[i].eval(si[mask], Z)
            W[:, :self.j] = W[:, :self.j] * ba + bb
            Y[mask] = W
        return Y


class GraphTube(TubeEmbedding):
    """``(s, x) -> (s, E_s(x))``: gr1 of a loop of tube embeddings."""

    def __init__(self, loop: TubeLoop):
        self.loop = loop
        self.j, self.k = loop.j + 1, loop.k

    def _eval(self, X):
        out = X.copy()
        out[:, 1:] = self.loop.eval(X[:, 0], X[:, 1:])
        return out

    def to_dict(self):
        return {"type": "graph", "j": self.j, "k": self.k}


def gr1_tube(loop: TubeLoop) -> TubeEmbedding:
    return GraphTube(loop)


# --- Litherland spinning --------------------------------------------------------------

def P2(t1, t2):
    """``((t2 + 2)/3 cos(pi t1), (t2 + 2)/3 sin(pi t1))``."""
    t1, t2 = np.asarray(t1, dtype=float), np.asarray(t2, dtype=float)
    r = (t2 + 2) / 3
    return np.stack([r * np.cos(np.pi * t1), r * np.sin(np.pi * t1)], -1)


def P2_inverse(y):
    y = np.atleast_2d(np.asarray(y, dtype=float))
    r = np.hypot(y[:, 0], y[:, 1])
    return np.arctan2(y[:, 1], y[:, 0]) / np.pi, 3 * r - 2


def litherland_spin(loop: KnotLoop, samples: int = 64, extent: float = 1.2,
                    check: bool = True, eps: float | None = None) -> SpunKnotSampled:
    """Deform-spin a closed loop of long knots in R^n into a long 2-knot in R^{n+1}."""
    if not loop.is_closed():
        raise LoopError("Litherland spinning needs a closed loop (first entry = last entry)")
    n = loop.ambient_dim

    def evaluate(Y):
        Y = np.atleast_2d(Y)
        out = np.zeros((len(Y), n + 1))
        out[:, :2] = Y[:, :2]
        r = np.hypot(Y[:, 0], Y[:, 1])
        ann = (r > 1 / 3) & (r < 1)
        if np.any(ann):
            t1, t2 = P2_inverse(Y[ann])
            x = loop.evaluate(t1[:, None], t2)
            out[ann, :2] = P2(t1, x[:, 0])
            out[ann, 2:] = x[:, 1:]
        return out

    grid = _grid(2, samples, extent)
    images = evaluate(grid)
    spun = SpunKnotSampled(2, n + 1, evaluate, grid, images, True, source=loop,
                           meta={"method": "litherland", "samples": samples})
    spun.meta["boundary_error"] = litherland_boundary_error(spun)
    spun.meta["seam_error"] = litherland_seam_error(spun)
    if check:
        spun.injective = injectivity_proxy(grid, images, 2.0 / samples,
                                           eps if eps is not None else _default_eps(loop.base))
    return spun


def litherland_boundary_error(spun: SpunKnotSampled, count: int = 720) -> float:
    """Deviation from the standard inclusion on the two boundary circles."""
    ang = np.linspace(-np.pi, np.pi, count, endpoint=False)
    err = 0.0
    for r in (1 / 3, 1.0):
        Y = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
        P = _inside_limit(spun, Y, r)
        err = max(err, float(np.abs(P[:, :2] - Y).max()), float(np.abs(P[:, 2:]).max()))
    return err


def _inside_limit(spun, Y, r):
    # evaluate the annulus formula itself at the boundary radius
    loop = spun.source
    t1, t2 = P2_inverse(Y)
    t2 = np.full_like(t2, 3 * r - 2)
    x = loop.evaluate(t1[:, None], t2)
    out = np.zeros((len(Y), spun.ambient_dim))
    out[:, :2] = P2(t1, x[:, 0])
    out[:, 2:] = x[:, 1:]
    return out


def litherland_seam_error(spun: SpunKnotSampled, count: int = 200, gap: float = 1e-12) -> float:
    """Two-sided limits across the negative first axis (``t1 = +-1``)."""
    r = np.linspace(1 / 3 + 1e-6, 1 - 1e-6, count)
    a = np.pi - gap
    above = np.column_stack([r * np.cos(a), r * np.sin(a)])
    below = np.column_stack([r * np.cos(-a), r * np.sin(-a)])
    return float(np.abs(spun(above) - spun(below)).max())


# --- resolutions of a doubly immersed knot ----------------------------------------------

def normal_plane_basis(g: ImmersedKnotPL, which: int) -> np.ndarray:
    """Orthonormal basis (rows) of the complement of both tangents at a double point."""
    ta, tb = g.double_points[which]
    T = np.vstack([g.tangent(ta), g.tangent(tb)])
    _, _, Vt = np.linalg.svd(T)
    B = Vt[2:]
    if g.ambient_dim == 3:
        n = np.cross(T[0], T[1])
        return (n / np.linalg.norm(n))[None, :]
    if g.ambient_dim >= 4 and np.allclose(T[:, 3:], 0):
        n = np.zeros(g.ambient_dim)
        n[:3] = np.cross(T[0, :3], T[1, :3])
        n /= np.linalg.norm(n)
        rest = [np.eye(g.ambient_dim)[i] for i in range(3, g.ambient_dim)]
        return np.vstack([n] + rest)
    return B


def resolution_height(g: ImmersedKnotPL) -> float:
    """A quarter of the cut radius of ``g`` away from its double points."""
    A, B = float_segments(g)
    m = len(A)
    excluded = {tuple(sorted((int(segment_index(g, float(ta))) + 1, int(segment_index(g, float(tb))) + 1)))
                for ta, tb in g.double_points}
    I, J = np.triu_indices(m, k=2)
    keep = np.array([(i, j) not in excluded for i, j in zip(I, J)])
    d = segment_distances(A[I[keep]], B[I[keep]], A[J[keep]], B[J[keep]]).min()
    lfs = math.inf
    D = B - A
    for k in range(1, m):
        u, v = D[k - 1], D[k]
        nu, nv = np.linalg.norm(u), np.linalg.norm(v)
        ang = math.acos(float(np.clip(u @ v / (nu * nv), -1, 1)))
        if ang > 1e-12:
            lfs = min(lfs, min(nu, nv) / (2 * math.tan(ang / 2)))
    return float(min(d, lfs)) / 4


def resolution_family(g: ImmersedKnotPL, v1, v2, height: float | None = None,
                      validate: bool = True, tol: float = 1e-9) -> LongKnotPL:
    """Push the earlier strand at each double point by a tent of height ``h v_i``.

    The tent has half-width a quarter of the edge carrying the double point;
    ``v_i`` must be a unit vector orthogonal to both tangents there.
    """
    if len(g.double_points) != 2:
        raise KnotError("resolution_family needs exactly two double points")
    h = resolution_height(g) if height is None else float(height)
    params, pts = list(g.params), list(g.points)
    for (ta, tb), v in zip(g.double_points, (v1, v2)):
        v = np.asarray(v, dtype=float)
        if v.shape != (g.ambient_dim,) or abs(np.linalg.norm(v) - 1) > tol:
            raise ValueError("resolution directions must be unit vectors in R^n")
        if abs(v @ g.tangent(ta)) > tol or abs(v @ g.tangent(tb)) > tol:
            raise ValueError("resolution direction is not orthogonal to both tangents")
        k = int(segment_index(g, float(ta)))
        w = (g.params[k + 1] - g.params[k]) / 4
        for t, amp in ((ta - w, 0.0), (ta, h), (ta + w, 0.0)):
            p = exact_eval(g, t)
            p = tuple(x + Fraction(float(amp * vi)) for x, vi in zip(p, v))
            pos = sum(1 for q in params if q < t)
            params.insert(pos, t)
            pts.insert(pos, p)
    f = LongKnotPL(tuple(params), tuple(pts), g.name + "_resolved")
    if validate and not is_embedding_pl(f):
        raise KnotError("resolution is not embedded (degenerate direction)")
    return f


def jitter_immersed(g: ImmersedKnotPL, seed: int = 0, magnitude: float | None = None,
                    denominator: int = 2 ** 24) -> ImmersedKnotPL:
    """Move every vertex not on a double-point segment by a seeded amount.

    The double points stay exact; the rest of the curve becomes generic.
    The default magnitude is a tenth of :func:`resolution_height`.
    """
    mag = resolution_height(g) / 10 if magnitude is None else float(magnitude)
    fixed = {0, 1, len(g.params) - 2, len(g.params) - 1}
    for dp in g.double_points:
        for t in dp:
            k = int(segment_index(g, float(t)))
            fixed |= {k, k + 1}
    rng = np.random.default_rng(seed)
    pts = []
    for i, p in enumerate(g.points):
        d = rng.uniform(-mag, mag, size=len(p))
        if i in fixed:
            pts.append(p)
        else:
            pts.append(tuple(x + Fraction(round(float(v) * denominator), denominator) for x, v in zip(p, d)))
    return ImmersedKnotPL(g.params, tuple(pts), g.name + "_jittered", double_points=g.double_points)


def axis_resolutions(g: ImmersedKnotPL, height: float | None = None) -> dict:
    """The four resolutions ``(+-n_1, +-n_2)`` of a knot in R^3."""
    if g.ambient_dim != 3:
        raise DimensionError("axis resolutions are defined in R^3")
    n1 = normal_plane_basis(g, 0)[0]
    n2 = normal_plane_basis(g, 1)[0]
    return {(e1, e2): resolution_family(g, e1 * n1, e2 * n2, height)
            for e1 in (1, -1) for e2 in (1, -1)}


class TorusResolutions:
    """``(theta1, theta2) -> r(cos th1 n1 + sin th1 e, cos th2 n2 + sin th2 e)`` in R^4."""

    def __init__(self, g: ImmersedKnotPL, height: float | None = None):
        if g.ambient_dim == 3:
            g = push_into(g, 4)
        if g.ambient_dim != 4:
            raise DimensionError("the torus family lives in R^4")
        self.g = g
        self.h = resolution_height(g) if height is None else float(height)
        self.B1 = normal_plane_basis(g, 0)
        self.B2 = normal_plane_basis(g, 1)

    def directions(self, th1: float, th2: float):
        v1 = math.cos(th1) * self.B1[0] + math.sin(th1) * self.B1[1]
        v2 = math.cos(th2) * self.B2[0] + math.sin(th2) * self.B2[1]
        return v1, v2

    def __call__(self, th1: float, th2: float, validate: bool = False) -> LongKnotPL:
        v1, v2 = self.directions(th1, th2)
        return resolution_family(self.g, v1, v2, self.h, validate=validate)

    knot = __call__

    def breakpoints(self) -> np.ndarray:
        """Parameters where some member of the family has a vertex."""
        pts = set(self.g.ts.tolist())
        for ta, _ in self.g.double_points:
            k = int(segment_index(self.g, float(ta)))
            w = float(self.g.params[k + 1] - self.g.params[k]) / 4
            pts |= {float(ta) - w, float(ta), float(ta) + w}
        return np.array(sorted(pts))

    def _tents(self, t):
        out = []
        for ta, tb in self.g.double_points:
            k = int(segment_index(self.g, float(ta)))
            w = float(self.g.params[k + 1] - self.g.params[k]) / 4
            u = (t - float(ta)) / w
            tau = np.clip(1 - np.abs(u), 0, None)
            dtau = np.where(np.abs(u) < 1, -np.sign(u) / w, 0.0)
            out.append((tau, dtau))
        return out

    def evaluate(self, th1, th2, t):
        """Points of the family member ``(th1, th2)`` at parameters ``t``."""
        t = np.asarray(t, dtype=float)
        X = eval_knot(self.g, t)
        for (tau, _), th, B in zip(self._tents(t), (th1, th2), (self.B1, self.B2)):
            v = np.cos(th)[..., None] * B[0] + np.sin(th)[..., None] * B[1]
            X = X + self.h * tau[..., None] * v
        return X

    def derivatives(self, th1, th2, t):
        """``(d/dt, d/dth1, d/dth2)`` of :meth:`evaluate`."""
        t = np.asarray(t, dtype=float)
        dX = knot_velocity(self.g, t)
        dth = []
        for (tau, dtau), th, B in zip(self._tents(t), (th1, th2), (self.B1, self.B2)):
            v = np.cos(th)[..., None] * B[0] + np.sin(th)[..., None] * B[1]
            dv = -np.sin(th)[..., None] * B[0] + np.cos(th)[..., None] * B[1]
            dX = dX + self.h * dtau[..., None] * v
            dth.append(self.h * tau[..., None] * dv)
        return dX, dth[0], dth[1]


class ConstantFamily:
    """The constant two-parameter family at a knot in R^4."""

    def __init__(self, f: LongKnotPL):
        if f.ambient_dim == 3:
            f = push_into(f, 4)
        self.f = f

    def knot(self, th1, th2):
        return self.f

    def breakpoints(self) -> np.ndarray:
        return self.f.ts

    def evaluate(self, th1, th2, t):
        return eval_knot(self.f, np.asarray(t, dtype=float))

    def derivatives(self, th1, th2, t):
        t = np.asarray(t, dtype=float)
        z = np.zeros(t.shape + (4,))
        return knot_velocity(self.f, t), z, z


class JitteredFamily:
    """A torus family plus a small seeded smooth wobble in the last coordinate.

    The wobble is ``eps * sum_k c_k phi_k(th1, th2) psi_k(t)`` with
    ``psi_k`` supported in ``[-1, 1]``; projections to the first three
    coordinates are unchanged.
    """

    MODES = 3

    def __init__(self, fam, eps: float, seed: int = 0):
        self.fam, self.eps = fam, float(eps)
        rng = np.random.default_rng(seed)
        self.c = rng.normal(size=(self.MODES, 9))

    @staticmethod
    def _phi(th1, th2):
        c1, s1, c2, s2 = np.cos(th1), np.sin(th1), np.cos(th2), np.sin(th2)
        one = np.ones_like(th1)
        vals = [one, c1, s1, c2, s2, c1 * c2, c1 * s2, s1 * c2, s1 * s2]
        d1 = [0 * one, -s1, c1, 0 * one, 0 * one, -s1 * c2, -s1 * s2, c1 * c2, c1 * s2]
        d2 = [0 * one, 0 * one, 0 * one, -s2, c2, -c1 * s2, c1 * c2, -s1 * s2, s1 * c2]
        return np.stack(vals, -1), np.stack(d1, -1), np.stack(d2, -1)

    def _psi(self, t):
        inside = np.abs(t) < 1
        w = np.where(inside, (1 - t * t) ** 2, 0.0)
        dw = np.where(inside, -4 * t * (1 - t * t), 0.0)
        m = np.arange(1, self.MODES + 1)
        arg = m * np.pi * (t[..., None] + 1) / 2
        psi = w[..., None] * np.sin(arg)
        dpsi = dw[..., None] * np.sin(arg) + w[..., None] * np.cos(arg) * m * np.pi / 2
        return psi, dpsi

    def _wobble(self, th1, th2, t):
        ph, p1, p2 = self._phi(np.asarray(th1, float), np.asarray(th2, float))
        psi, dpsi = self._psi(np.asarray(t, float))
        A = ph @ self.c.T
        return (self.eps * np.sum(A * psi, -1), self.eps * np.sum(A * dpsi, -1),
                self.eps * np.sum((p1 @ self.c.T) * psi, -1), self.eps * np.sum((p2 @ self.c.T) * psi, -1))

    def evaluate(self, th1, th2, t):
        X = np.array(self.fam.evaluate(th1, th2, t), dtype=float)
        X[..., -1] += self._wobble(th1, th2, t)[0]
        return X

    def derivatives(self, th1, th2, t):
        dT, d1, d2 = (np.array(a, dtype=float) for a in self.fam.derivatives(th1, th2, t))
        _, wt, w1, w2 = self._wobble(th1, th2, t)
        dT[..., -1] += wt
        d1[..., -1] += w1
        d2[..., -1] += w2
        return dT, d1, d2

    def knot(self, th1, th2):
        """The unperturbed member (used for R^3 seeds, which the wobble does not move)."""
        return self.fam.knot(th1, th2)

    def breakpoints(self) -> np.ndarray:
        return self.fam.breakpoints()


def knot_velocity(f: LongKnotPL, t) -> np.ndarray:
    """Derivative of the PL map (right derivative at vertices)."""
    t = np.asarray(t, dtype=float)
    ts, P = f.ts, f.P
    k = np.searchsorted(ts, t, side="right") - 1
    out = np.zeros(t.shape + (f.ambient_dim,))
    out[..., 0] = 1.0
    inside = (k >= 0) & (k < len(ts) - 1)
    ki = k[inside]
    out[inside] = (P[ki + 1] - P[ki]) / (ts[ki + 1] - ts[ki])[:, None]
    return out


# --- the null-homotopy family ---------------------------------------------------------------

def j_shift(f: LongKnotPL, t) -> LongKnotPL:
    """``j_t(f)(x) = (f((1 + t^2) x - t^3) + (t^3, 0, ...)) / (1 + t^2)``, exactly."""
    t = as_fraction(t)
    q = 1 + t * t
    c = t ** 3
    params = tuple((s + c) / q for s in f.params)
    pts = tuple(((p[0] + c) / q,) + tuple(x / q for x in p[1:]) for p in f.points)
    return LongKnotPL(params, pts, f.name)


def null_homotopy_family(f: LongKnotPL, t, samples: int = 201) -> LongKnotPL:
    """The three-piece family ``F_t`` in R^{n+1}; ``F_0 = i(f)``, ``F_{+-1}`` standard.

    ``B(x) = (x, 0, ..., b(x))`` with ``b`` the bump and ``C`` the standard line.
    """
    t = as_fraction(t)
    if abs(t) > 1:
        raise ValueError("t must lie in [-1, 1]")
    n = f.ambient_dim
    at = abs(t)
    if at <= Fraction(1, 3):
        return push_into(j_shift(f, 3 * t), n + 1)
    sgn = 1 if t > 0 else -1
    jf = push_into(j_shift(f, sgn), n + 1)
    xs = np.union1d(np.linspace(-1, 1, samples), jf.ts)
    xs = xs[(xs >= -1) & (xs <= 1)]
    B = np.zeros((len(xs), n + 1))
    B[:, 0] = xs
    B[:, -1] = bump(xs)
    if at <= Fraction(2, 3):
        w1, w2 = 2 - 3 * at, 3 * at - 1
        Y = float(w1) * eval_knot(jf, xs) + float(w2) * B
    else:
        w1, w2 = 3 - 3 * at, 3 * at - 2
        C = np.zeros_like(B)
        C[:, 0] = xs
        Y = float(w1) * B + float(w2) * C
    params = [Fraction(float(x)) for x in xs]
    pts = [tuple(Fraction(float(v)) for v in row) for row in Y]
    zero = (Fraction(0),) * n
    pts[0] = (params[0],) + zero
    pts[-1] = (params[-1],) + zero
    if at == 1:
        return LongKnotPL((Fraction(-1), Fraction(1)), ((Fraction(-1),) + zero, (Fraction(1),) + zero))
    return LongKnotPL(tuple(params), tuple(pts), f.name).canonical()

"""Tube embeddings: compactly supported self-embeddings of R^j x D^k.

A :class:`TubeEmbedding` is an expression tree.  Leaves are closed-form
embeddings (the tube around a long knot, an axial twist, the graph of a
loop); inner nodes compose two embeddings or conjugate one by a cube.
Points are rows of an ``(N, j + k)`` array: the first ``j`` columns are the
long directions, the remaining ``k`` the disc coordinates.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import expm, logm

from .geometry import CAutElement, DimensionError, cube_compose
from .knots import (LongKnotPL, eval_knot, injectivity_proxy, knot_from_arrays,
                    reach_estimate)
from .profiles import peak_bump

_leaf_counter = itertools.count()


class TubeDomainError(ValueError):
    """A point outside the disc reached a leaf evaluator."""

    def __init__(self, leaf_id: str, count: int):
        super().__init__(f"leaf {leaf_id}: {count} point(s) outside R^j x D^k")
        self.leaf_id = leaf_id


class TubeEmbedding:
    """Base class for expression-tree nodes."""

    j: int
    k: int

    @property
    def dim(self) -> int:
        return self.j + self.k

    def support_box(self) -> list[tuple[float, float]]:
        return [(-1.0, 1.0)] * self.j

    def __call__(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.dim:
            raise DimensionError(f"expected points of dim {self.dim}, got {X2.shape[1]}")
        Y = self._eval(X2)
        return Y[0] if single else Y

    def _eval(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Parameters (first axis) where the core curve may have corners."""
        return []

    def leaves(self) -> list["TubeEmbedding"]:
        return [self]

    def to_dict(self) -> dict:
        raise NotImplementedError


def eval_tube(E: TubeEmbedding, x) -> np.ndarray:
    return E(x)


def _in_box(X: np.ndarray, box) -> np.ndarray:
    mask = np.ones(len(X), dtype=bool)
    for i, (lo, hi) in enumerate(box):
        mask &= (X[:, i] > lo) & (X[:, i] < hi)
    return mask


def _check_disc(X: np.ndarray, j: int, leaf_id: str, tol: float = 1e-12) -> None:
    r = np.linalg.norm(X[:, j:], axis=1)
    bad = r > 1 + tol
    if np.any(bad):
        raise TubeDomainError(leaf_id, int(bad.sum()))


class IdentityTube(TubeEmbedding):
    def __init__(self, j: int, k: int):
        self.j, self.k = int(j), int(k)

    def _eval(self, X):
        return X.copy()

    def support_box(self):
        return [(0.0, 0.0)] * self.j

    def to_dict(self):
        return {"type": "identity", "j": self.j, "k": self.k}


# --- the tube around a knot ---------------------------------------------------

def _rotation_apply(V, a, b, phi):
    """Rotate the columns of V (..., n, c) by phi in the plane (a, b)."""
    c, s = np.cos(phi)[..., None], np.sin(phi)[..., None]
    pa = np.einsum("...i,...ic->...c", a, V)
    pb = np.einsum("...i,...ic->...c", b, V)
    return (V + np.einsum("...i,...c->...ic", a, (c - 1) * pa - s * pb)
            + np.einsum("...i,...c->...ic", b, s * pa + (c - 1) * pb))


def _so_path(Q: np.ndarray):
    """A path sigma -> Q^sigma in SO(m) from the identity to Q."""
    m = Q.shape[0]
    if m == 1:
        return lambda sig: np.ones((np.size(sig), 1, 1))
    if m == 2:
        ang = math.atan2(Q[1, 0], Q[0, 0])
        def path(sig):
            sig = np.asarray(sig, dtype=float).ravel()
            c, s = np.cos(ang * sig), np.sin(ang * sig)
            return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        return path
    A = np.real(logm(Q))
    A = (A - A.T) / 2
    def path(sig):
        sig = np.asarray(sig, dtype=float).ravel()
        return np.stack([expm(s * A) for s in sig]) if len(sig) else np.zeros((0, m, m))
    return path


class KnotTube(TubeEmbedding):
    """``(t, v) -> f(t) + rho(t) F(t) v`` for a long knot ``f`` with straight collars.

    ``F`` is a rotation-minimising normal frame: transported rigidly along
    each edge, turned by half the corner angle on either side of a vertex so
    the disc at a vertex lies in the bisecting hyperplane.  On the outer half
    of each collar the radius grows to 1; on the right collar the frame is
    also rotated back to the standard one, so the map is the identity
    outside ``I x D^k``.
    """

    def __init__(self, knot: LongKnotPL, radius: float, leaf_id: str | None = None):
        if not has_collars(knot):
            raise ValueError("tube_from_knot needs straight collars at both ends; use with_collars")
        self.knot = knot
        self.radius = float(radius)
        self.j, self.k = 1, knot.ambient_dim - 1
        self.leaf_id = leaf_id or f"knot_tube#{next(_leaf_counter)}"
        self._prepare()

    def _prepare(self):
        P = self.knot.P
        n = P.shape[1]
        T = np.diff(P, axis=0)
        T /= np.linalg.norm(T, axis=1, keepdims=True)
        m = len(T)  # number of edges
        e1 = np.zeros(n)
        e1[0] = 1.0
        # corner data at vertex i between edge i-1 and edge i (edge -1, m are tails)
        Tin = np.vstack([e1, T])
        Tout = np.vstack([T, e1])
        a = Tin.copy()
        b = Tout - np.einsum("ij,ij->i", Tout, a)[:, None] * a
        nb = np.linalg.norm(b, axis=1)
        theta = np.arctan2(nb, np.einsum("ij,ij->i", Tin, Tout))
        flat = nb < 1e-14
        b[~flat] /= nb[~flat, None]
        b[flat] = 0.0
        theta[flat] = 0.0
        self._a, self._b, self._theta = a, b, theta
        frames = np.zeros((m, n, n - 1))
        F = np.eye(n)[:, 1:]
        for i in range(m):
            F = _rotation_apply(F, a[i], b[i], np.array(theta[i]))
            frames[i] = F
        self._frames = frames
        # the right collar frame has a zero first row; rotate its normal block back to I
        self._seam = _so_path(frames[-1][1:, :].T)

    def support_box(self):
        return [(float(self.knot.ts[0]), float(self.knot.ts[-1]))]

    def breakpoints(self):
        return [float(t) for t in self.knot.ts]

    def _eval(self, X):
        _check_disc(X, 1, self.leaf_id)
        ts = self.knot.ts
        t, V = X[:, 0], X[:, 1:]
        out = X.copy()
        inside = (t > ts[0]) & (t < ts[-1])
        if not np.any(inside):
            return out
        ti, Vi = t[inside], V[inside]
        m = len(ts) - 1
        seg = np.clip(np.searchsorted(ts, ti, side="right") - 1, 0, m - 1)
        lam = (ti - ts[seg]) / (ts[seg + 1] - ts[seg])
        first = lam <= 0.5
        vert = np.where(first, seg, seg + 1)
        phi = self._theta[vert] * (lam - 0.5)
        F = _rotation_apply(self._frames[seg], self._a[vert], self._b[vert], phi)
        rho = np.full(len(ti), self.radius)
        left = (seg == 0) & first
        rho[left] = 1.0 + (self.radius - 1.0) * (2 * lam[left])
        right = (seg == m - 1) & ~first
        sig = 2 * lam[right] - 1
        rho[right] = self.radius + (1.0 - self.radius) * sig
        if np.any(right):
            F[right] = np.einsum("pij,pjk->pik", F[right], self._seam(sig))
        core = eval_knot(self.knot, ti)
        out[inside] = core + rho[:, None] * np.einsum("pij,pj->pi", F, Vi)
        return out

    def to_dict(self):
        return {"type": "knot_tube", "leaf_id": self.leaf_id, "radius": self.radius,
                "knot": self.knot.to_dict()}


def has_collars(f: LongKnotPL) -> bool:
    n = len(f.points)
    return (n >= 3 and f.is_standard_vertex(1) and f.is_standard_vertex(n - 2)
            and f.support() is not None)


def with_collars(f: LongKnotPL, shrink: Fraction = Fraction(3, 4)) -> LongKnotPL:
    """Shrink ``f`` into ``[-shrink, shrink]`` and add straight collars."""
    from .actions import kappa_axis
    from .operad import CubeConfig

    if has_collars(f):
        return f
    g = kappa_axis(CubeConfig.from_intervals([[(-shrink, shrink)]]), [f])
    pts = list(g.points)
    params = list(g.params)
    n = f.ambient_dim
    zero = (Fraction(0),) * (n - 1)
    if params[0] > -1:
        params.insert(0, Fraction(-1))
        pts.insert(0, (Fraction(-1),) + zero)
    if params[-1] < 1:
        params.append(Fraction(1))
        pts.append((Fraction(1),) + zero)
    return LongKnotPL(tuple(params), tuple(pts), f.name)


def tube_from_knot(f: LongKnotPL, radius: float | None = None) -> TubeEmbedding:
    """The tube of the given radius around ``f`` as an EC(1, D^{n-1}) element."""
    if f.support() is None:
        return IdentityTube(1, f.ambient_dim - 1)
    reach = reach_estimate(f)
    if radius is None:
        radius = reach / 4
    if not 0 < radius < reach / 2:
        raise ValueError(f"radius {radius} must lie in (0, reach/2 = {reach / 2})")
    return KnotTube(f, radius)


def knot_from_tube(E: TubeEmbedding, samples: int = 129, check: bool = True) -> LongKnotPL:
    """Restrict ``E`` to the core ``R x {0}`` and fit a PL knot."""
    if E.j != 1:
        raise DimensionError("knot_from_tube needs a tube with j = 1")
    ts = np.union1d(np.linspace(-1.0, 1.0, samples),
                    np.clip(np.asarray(E.breakpoints(), dtype=float), -1.0, 1.0))
    X = np.zeros((len(ts), 1 + E.k))
    X[:, 0] = ts
    Y = E(X)
    if np.abs(Y[0] - X[0]).max() > 1e-9 or np.abs(Y[-1] - X[-1]).max() > 1e-9:
        raise ValueError("tube is not standard at the ends of I")
    if check:
        d = np.diff(ts).min()
        if not injectivity_proxy(ts[:, None], Y, 1.5 * d, 1e-9):
            raise ValueError("sampled core is not injective")
    keep = np.ones(len(ts), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(Y, axis=0), axis=1) > 0
    return knot_from_arrays(ts[keep], Y[keep])


class TwistTube(TubeEmbedding):
    """Rotate the first two disc coordinates by ``angle * prod_i bump(x_i)``."""

    def __init__(self, j: int, k: int, angle: float, leaf_id: str | None = None):
        if k < 2:
            raise DimensionError("a twist needs at least two disc coordinates")
        self.j, self.k = int(j), int(k)
        self.angle = float(angle)
        self.leaf_id = leaf_id or f"twist#{next(_leaf_counter)}"

    def angle_at(self, X):
        w = np.ones(len(X))
        for i in range(self.j):
            w *= peak_bump(X[:, i])
        return self.angle * w

    def _eval(self, X):
        _check_disc(X, self.j, self.leaf_id)
        out = X.copy()
        ph = self.angle_at(X)
        c, s = np.cos(ph), np.sin(ph)
        v1, v2 = X[:, self.j], X[:, self.j + 1]
        out[:, self.j] = c * v1 - s * v2
        out[:, self.j + 1] = s * v1 + c * v2
        return out

    def to_dict(self):
        return {"type": "twist", "leaf_id": self.leaf_id, "j": self.j, "k": self.k,
                "angle": self.angle}


# --- inner nodes ---------------------------------------------------------------

class ComposeTube(TubeEmbedding):
    """``outer o inner``."""

    def __init__(self, outer: TubeEmbedding, inner: TubeEmbedding):
        if (outer.j, outer.k) != (inner.j, inner.k):
            raise DimensionError("composed tubes must share (j, k)")
        self.outer, self.inner = outer, inner
        self.j, self.k = outer.j, outer.k

    def _eval(self, X):
        return self.outer._eval(self.inner._eval(X))

    def support_box(self):
        a, b = self.outer.support_box(), self.inner.support_box()
        return [(min(x[0], y[0]), max(x[1], y[1])) for x, y in zip(a, b)]

    def breakpoints(self):
        return sorted(set(self.outer.breakpoints()) | set(self.inner.breakpoints()))

    def leaves(self):
        return self.outer.leaves() + self.inner.leaves()

    def to_dict(self):
        return {"type": "compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


def compose_tubes(tubes: Sequence[TubeEmbedding], j: int, k: int) -> TubeEmbedding:
    """``tubes[0] o tubes[1] o ...``; the identity for an empty list."""
    tubes = [t for t in tubes if not isinstance(t, IdentityTube)]
    if not tubes:
        return IdentityTube(j, k)
    out = tubes[-1]
    for t in reversed(tubes[:-1]):
        out = ComposeTube(t, out)
    return out


class ConjugateTube(TubeEmbedding):
    """``(L x Id) o E o (L^{-1} x Id)`` for a cube ``L`` acting on R^j."""

    def __init__(self, L: CAutElement, E: TubeEmbedding):
        if L.dim != E.j:
            raise DimensionError(f"cube of dim {L.dim} cannot conjugate a tube with j = {E.j}")
        self.L, self.E = L, E
        self.j, self.k = E.j, E.k
        self._a, self._b = L.as_float_arrays()

    def support_box(self):
        return [(a * lo + b, a * hi + b) for a, b, (lo, hi) in zip(self._a, self._b, self.E.support_box())]

    def _eval(self, X):
        out = X.copy()
        box = [(a * -1.0 + b, a * 1.0 + b) for a, b in zip(self._a, self._b)]
        mask = _in_box(X, box)
        if not np.any(mask):
            return out
        Y = X[mask].copy()
        Y[:, :self.j] = (Y[:, :self.j] - self._b) / self._a
        Z = self.E._eval(Y)
        Z[:, :self.j] = Z[:, :self.j] * self._a + self._b
        out[mask] = Z
        return out

    def breakpoints(self):
        if self.j != 1:
            return []
        return [float(self._a[0] * t + self._b[0]) for t in self.E.breakpoints()]

    def leaves(self):
        return self.E.leaves()

    def to_dict(self):
        return {"type": "conjugate", "cube": self.L.to_dict(), "tube": self.E.to_dict()}


def conjugate(L: CAutElement, E: TubeEmbedding) -> TubeEmbedding:
    """mu(L, E); nested conjugations are merged into one cube."""
    if isinstance(E, IdentityTube):
        return E
    if isinstance(E, ConjugateTube):
        return ConjugateTube(cube_compose(L, E.L), E.E)
    return ConjugateTube(L, E)


# --- sampling and export ---------------------------------------------------------

def tube_sample_grid(j: int, k: int, long_samples: int, disc_samples: int = 8,
                     extent: float = 1.1, seed: int = 0) -> np.ndarray:
    """Grid on ``[-extent, extent]^j x D^k`` (disc sampled in polar-like shells)."""
    axes = [np.linspace(-extent, extent, long_samples)] * j
    if k == 0:
        return np.array(list(itertools.product(*axes)))
    if k == 1:
        disc = np.linspace(-1, 1, disc_samples)[:, None]
    elif k == 2:
        r = np.linspace(0, 1, disc_samples)
        ang = np.linspace(0, 2 * np.pi, disc_samples, endpoint=False)
        R, A = np.meshgrid(r, ang)
        disc = np.column_stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()])
        disc = np.unique(np.round(disc, 15), axis=0)
    else:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(disc_samples * disc_samples, k))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        disc = g * rng.uniform(0, 1, size=(len(g), 1)) ** (1 / k)
    long = np.array(list(itertools.product(*axes)))
    return np.hstack([np.repeat(long, len(disc), axis=0), np.tile(disc, (len(long), 1))])


def random_tube_points(j: int, k: int, count: int, seed: int = 0, extent: float = 1.2) -> np.ndarray:
    rng = np.random.default_rng(seed)
    long = rng.uniform(-extent, extent, size=(count, j))
    g = rng.normal(size=(count, k))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    disc = g * rng.uniform(0, 1, size=(count, 1)) ** (1 / max(k, 1))
    return np.hstack([long, disc])


def tube_to_obj(E: TubeEmbedding, long_samples: int = 200, around: int = 24) -> str:
    """Boundary surface ``t -> E(t, unit circle)`` as Wavefront OBJ text (j = 1, k = 2)."""
    if (E.j, E.k) != (1, 2):
        raise DimensionError("OBJ export is for tubes in R x D^2")
    ts = np.linspace(-1.0, 1.0, long_samples)
    ang = np.linspace(0, 2 * np.pi, around, endpoint=False)
    T, A = np.meshgrid(ts, ang, indexing="ij")
    X = np.column_stack([T.ravel(), np.cos(A).ravel(), np.sin(A).ravel()])
    Y = E(X)
    lines = [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in Y]
    for i in range(long_samples - 1):
        for c in range(around):
            p = i * around + c + 1
            q = i * around + (c + 1) % around + 1
            lines.append(f"f {p} {q} {q + around} {p + around}")
    return "\n".join(lines) + "\n"


def default_tube_eps(E: TubeEmbedding) -> float:
    """A hundredth of the thinnest knot tube in the tree (1e-3 without one)."""
    radii = [leaf.radius for leaf in E.leaves() if isinstance(leaf, KnotTube)]
    return min([1e-3] + [r / 100 for r in radii])


def tube_injective(E: TubeEmbedding, long_samples: int = 64, disc_samples: int = 8,
                   eps: float | None = None) -> bool:
    """Injectivity proxy on a ``long_samples^j x disc`` grid."""
    if eps is None:
        eps = default_tube_eps(E)
    X = tube_sample_grid(E.j, E.k, long_samples, disc_samples)
    spacing = 2.2 / (long_samples - 1)
    return injectivity_proxy(X, E(X), 0.5 * spacing, eps)

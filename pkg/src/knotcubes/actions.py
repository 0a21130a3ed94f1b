"""Cube actions on long knots, tube embeddings and pseudo-isotopy embeddings."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .geometry import CAutElement, DimensionError, LittleCube, cube_project
from .knots import ImmersedKnotPL, KnotError, LongKnotPL, intersecting_segment_pairs
from .operad import ArityError, CubeConfig, height_permutation
from .pec import PseudoIsotopyEmbedding, compose_pecs, pec_conjugate
from .tubes import TubeEmbedding, compose_tubes, conjugate

__all__ = ["ActionError", "conjugate", "scale_knot", "disjoint_support_compose", "kappa_axis",
           "kappa_overlap", "kappa_pec", "pec_face_config"]


class ActionError(RuntimeError):
    """An action produced something that fails its validity check."""


def scale_knot(L: CAutElement, f: LongKnotPL) -> LongKnotPL:
    """Move ``f`` into the cube ``L`` of C_1.

    Parameters and the first coordinate go through ``l(t) = a t + b``; the
    normal coordinates are multiplied by ``a``, so the knot is moved by a
    similarity and stays embedded.
    """
    if L.dim != 1:
        raise DimensionError("long knots are acted on by 1-cubes")
    a, b = L.factors[0].a, L.factors[0].b
    params = tuple(a * t + b for t in f.params)
    pts = tuple((a * p[0] + b,) + tuple(a * x for x in p[1:]) for p in f.points)
    return LongKnotPL(params, pts, f.name)


def _trimmed(f: LongKnotPL):
    """Vertices of ``f`` from the first to the last non-redundant one."""
    supp = f.support()
    if supp is None:
        return None, []
    lo, hi = supp
    verts = [(t, p) for t, p in zip(f.params, f.points) if lo <= t <= hi]
    return supp, verts


def disjoint_support_compose(f: LongKnotPL, g: LongKnotPL) -> LongKnotPL:
    """``f o g`` for knots whose supports are disjoint (they may touch)."""
    return _splice([f, g], f.ambient_dim)


def _splice(knots: Sequence[LongKnotPL], n: int) -> LongKnotPL:
    pieces = []
    for f in knots:
        if f.ambient_dim != n:
            raise DimensionError("all knots must share the ambient dimension")
        supp, verts = _trimmed(f)
        if supp is not None:
            pieces.append((supp, verts))
    pieces.sort(key=lambda p: p[0][0])
    for (s1, _), (s2, _) in zip(pieces, pieces[1:]):
        if s2[0] < s1[1]:
            raise KnotError(f"supports {s1} and {s2} overlap")
    params, points = [], []
    for _, verts in pieces:
        for t, p in verts:
            if params and params[-1] == t:
                continue
            params.append(t)
            points.append(p)
    zero = (Fraction(0),) * (n - 1)
    if not params:
        return LongKnotPL((Fraction(-1), Fraction(1)), ((Fraction(-1),) + zero, (Fraction(1),) + zero))
    return LongKnotPL(tuple(params), tuple(points))


def kappa_axis(c: CubeConfig, knots: Sequence[LongKnotPL], ambient_dim: int | None = None,
               validate: bool = True) -> LongKnotPL:
    """``L_1.f_1 o ... o L_i.f_i`` for 1-cubes with disjoint interiors."""
    if c.dim != 1:
        raise DimensionError("kappa_axis uses configurations of 1-cubes")
    if len(knots) != c.arity:
        raise ArityError(f"{c.arity} cubes but {len(knots)} knots")
    if any(isinstance(f, ImmersedKnotPL) and f.double_points for f in knots):
        raise KnotError("kappa_axis acts on embedded knots")
    n = ambient_dim if ambient_dim is not None else (knots[0].ambient_dim if knots else 3)
    scaled = [scale_knot(L, f) for L, f in zip(c.cubes, knots)]
    out = _splice(scaled, n)
    if validate and intersecting_segment_pairs(out):
        raise ActionError("kappa_axis produced a self-intersecting knot")
    return out


def kappa_overlap(c: CubeConfig, tubes: Sequence[TubeEmbedding], k: int | None = None) -> TubeEmbedding:
    """Overlap action of (j+1)-cubes on tube embeddings in EC(j, D^k).

    Each tube is conjugated by the projection of its cube and the results
    are composed with the lowest cube outermost.
    """
    if len(tubes) != c.arity:
        raise ArityError(f"{c.arity} cubes but {len(tubes)} tubes")
    if c.dim < 2:
        raise DimensionError("the overlap action needs cubes of dim >= 2")
    j = c.dim - 1
    if tubes:
        k = tubes[0].k
    elif k is None:
        raise ValueError("pass k for the nullary action")
    for E in tubes:
        if (E.j, E.k) != (j, k):
            raise DimensionError(f"tube of type ({E.j}, {E.k}) in a ({j}, {k}) action")
    sigma = height_permutation(c)
    parts = [conjugate(cube_project(c.cubes[i])[0], tubes[i]) for i in sigma]
    return compose_tubes(parts, j, k)


def kappa_pec(c: CubeConfig, ps: Sequence[PseudoIsotopyEmbedding], k: int | None = None) -> PseudoIsotopyEmbedding:
    """Action of j-cubes on pseudo-isotopy embeddings of R^j x D^k.

    Cubes act by full conjugation; the composition order is by the bottom of
    the first factor (the pseudo-isotopy direction), lowest outermost.  With
    this order the top face of the result is the overlap action on the faces,
    see :func:`pec_face_config`.
    """
    if len(ps) != c.arity:
        raise ArityError(f"{c.arity} cubes but {len(ps)} embeddings")
    j = c.dim
    if ps:
        k = ps[0].k
    elif k is None:
        raise ValueError("pass k for the nullary action")
    for p in ps:
        if (p.j, p.k) != (j, k):
            raise DimensionError(f"embedding of type ({p.j}, {p.k}) in a ({j}, {k}) action")
    hs = [L.factors[0](Fraction(-1)) for L in c.cubes]
    sigma = sorted(range(c.arity), key=lambda i: hs[i])
    return compose_pecs([pec_conjugate(c.cubes[i], ps[i]) for i in sigma], j, k)


def pec_face_config(c: CubeConfig) -> CubeConfig:
    """Move the first factor of every cube to the end.

    ``restrict_face(kappa_pec(c, ps)) == kappa_overlap(pec_face_config(c), faces)``.
    """
    return CubeConfig(c.dim, tuple(LittleCube(L.factors[1:] + L.factors[:1]) for L in c.cubes))

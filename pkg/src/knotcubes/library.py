"""Library of standard long knots.

Closed curves are scaled into a small box, cut open at their highest vertex
and the two ends are routed straight up and out to the standard line, so the
long knot has the knot type of the closed curve.  Every library knot has
straight collars ``(-1, -3/4)`` and ``(3/4, 1)`` on the standard line.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import fsolve

from .knots import ImmersedKnotPL, KnotError, LongKnotPL, mirror

DEN = 4096
COLLAR = Fraction(3, 4)
BODY_HALF = 0.45
Z_SHIFT = -0.2


def _q(x: float) -> Fraction:
    return Fraction(round(float(x) * DEN), DEN)


def _qv(v) -> tuple[Fraction, ...]:
    return tuple(_q(x) for x in v)


def trefoil_curve(t):
    """Right-handed trefoil (writhe +3 seen from above)."""
    t = np.asarray(t, dtype=float)
    return np.stack([np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), np.sin(3 * t)], -1)


def figure_eight_curve(t):
    t = np.asarray(t, dtype=float)
    r = 2 + np.cos(2 * t)
    return np.stack([r * np.cos(3 * t), r * np.sin(3 * t), np.sin(4 * t)], -1)


def _normaliser(curve):
    fine = curve(np.linspace(0, 2 * np.pi, 2000, endpoint=False))
    centre = fine.mean(0)
    scale = BODY_HALF / np.abs(fine - centre).max()
    shift = np.array([0.0, 0.0, Z_SHIFT])
    return lambda X: (np.asarray(X) - centre) * scale + shift


def _long_from_body(body: list[tuple[Fraction, ...]], name: str,
                    body_params: list[Fraction] | None = None) -> tuple[tuple, tuple]:
    """Attach the up-and-out routing and collars to an open body polygon.

    ``body`` runs from the start point ``b`` to the end point ``a``; both are
    assumed to be the highest points of the body near the cut.
    """
    b, a = body[0], body[-1]
    zero = Fraction(0)
    left = [(Fraction(-1), zero, zero), (-COLLAR, zero, zero),
            (Fraction(-7, 10), zero, Fraction(3, 5)), (b[0], b[1], Fraction(3, 5))]
    right = [(a[0], a[1], Fraction(7, 10)), (Fraction(7, 10), zero, Fraction(7, 10)),
             (COLLAR, zero, zero), (Fraction(1), zero, zero)]
    pts = left + list(body) + right
    if body_params is None:
        k = len(body) + 5
        inner = [-COLLAR + (2 * COLLAR) * Fraction(i, k) for i in range(1, k)]
    else:
        inner = body_params
    params = [Fraction(-1), -COLLAR] + inner + [COLLAR, Fraction(1)]
    return tuple(params), tuple(pts)


def long_knot_from_closed(curve, m: int, name: str) -> LongKnotPL:
    """Sample ``curve`` at ``m`` points, cut at the top, make it long."""
    norm = _normaliser(curve)
    t = np.linspace(0, 2 * np.pi, m, endpoint=False)
    P = norm(curve(t))
    k = int(np.argmax(P[:, 2]))
    P = np.roll(P, -k, axis=0)
    v0 = P[0]
    b = (v0 + P[1]) / 2
    a = (v0 + P[-1]) / 2
    body = [_qv(b)] + [_qv(p) for p in P[1:]] + [_qv(a)]
    params, pts = _long_from_body(body, name)
    return LongKnotPL(params, pts, name)


def _planar_crossings(curve, norm, fine: int = 600):
    """Crossings (ta, tb) of the xy-projection of a closed curve."""
    t = np.linspace(0, 2 * np.pi, fine, endpoint=False)
    P = norm(curve(t))[:, :2]
    Q = np.roll(P, -1, axis=0)
    hits = []
    for i in range(fine):
        for j in range(i + 2, fine):
            if i == 0 and j == fine - 1:
                continue
            d1, d2 = Q[i] - P[i], Q[j] - P[j]
            M = np.column_stack([d1, -d2])
            if abs(np.linalg.det(M)) < 1e-14:
                continue
            s, u = np.linalg.solve(M, P[j] - P[i])
            if 0 <= s < 1 and 0 <= u < 1:
                hits.append((t[i] + s * (t[1] - t[0]), t[j] + u * (t[1] - t[0])))
    out = []
    for ta, tb in hits:
        def F(x):
            return norm(curve(x[0]))[:2] - norm(curve(x[1]))[:2]
        ta, tb = fsolve(F, [ta, tb], xtol=1e-12)
        out.append((ta % (2 * np.pi), tb % (2 * np.pi)))
    return out


def immersed_trefoil_knot(m: int = 36, flatten: tuple[int, int] = (0, 1)) -> ImmersedKnotPL:
    """The trefoil diagram with two of its three crossings made into double points.

    Both strands through a chosen crossing are replaced by short horizontal
    segments at the mean height whose midpoints coincide exactly, so the
    double point sits in the middle of a segment on each strand.
    """
    curve = trefoil_curve
    norm = _normaliser(curve)
    deriv = lambda s: (norm(curve(s + 1e-6)) - norm(curve(s - 1e-6))) / 2e-6
    crossings = sorted(_planar_crossings(curve, norm))
    chosen = [crossings[i] for i in flatten]
    special = [t for pair in chosen for t in pair]

    t_grid = np.linspace(0, 2 * np.pi, 3000, endpoint=False)
    z = norm(curve(t_grid))[:, 2]
    circ = lambda x, y: abs((x - y + np.pi) % (2 * np.pi) - np.pi)
    tops = [t_grid[i] for i in np.argsort(-z)[:60]]
    t_cut = max(tops, key=lambda s: min(circ(s, c) for c in special))

    step = 2 * np.pi / m
    half = 0.3 * step
    nodes = [(t_cut + i * step) % (2 * np.pi) for i in range(m)]
    nodes = [s for s in nodes if all(circ(s, c) > 0.6 * step for c in special)]
    items = [(circ(s, t_cut) * 0 + ((s - t_cut) % (2 * np.pi)), _qv(norm(curve(s)))) for s in nodes]
    dp_marks = []
    for idx, (ta, tb) in enumerate(chosen):
        X = norm(curve(ta))
        zc = (norm(curve(ta))[2] + norm(curve(tb))[2]) / 2
        Xq = (_q(X[0]), _q(X[1]), _q(zc))
        for s in (ta, tb):
            u = deriv(s)[:2] * half
            uq = (_q(u[0]), _q(u[1]), Fraction(0))
            rel = (s - t_cut) % (2 * np.pi)
            items.append((rel - half, tuple(x - y for x, y in zip(Xq, uq))))
            items.append((rel + half, tuple(x + y for x, y in zip(Xq, uq))))
            dp_marks.append((idx, rel))
    items.sort(key=lambda it: it[0])
    # the cut node sits at rel = 0; replace it by the two half-way points
    assert items[0][0] == 0.0
    v0 = items[0][1]
    b = tuple((x + y) / 2 for x, y in zip(v0, items[1][1]))
    a = tuple((x + y) / 2 for x, y in zip(v0, items[-1][1]))
    body = [b] + [p for _, p in items[1:]] + [a]
    params, pts = _long_from_body(body, "immersed_trefoil")
    # double points: midpoint parameter of each inserted segment
    rels = [it[0] for it in items[1:]]
    dps = {}
    for idx, rel in dp_marks:
        k = rels.index(rel - half)
        # body index k + 1 (after b), plus 4 leading routing vertices
        v = 4 + 1 + k
        dps.setdefault(idx, []).append((params[v] + params[v + 1]) / 2)
    double_points = tuple(tuple(sorted(v)) for v in dps.values())
    return ImmersedKnotPL(params, pts, "immersed_trefoil", double_points)


@lru_cache(maxsize=None)
def _build(name: str) -> LongKnotPL:
    if name == "unknot":
        return LongKnotPL((-1, 1), ((-1, 0, 0), (1, 0, 0)), "unknot")
    if name in ("trefoil", "right_trefoil"):
        return long_knot_from_closed(trefoil_curve, 24, "trefoil")
    if name == "left_trefoil":
        return mirror(_build("trefoil")).with_name("left_trefoil")
    if name in ("figure_eight", "figure8"):
        return long_knot_from_closed(figure_eight_curve, 24, "figure_eight")
    if name in ("granny", "square"):
        from .actions import kappa_axis
        from .operad import CubeConfig

        halves = CubeConfig.from_intervals([[(-1, 0)], [(0, 1)]])
        second = "trefoil" if name == "granny" else "left_trefoil"
        return kappa_axis(halves, [_build("trefoil"), _build(second)]).with_name(name)
    if name == "immersed_trefoil":
        return immersed_trefoil_knot()
    raise KnotError(f"unknown knot {name!r}; known: {', '.join(KNOT_NAMES)}")


KNOT_NAMES = ("unknot", "trefoil", "left_trefoil", "figure_eight", "granny", "square",
              "immersed_trefoil")


def standard_knot(name: str) -> LongKnotPL:
    return _build(name)

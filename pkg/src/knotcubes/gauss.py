"""Independent v2 oracle from the Gauss diagram of a planar projection.

For a long knot the type-2 invariant is the arrow-diagram count over pairs of
interleaved crossings ``p1 < p2 < p3 < p4`` where the first crossing is met
first as an under-pass and the second first as an over-pass; each pair
contributes the product of the two writhe signs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .knots import LongKnotPL, float_segments


class ProjectionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Crossing:
    t_over: float
    t_under: float
    sign: int


def projection_frame(phi: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """View direction ``d`` orthogonal to the first axis and a plane basis."""
    d = np.array([0.0, math.cos(phi), math.sin(phi)])
    e1 = np.array([1.0, 0.0, 0.0])
    return d, e1, np.cross(d, e1)


def gauss_diagram(f: LongKnotPL, phi: float, margin: float = 1e-9) -> list[Crossing]:
    """Crossings of the projection along ``(0, cos phi, sin phi)``.

    Raises :class:`ProjectionError` when the projection is not generic:
    crossings at vertices, tangential overlaps, or equal heights.
    """
    if f.ambient_dim != 3:
        raise ValueError("the Gauss-diagram oracle needs a knot in R^3")
    A, B = float_segments(f)
    D = B - A
    m = len(A)
    d, u, w = projection_frame(phi)
    pa = np.column_stack([A @ u, A @ w])
    pd = np.column_stack([D @ u, D @ w])
    scale = max(1.0, float(np.abs(pd).max()))
    I, J = np.triu_indices(m, k=1)
    adj = J == I + 1
    det = pd[I, 0] * (-pd[J, 1]) - pd[I, 1] * (-pd[J, 0])
    r = pa[J] - pa[I]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (r[:, 0] * (-pd[J, 1]) - r[:, 1] * (-pd[J, 0])) / det
        t = (pd[I, 0] * r[:, 1] - pd[I, 1] * r[:, 0]) / det
    par = np.abs(det) <= 1e-12 * scale * scale
    # parallel projected segments that also overlap are non-generic
    if np.any(par & ~adj):
        k = np.nonzero(par & ~adj)[0]
        cross_r = np.abs(r[k, 0] * pd[I[k], 1] - r[k, 1] * pd[I[k], 0])
        for kk in k[cross_r <= 1e-12 * scale * scale]:
            di = pd[I[kk]]
            n2 = di @ di
            lo, hi = sorted(((pa[J[kk]] - pa[I[kk]]) @ di / n2,
                             (pa[J[kk]] + pd[J[kk]] - pa[I[kk]]) @ di / n2))
            if hi > -margin and lo < 1 + margin:
                raise ProjectionError("collinear overlap in projection")
    ok = ~par & ~adj
    inside = ok & (s > -margin) & (s < 1 + margin) & (t > -margin) & (t < 1 + margin)
    near_end = inside & ((np.abs(s) <= margin) | (np.abs(s - 1) <= margin)
                         | (np.abs(t) <= margin) | (np.abs(t - 1) <= margin))
    if np.any(near_end):
        raise ProjectionError("crossing at a vertex")
    if np.any(adj & par):
        k = np.nonzero(adj & par)[0]
        dots = np.einsum("ij,ij->i", pd[I[k]], pd[J[k]])
        if np.any(dots < 0):
            raise ProjectionError("projection folds back on itself")
    k = np.nonzero(inside)[0]
    params = np.concatenate([[-1e9], f.ts, [1e9]])
    out = []
    for idx in k:
        i, j, si, tj = I[idx], J[idx], s[idx], t[idx]
        hi = (A[i] + si * D[i]) @ d
        hj = (A[j] + tj * D[j]) @ d
        if abs(hi - hj) <= margin:
            raise ProjectionError("double point in projection")
        ti = _param(params, f, i, si)
        tjp = _param(params, f, j, tj)
        if hi > hj:
            over, under, tov, tun = pd[i], pd[j], ti, tjp
        else:
            over, under, tov, tun = pd[j], pd[i], tjp, ti
        eps = int(np.sign(over[0] * under[1] - over[1] * under[0]))
        out.append(Crossing(tov, tun, eps))
    return out


def _param(params, f, seg, s):
    # segment 0 is the left tail, segment m+1 the right tail
    if seg == 0:
        x0 = -float(_extent(f))
        return x0 + s * (f.ts[0] - x0)
    if seg == len(f.ts):
        x1 = float(_extent(f))
        return f.ts[-1] + s * (x1 - f.ts[-1])
    return f.ts[seg - 1] + s * (f.ts[seg] - f.ts[seg - 1])


def _extent(f):
    from .knots import tail_extent
    return tail_extent(f)


def v2_from_gauss(crossings: list[Crossing]) -> int:
    if not crossings:
        return 0
    first = np.array([min(c.t_over, c.t_under) for c in crossings])
    second = np.array([max(c.t_over, c.t_under) for c in crossings])
    first_over = np.array([c.t_over < c.t_under for c in crossings])
    eps = np.array([c.sign for c in crossings])
    U = ~first_over
    O = first_over
    a1, a2 = first[:, None], second[:, None]
    b1, b2 = first[None, :], second[None, :]
    interleave = (a1 < b1) & (b1 < a2) & (a2 < b2)
    mask = interleave & U[:, None] & O[None, :]
    return int(np.sum(np.outer(eps, eps) * mask))


def v2_oracle(f: LongKnotPL, seed: int = 0, retries: int = 20, directions: int = 1) -> int:
    """Gauss-diagram value of v2 from generic projections.

    With ``directions > 1`` several generic projections are evaluated and
    must agree.
    """
    rng = np.random.default_rng(seed)
    values = []
    for _ in range(retries * directions):
        phi = float(rng.uniform(0, math.pi))
        try:
            values.append(v2_from_gauss(gauss_diagram(f, phi)))
        except ProjectionError:
            continue
        if len(values) == directions:
            break
    if len(values) < directions:
        raise ProjectionError("no generic projection found")
    if len(set(values)) != 1:
        raise ProjectionError(f"projection-dependent oracle values {values}")
    return values[0]


def writhe(crossings: list[Crossing]) -> int:
    return int(sum(c.sign for c in crossings))

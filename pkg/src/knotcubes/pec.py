"""Pseudo-isotopy embeddings: supported in [-1, oo) x I^{j-1} x D^k.

Above ``t1 = 1`` such an embedding is ``(t1, g(rest))`` for a tube
embedding ``g`` of one lower dimension, its top face.
"""
from __future__ import annotations

import itertools

import numpy as np

from .geometry import CAutElement, DimensionError, cube_compose
from .profiles import smooth_step
from .tubes import IdentityTube, TubeEmbedding, compose_tubes, conjugate

_pec_counter = itertools.count()


class FaceMismatchError(ValueError):
    pass


class PseudoIsotopyEmbedding(TubeEmbedding):
    """Base class; subclasses implement ``_eval`` and ``face``."""

    def face(self) -> TubeEmbedding:
        raise NotImplementedError

    def support_box(self):
        return [(-1.0, np.inf)] + [(-1.0, 1.0)] * (self.j - 1)


class PECFromEC(PseudoIsotopyEmbedding):
    """A tube embedding supported in I^j, with identity top face."""

    def __init__(self, E: TubeEmbedding):
        if E.j < 2:
            raise DimensionError("pseudo-isotopy embeddings need j >= 2")
        self.E = E
        self.j, self.k = E.j, E.k

    def _eval(self, X):
        return self.E._eval(X)

    def face(self):
        return IdentityTube(self.j - 1, self.k)

    def leaves(self):
        return self.E.leaves()

    def to_dict(self):
        return {"type": "pec_from_ec", "tube": self.E.to_dict()}


class PECSuspension(PseudoIsotopyEmbedding):
    """``(t1, x) -> (t1, mu(s(t1) Id, g)(x))`` with ``s`` a smooth step from 0 to 1.

    The Alexander-trick path from the identity (at ``t1 = -1``) to ``g``
    (from ``t1 = 1`` on).
    """

    def __init__(self, g: TubeEmbedding, leaf_id: str | None = None):
        self.g = g
        self.j, self.k = g.j + 1, g.k
        self.leaf_id = leaf_id or f"suspension#{next(_pec_counter)}"

    def _eval(self, X):
        out = X.copy()
        s = smooth_step(X[:, 0])
        Y = X[:, 1:].copy()
        m = self.g.j
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = Y[:, :m] / s[:, None]
        mask = (s > 0) & np.all(np.abs(scaled) < 1, axis=1)
        if not np.any(mask):
            return out
        Z = Y[mask]
        Z[:, :m] = scaled[mask]
        W = self.g._eval(Z)
        W[:, :m] *= s[mask, None]
        out[mask, 1:] = W
        return out

    def face(self):
        return self.g

    def leaves(self):
        return [self]

    def to_dict(self):
        return {"type": "pec_suspension", "leaf_id": self.leaf_id, "face": self.g.to_dict()}


class PECCompose(PseudoIsotopyEmbedding):
    def __init__(self, outer: PseudoIsotopyEmbedding, inner: PseudoIsotopyEmbedding):
        if (outer.j, outer.k) != (inner.j, inner.k):
            raise DimensionError("composed pseudo-isotopy embeddings must share (j, k)")
        self.outer, self.inner = outer, inner
        self.j, self.k = outer.j, outer.k

    def _eval(self, X):
        return self.outer._eval(self.inner._eval(X))

    def face(self):
        return compose_tubes([self.outer.face(), self.inner.face()], self.j - 1, self.k)

    def leaves(self):
        return self.outer.leaves() + self.inner.leaves()

    def to_dict(self):
        return {"type": "pec_compose", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


class PECIdentity(PseudoIsotopyEmbedding):
    def __init__(self, j: int, k: int):
        self.j, self.k = j, k

    def _eval(self, X):
        return X.copy()

    def face(self):
        return IdentityTube(self.j - 1, self.k)

    def to_dict(self):
        return {"type": "pec_identity", "j": self.j, "k": self.k}


class PECConjugate(PseudoIsotopyEmbedding):
    """``(L x Id) o P o (L^{-1} x Id)``; the face is conjugated by ``L`` minus its first factor."""

    def __init__(self, L: CAutElement, P: PseudoIsotopyEmbedding):
        if L.dim != P.j:
            raise DimensionError(f"cube of dim {L.dim} cannot act on j = {P.j}")
        self.L, self.P = L, P
        self.j, self.k = P.j, P.k
        self._a, self._b = L.as_float_arrays()

    def _eval(self, X):
        out = X.copy()
        a, b = self._a, self._b
        mask = X[:, 0] > b[0] - a[0]
        for i in range(1, self.j):
            mask &= (X[:, i] > b[i] - a[i]) & (X[:, i] < b[i] + a[i])
        if not np.any(mask):
            return out
        Y = X[mask].copy()
        Y[:, :self.j] = (Y[:, :self.j] - b) / a
        Z = self.P._eval(Y)
        Z[:, :self.j] = Z[:, :self.j] * a + b
        out[mask] = Z
        return out

    def face(self):
        return conjugate(CAutElement(self.L.factors[1:]), self.P.face())

    def leaves(self):
        return self.P.leaves()

    def to_dict(self):
        return {"type": "pec_conjugate", "cube": self.L.to_dict(), "pec": self.P.to_dict()}


def pec_conjugate(L: CAutElement, P: PseudoIsotopyEmbedding) -> PseudoIsotopyEmbedding:
    if isinstance(P, PECIdentity):
        return P
    if isinstance(P, PECConjugate):
        return PECConjugate(cube_compose(L, P.L), P.P)
    return PECConjugate(L, P)


def compose_pecs(ps, j: int, k: int) -> PseudoIsotopyEmbedding:
    ps = [p for p in ps if not isinstance(p, PECIdentity)]
    if not ps:
        return PECIdentity(j, k)
    out = ps[-1]
    for p in reversed(ps[:-1]):
        out = PECCompose(p, out)
    return out


def check_face(p: PseudoIsotopyEmbedding, samples: int = 200, seed: int = 0,
               tol: float = 1e-9) -> float:
    """Largest deviation between ``p`` above ``t1 = 1`` and ``(t1, face)``."""
    from .tubes import random_tube_points

    rng = np.random.default_rng(seed)
    rest = random_tube_points(p.j - 1, p.k, samples, seed=seed)
    t1 = np.concatenate([[1.0], rng.uniform(1.0, 3.0, size=samples - 1)])
    X = np.column_stack([t1, rest])
    Y = p(X)
    G = p.face()(rest)
    err = float(max(np.abs(Y[:, 0] - t1).max(), np.abs(Y[:, 1:] - G).max()))
    if err > tol:
        raise FaceMismatchError(f"top face disagrees by {err:.3g}")
    return err


def restrict_face(p: PseudoIsotopyEmbedding, check: bool = True) -> TubeEmbedding:
    """The top face ``g``, checked pointwise against ``p`` above ``t1 = 1``."""
    if check:
        check_face(p)
    return p.face()

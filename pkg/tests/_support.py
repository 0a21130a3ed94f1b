"""Shared builders for the action and graphing checks."""
from __future__ import annotations

import random
from functools import lru_cache

import numpy as np

from knotcubes.actions import kappa_axis, kappa_overlap, kappa_pec, pec_face_config
from knotcubes.graphing import KappaLoop, SampledTubeLoop, gr1_tube
from knotcubes.library import standard_knot
from knotcubes.operad import (operad_compose, random_config, random_perm, symmetric_action)
from knotcubes.pec import PECFromEC, PECSuspension, restrict_face
from knotcubes.tubes import IdentityTube, TwistTube, random_tube_points, tube_from_knot

SAMPLES = 1000
TOL = 1e-9


@lru_cache(maxsize=None)
def knot_tubes():
    return (tube_from_knot(standard_knot("trefoil")), tube_from_knot(standard_knot("figure_eight")))


def random_tube(rng: random.Random, j: int, k: int = 2):
    if j == 1 and rng.random() < 0.6:
        return rng.choice(knot_tubes())
    return TwistTube(j, k, rng.uniform(-3, 3))


def random_tube_loop(rng: random.Random, j: int = 1, k: int = 2) -> SampledTubeLoop:
    ident = IdentityTube(j, k)
    mids = [(-0.5, TwistTube(j, k, rng.uniform(-3, 3))), (0.0, random_tube(rng, j, k)),
            (0.5, TwistTube(j, k, rng.uniform(-3, 3)))]
    return SampledTubeLoop([(-1.0, ident)] + mids + [(1.0, ident)])


def _gap(E, F, X) -> float:
    return float(np.abs(E(X) - F(X)).max())


def overlap_case(seed: int, j: int = 1, k: int = 2) -> dict:
    """Symmetry, associativity and identity gaps of the overlap action for one seed."""
    rng = random.Random(seed)
    dim = j + 1
    c = random_config(rng, dim, rng.randint(1, 3))
    ds = [random_config(rng, dim, rng.randint(0, 2)) for _ in range(c.arity)]
    tubes = [[random_tube(rng, j, k) for _ in range(d.arity)] for d in ds]
    flat = [E for group in tubes for E in group]
    X = random_tube_points(j, k, SAMPLES, seed=seed)
    inner = [kappa_overlap(d, Es, k=k) for d, Es in zip(ds, tubes)]
    assoc = _gap(kappa_overlap(operad_compose(c, ds), flat, k=k), kappa_overlap(c, inner, k=k), X)
    sigma = random_perm(rng, c.arity)
    sym = _gap(kappa_overlap(symmetric_action(c, sigma), [inner[s] for s in sigma], k=k),
               kappa_overlap(c, inner, k=k), X)
    E = inner[0] if inner else IdentityTube(j, k)
    from knotcubes.operad import CubeConfig

    ident = float(np.abs(kappa_overlap(CubeConfig.identity(dim), [E])(X) - E(X)).max())
    return {"associativity": assoc, "symmetry": sym, "identity": ident}


def pec_case(seed: int, j: int = 2, k: int = 2) -> dict:
    """Axioms for the pseudo-isotopy action plus agreement of its top face."""
    rng = random.Random(seed)
    c = random_config(rng, j, rng.randint(1, 3))
    ds = [random_config(rng, j, rng.randint(0, 2)) for _ in range(c.arity)]

    def rand_pec():
        if rng.random() < 0.5:
            return PECSuspension(random_tube(rng, j - 1, k))
        return PECFromEC(TwistTube(j, k, rng.uniform(-3, 3)))

    ps = [[rand_pec() for _ in range(d.arity)] for d in ds]
    flat = [p for group in ps for p in group]
    X = random_tube_points(j, k, SAMPLES, seed=seed, extent=1.5)
    inner = [kappa_pec(d, group, k=k) for d, group in zip(ds, ps)]
    assoc = _gap(kappa_pec(operad_compose(c, ds), flat, k=k), kappa_pec(c, inner, k=k), X)
    sigma = random_perm(rng, c.arity)
    sym = _gap(kappa_pec(symmetric_action(c, sigma), [inner[s] for s in sigma], k=k),
               kappa_pec(c, inner, k=k), X)
    whole = kappa_pec(c, inner, k=k)
    Y = random_tube_points(j - 1, k, SAMPLES, seed=seed)
    face = _gap(restrict_face(whole), kappa_overlap(pec_face_config(c), [p.face() for p in inner], k=k), Y)
    return {"associativity": assoc, "symmetry": sym, "face": face}


def axis_case(seed: int) -> dict:
    """Exact PL associativity and symmetry of the axis action on library knots."""
    rng = random.Random(seed)
    names = ["trefoil", "figure_eight", "left_trefoil", "unknot"]
    c = random_config(rng, 1, rng.randint(1, 3))
    ds = [random_config(rng, 1, rng.randint(0, 2)) for _ in range(c.arity)]
    ks = [[standard_knot(rng.choice(names)) for _ in range(d.arity)] for d in ds]
    flat = [f for g in ks for f in g]
    inner = [kappa_axis(d, g, ambient_dim=3) for d, g in zip(ds, ks)]
    assoc = kappa_axis(operad_compose(c, ds), flat, ambient_dim=3).same_map(kappa_axis(c, inner, ambient_dim=3))
    sigma = random_perm(rng, c.arity)
    sym = kappa_axis(symmetric_action(c, sigma), [inner[s] for s in sigma], ambient_dim=3).same_map(
        kappa_axis(c, inner, ambient_dim=3))
    return {"associativity": assoc, "symmetry": sym}


def gr1_equivariance_gap(seed: int) -> float:
    rng = random.Random(seed)
    c = random_config(rng, 3, rng.randint(1, 3))
    loops = [random_tube_loop(rng) for _ in range(c.arity)]
    lhs = gr1_tube(KappaLoop(c, loops))
    rhs = kappa_overlap(c, [gr1_tube(lp) for lp in loops])
    X = random_tube_points(2, 2, SAMPLES, seed=seed)
    return _gap(lhs, rhs, X)


SUM_PAIRS = [("trefoil", "figure_eight"), ("figure_eight", "figure_eight"),
             ("left_trefoil", "figure_eight"), ("trefoil", "trefoil")]


def random_sum(i: int):
    """Connected sum in random halves of I, then a seeded small perturbation."""
    from fractions import Fraction

    from knotcubes.knots import perturb, reach_estimate
    from knotcubes.operad import CubeConfig

    rng = random.Random(100 + i)
    cut = Fraction(rng.randint(-4, 4), 16)
    c = CubeConfig.from_intervals([[(-1, cut)], [(cut, 1)]])
    a, b = SUM_PAIRS[i]
    f = kappa_axis(c, [standard_knot(a), standard_knot(b)])
    return perturb(f, seed=200 + i, magnitude=reach_estimate(f) / 50)


def corpus() -> dict:
    names = ["unknot", "trefoil", "left_trefoil", "figure_eight", "granny", "square"]
    out = {n: standard_knot(n) for n in names}
    for i in range(len(SUM_PAIRS)):
        out[f"sum{i}_" + "+".join(SUM_PAIRS[i])] = random_sum(i)
    return out

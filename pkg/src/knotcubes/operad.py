"""The little n-cubes operad: configurations, composition, symmetric action."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .geometry import (
    CAutElement,
    DimensionError,
    LittleCube,
    cube_compose,
    cube_project,
    cubes_disjoint,
)


class ArityError(ValueError):
    pass


@dataclass(frozen=True)
class CubeConfig:
    """A point of C_n(j): j little n-cubes with disjoint interiors."""

    dim: int
    cubes: tuple[LittleCube, ...] = ()

    def __post_init__(self):
        cubes = tuple(LittleCube.coerce(c) for c in self.cubes)
        object.__setattr__(self, "cubes", cubes)
        for c in cubes:
            if c.dim != self.dim:
                raise DimensionError(f"cube of dim {c.dim} in a dim {self.dim} config")
        if not cubes_disjoint(cubes):
            raise ValueError("cubes overlap")

    @property
    def arity(self) -> int:
        return len(self.cubes)

    def __len__(self):
        return len(self.cubes)

    @classmethod
    def identity(cls, dim: int) -> "CubeConfig":
        return cls(dim, (LittleCube.identity(dim),))

    @classmethod
    def from_intervals(cls, boxes) -> "CubeConfig":
        cubes = tuple(LittleCube.from_intervals(b) for b in boxes)
        if not cubes:
            raise ValueError("use CubeConfig(dim) for the empty configuration")
        return cls(cubes[0].dim, cubes)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "cubes": [c.to_dict() for c in self.cubes]}

    @classmethod
    def from_dict(cls, d: dict) -> "CubeConfig":
        return cls(int(d["dim"]), tuple(LittleCube.from_dict(c) for c in d["cubes"]))


def operad_compose(outer: CubeConfig, inners: Sequence[CubeConfig]) -> CubeConfig:
    if len(inners) != outer.arity:
        raise ArityError(f"outer has arity {outer.arity}, got {len(inners)} inner configs")
    cubes = []
    for L, inner in zip(outer.cubes, inners):
        if inner.dim != outer.dim:
            raise DimensionError(f"inner dim {inner.dim} != outer dim {outer.dim}")
        cubes.extend(cube_compose(L, M) for M in inner.cubes)
    result = CubeConfig(outer.dim, tuple(cubes))
    return result


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ArityError(f"{perm} is not a permutation of 0..{n - 1}")
    return perm


def symmetric_action(c: CubeConfig, perm: Sequence[int]) -> CubeConfig:
    """Right action ``(c . perm)_i = c_{perm[i]}`` (0-based)."""
    perm = _check_perm(perm, c.arity)
    return CubeConfig(c.dim, tuple(c.cubes[p] for p in perm))


def compose_perms(sigma: Sequence[int], tau: Sequence[int]) -> tuple[int, ...]:
    """``(sigma o tau)(i) = sigma[tau[i]]``, so ``(c.sigma).tau = c.(sigma o tau)``."""
    return tuple(sigma[t] for t in tau)


def invert_perm(sigma: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma):
        inv[s] = i
    return tuple(inv)


def block_perm(outer_perm: Sequence[int], sizes: Sequence[int]) -> tuple[int, ...]:
    """Permutation of concatenated blocks induced by permuting the blocks."""
    starts = [0]
    for s in sizes:
        starts.append(starts[-1] + s)
    out = []
    for p in outer_perm:
        out.extend(range(starts[p], starts[p] + sizes[p]))
    return tuple(out)


def sum_perm(perms: Sequence[Sequence[int]]) -> tuple[int, ...]:
    out, offset = [], 0
    for p in perms:
        out.extend(offset + x for x in p)
        offset += len(p)
    return tuple(out)


def heights(cubes: Sequence[CAutElement]) -> list[Fraction]:
    return [cube_project(L)[1] for L in cubes]


def height_permutation(c: CubeConfig | Sequence[CAutElement]) -> tuple[int, ...]:
    """Stable sort of the cubes by the bottom of their last factor.

    ``sigma[0]`` is the index of the lowest cube; ties keep input order.
    """
    cubes = c.cubes if isinstance(c, CubeConfig) else tuple(c)
    hs = heights(cubes)
    return tuple(sorted(range(len(cubes)), key=lambda i: hs[i]))


# --- random configurations and the axiom suite -----------------------------

def random_rational(rng: random.Random, lo: Fraction, hi: Fraction, den: int = 64) -> Fraction:
    k = rng.randint(0, den)
    return lo + (hi - lo) * Fraction(k, den)


def random_config(rng: random.Random, dim: int, arity: int, den: int = 16) -> CubeConfig:
    """Disjoint cubes from a random guillotine split of [-1, 1]^dim.

    Each cell is split along a random axis at a rational point, then every
    final cell is shrunk to a random sub-box with rational corners.
    """
    if arity == 0:
        return CubeConfig(dim)
    cells = [[(Fraction(-1), Fraction(1)) for _ in range(dim)]]
    while len(cells) < arity:
        idx = rng.randrange(len(cells))
        cell = cells.pop(idx)
        axis = rng.randrange(dim)
        lo, hi = cell[axis]
        cut = lo + (hi - lo) * Fraction(rng.randint(1, den - 1), den)
        left, right = list(cell), list(cell)
        left[axis] = (lo, cut)
        right[axis] = (cut, hi)
        cells[idx:idx] = [left, right]
    boxes = []
    for cell in cells:
        box = []
        for lo, hi in cell:
            a = random_rational(rng, lo, hi, den)
            b = random_rational(rng, lo, hi, den)
            if a == b:
                a, b = lo, hi
            box.append((min(a, b), max(a, b)))
        boxes.append(box)
    order = list(range(arity))
    rng.shuffle(order)
    return CubeConfig(dim, tuple(LittleCube.from_intervals(boxes[i]) for i in order))


def random_perm(rng: random.Random, n: int) -> tuple[int, ...]:
    p = list(range(n))
    rng.shuffle(p)
    return tuple(p)


def check_unit(c: CubeConfig) -> bool:
    ident = CubeConfig.identity(c.dim)
    left = operad_compose(ident, [c]) == c
    right = operad_compose(c, [ident] * c.arity) == c
    return left and right


def check_associativity(c: CubeConfig, ds: Sequence[CubeConfig],
                        es: Sequence[Sequence[CubeConfig]]) -> bool:
    """``(c o ds) o es_flat == c o (d_i o es_i)``."""
    flat = [e for group in es for e in group]
    lhs = operad_compose(operad_compose(c, ds), flat)
    rhs = operad_compose(c, [operad_compose(d, e) for d, e in zip(ds, es)])
    return lhs == rhs


def check_equivariance(c: CubeConfig, ds: Sequence[CubeConfig], sigma: Sequence[int],
                       taus: Sequence[Sequence[int]]) -> bool:
    sizes = [d.arity for d in ds]
    lhs = operad_compose(symmetric_action(c, sigma), [ds[s] for s in sigma])
    rhs = symmetric_action(operad_compose(c, ds), block_perm(sigma, sizes))
    inner = operad_compose(c, [symmetric_action(d, t) for d, t in zip(ds, taus)])
    inner_rhs = symmetric_action(operad_compose(c, ds), sum_perm(taus))
    return lhs == rhs and inner == inner_rhs


def selfcheck(seed: int = 0, cases: int = 200, max_dim: int = 3, max_arity: int = 3) -> dict:
    """Run the unit/associativity/equivariance suites on random configurations."""
    rng = random.Random(seed)
    results = {"unit": 0, "associativity": 0, "equivariance": 0, "disjoint_output": 0}
    failures = {k: 0 for k in results}
    for _ in range(cases):
        dim = rng.randint(1, max_dim)
        c = random_config(rng, dim, rng.randint(0, max_arity))
        ds = [random_config(rng, dim, rng.randint(0, max_arity)) for _ in range(c.arity)]
        es = [[random_config(rng, dim, rng.randint(0, 2)) for _ in range(d.arity)] for d in ds]
        sigma = random_perm(rng, c.arity)
        taus = [random_perm(rng, d.arity) for d in ds]
        outcomes = {
            "unit": check_unit(c),
            "associativity": check_associativity(c, ds, es),
            "equivariance": check_equivariance(c, ds, sigma, taus),
            "disjoint_output": cubes_disjoint(operad_compose(c, ds).cubes),
        }
        for k, ok in outcomes.items():
            results[k] += 1
            failures[k] += 0 if ok else 1
    return {"seed": seed, "cases": cases, "checked": results, "failures": failures,
            "ok": not any(failures.values())}

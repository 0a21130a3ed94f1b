"""Exact rational affine maps: little cubes and the monoid CAut_n.

Every coordinate here is a :class:`fractions.Fraction`, so compositions,
inverses and disjointness tests are exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[int, float, str, Fraction]


class DimensionError(ValueError):
    pass


class DegenerateCubeError(ValueError):
    pass


def as_fraction(x: Number) -> Fraction:
    """Coerce to an exact rational.

    Floats are converted exactly (every double is a dyadic rational); strings
    may be ``"p/q"``, integers or decimals.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    return Fraction(x)


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class AffineInc:
    """The increasing affine map ``t -> a*t + b``."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", as_fraction(self.b))
        if self.a <= 0:
            raise DegenerateCubeError(f"slope must be positive, got {self.a}")

    def __call__(self, t):
        return self.a * t + self.b

    def compose(self, other: "AffineInc") -> "AffineInc":
        return AffineInc(self.a * other.a, self.a * other.b + self.b)

    def inverse(self) -> "AffineInc":
        return AffineInc(1 / self.a, -self.b / self.a)

    def image(self) -> tuple[Fraction, Fraction]:
        """Image of [-1, 1]."""
        return (self.b - self.a, self.b + self.a)

    def to_dict(self) -> dict:
        return {"a": fraction_str(self.a), "b": fraction_str(self.b)}

    @classmethod
    def from_dict(cls, d: dict) -> "AffineInc":
        return cls(Fraction(d["a"]), Fraction(d["b"]))


IDENTITY_FACTOR = AffineInc(Fraction(1), Fraction(0))


@dataclass(frozen=True)
class CAutElement:
    """Product of increasing affine maps of R, one per axis."""

    factors: tuple[AffineInc, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise DimensionError("a cube needs at least one axis")

    @property
    def dim(self) -> int:
        return len(self.factors)

    @classmethod
    def identity(cls, dim: int):
        return cls(tuple(IDENTITY_FACTOR for _ in range(dim)))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Number, Number]]):
        return cls(tuple(AffineInc(as_fraction(a), as_fraction(b)) for a, b in pairs))

    @classmethod
    def from_intervals(cls, intervals: Iterable[tuple[Number, Number]]):
        """Build the cube whose image is the product of ``[lo, hi]`` boxes."""
        pairs = []
        for lo, hi in intervals:
            lo, hi = as_fraction(lo), as_fraction(hi)
            pairs.append(((hi - lo) / 2, (hi + lo) / 2))
        return cls.from_pairs(pairs)

    def slopes(self) -> tuple[Fraction, ...]:
        return tuple(f.a for f in self.factors)

    def offsets(self) -> tuple[Fraction, ...]:
        return tuple(f.b for f in self.factors)

    def box(self) -> tuple[tuple[Fraction, Fraction], ...]:
        return tuple(f.image() for f in self.factors)

    def as_float_arrays(self):
        import numpy as np

        return (np.array([float(f.a) for f in self.factors]),
                np.array([float(f.b) for f in self.factors]))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "factors": [f.to_dict() for f in self.factors]}

    @classmethod
    def from_dict(cls, d: dict):
        factors = tuple(AffineInc.from_dict(f) for f in d["factors"])
        if "dim" in d and int(d["dim"]) != len(factors):
            raise DimensionError(f"dim {d['dim']} does not match {len(factors)} factors")
        return cls(factors)


@dataclass(frozen=True)
class LittleCube(CAutElement):
    """A CAut element that maps [-1, 1]^n into itself."""

    def __post_init__(self):
        super().__post_init__()
        for i, f in enumerate(self.factors):
            if abs(f.a) + abs(f.b) > 1:
                raise ValueError(f"axis {i}: image {f.image()} leaves [-1, 1]")

    @classmethod
    def coerce(cls, L: CAutElement) -> "LittleCube":
        if isinstance(L, LittleCube):
            return L
        return cls(L.factors)


def _check_dims(*cubes: CAutElement) -> int:
    dims = {c.dim for c in cubes}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def cube_apply(L: CAutElement, x: Sequence[Number]) -> tuple[Fraction, ...]:
    if len(x) != L.dim:
        raise DimensionError(f"cube of dim {L.dim} applied to point of dim {len(x)}")
    return tuple(f(as_fraction(xi)) for f, xi in zip(L.factors, x))


def cube_compose(L: CAutElement, M: CAutElement) -> CAutElement:
    """``L o M``; a LittleCube if both arguments are."""
    _check_dims(L, M)
    factors = tuple(l.compose(m) for l, m in zip(L.factors, M.factors))
    if isinstance(L, LittleCube) and isinstance(M, LittleCube):
        return LittleCube(factors)
    return CAutElement(factors)


def cube_inverse(L: CAutElement) -> CAutElement:
    return CAutElement(tuple(f.inverse() for f in L.factors))


def cubes_disjoint(cubes: Sequence[CAutElement]) -> bool:
    """True iff the open images of the cubes are pairwise disjoint.

    Two open boxes are disjoint exactly when some axis has disjoint open
    intervals, so closed images may share faces.
    """
    cubes = list(cubes)
    if not cubes:
        return True
    _check_dims(*cubes)
    boxes = [c.box() for c in cubes]
    for i in range(len(boxes)):
        for k in range(i + 1, len(boxes)):
            if not any(hi1 <= lo2 or hi2 <= lo1
                       for (lo1, hi1), (lo2, hi2) in zip(boxes[i], boxes[k])):
                return False
    return True


def cube_project(L: CAutElement) -> tuple[CAutElement, Fraction]:
    """Split an (n+1)-cube into its first n factors and its bottom height."""
    if L.dim < 2:
        raise DimensionError("projection needs a cube of dimension at least 2")
    cls = LittleCube if isinstance(L, LittleCube) else CAutElement
    return cls(L.factors[:-1]), L.factors[-1](Fraction(-1))

"""Totally bounded subsets of (R^n, d_inf): closed boxes and finite point sets.

Boxes are the closed d_inf balls ``{x : |x - center|_inf <= radius}``.  Both
space kinds expose the same finite-approximation interface, which is all the
function-space and DP code needs.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .creal import CReal, as_fraction, format_rational
from .errors import EmptySet, NotCovered

Point = tuple  # tuple of Fractions

DEFAULT_POINT_CAP = 2_000_000


def point(*coords) -> Point:
    return tuple(as_fraction(c) for c in coords)


def dinf(x: Sequence, y: Sequence) -> Fraction:
    return max(abs(a - b) for a, b in zip(x, y))


@dataclass(frozen=True)
class BoxSpace:
    center: Point
    radius: Fraction

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(as_fraction(c) for c in self.center))
        object.__setattr__(self, "radius", as_fraction(self.radius))
        if self.radius <= 0:
            raise ValueError("box radius must be positive")

    @classmethod
    def interval(cls, lo, hi) -> "BoxSpace":
        lo, hi = as_fraction(lo), as_fraction(hi)
        return cls(((lo + hi) / 2,), (hi - lo) / 2)

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def lower(self) -> Point:
        return tuple(c - self.radius for c in self.center)

    @property
    def upper(self) -> Point:
        return tuple(c + self.radius for c in self.center)

    def contains(self, x: Sequence) -> bool:
        return dinf(x, self.center) <= self.radius

    def clip(self, x: Sequence) -> Point:
        return tuple(min(max(a, c - self.radius), c + self.radius) for a, c in zip(x, self.center))

    def approximation(self, radius, cap: int = DEFAULT_POINT_CAP) -> "RegularPartition":
        """Regular partition whose covering radius is at most ``radius``."""
        radius = as_fraction(radius)
        if radius <= 0:
            raise ValueError("approximation radius must be positive")
        k = max(1, math.ceil(self.radius / (2 * radius)))
        return regular_partition(self, k, cap)


@dataclass(frozen=True)
class FiniteSpace:
    """A finite metric subspace of (R^n, d_inf); its own 0-approximation."""

    points: tuple

    def __post_init__(self):
        pts = tuple(tuple(as_fraction(c) for c in p) for p in self.points)
        if not pts:
            raise EmptySet("finite space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("finite space points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def radius(self) -> Fraction:
        """Half the d_inf diameter (0 for a single point)."""
        if len(self.points) == 1:
            return Fraction(0)
        return max(dinf(p, q) for p in self.points for q in self.points) / 2

    def contains(self, x: Sequence) -> bool:
        return tuple(x) in self.points

    def approximation(self, radius=None, cap: int = DEFAULT_POINT_CAP) -> "FinitePartition":
        return FinitePartition(self)


Space = Union[BoxSpace, FiniteSpace]


@dataclass(frozen=True)
class RegularPartition:
    step: Fraction
    k: int
    source: BoxSpace
    points: tuple

    @property
    def covering_radius(self) -> Fraction:
        return self.step / 2

    def index_coords(self, i: int) -> tuple:
        """Integer lattice coordinates (0..2k per axis) of point ``i``."""
        side = 2 * self.k + 1
        out = []
        for _ in range(self.source.dim):
            out.append(i % side)
            i //= side
        return tuple(reversed(out))

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class FinitePartition:
    source: FiniteSpace

    @property
    def points(self) -> tuple:
        return self.source.points

    @property
    def covering_radius(self) -> Fraction:
        return Fraction(0)

    def __len__(self):
        return len(self.points)


def partition_size(dim: int, k: int) -> int:
    return (2 * k + 1) ** dim


def regular_partition(space: BoxSpace, k: int, cap: int = DEFAULT_POINT_CAP) -> RegularPartition:
    """All points ``center + delta * (n_1..n_d)``, ``n_j in -k..k``, lexicographic."""
    if k < 1:
        raise ValueError("k must be >= 1")
    size = partition_size(space.dim, k)
    if size > cap:
        from .errors import CapExceeded

        raise CapExceeded(size, cap, "regular partition")
    step = space.radius / k
    axes = [[c + step * j for j in range(-k, k + 1)] for c in space.center]
    pts = tuple(itertools.product(*axes))
    return RegularPartition(step, k, space, pts)


def finite_approximation(space: Space, k: int, cap: int = DEFAULT_POINT_CAP) -> list:
    """A 1/k-approximation realized as a regular partition with step <= 1/k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(space, FiniteSpace):
        return list(space.points)
    kk = max(1, math.ceil(space.radius * k))
    return list(regular_partition(space, kk, cap).points)


def locate(x: Sequence[CReal], partition: RegularPartition) -> int:
    """Index of a ball ``B(p_i, step)`` containing ``x``.

    Probes ``x`` at ``m = ceil(4/step)``; the first point with probe distance
    ``< step/2`` wins, otherwise the first at exactly ``step/2``.
    """
    delta = partition.step
    m = max(1, math.ceil(4 / delta))
    probe = [xi.approx(m) for xi in x]
    half = delta / 2
    tie = None
    for i, p in enumerate(partition.points):
        d = dinf(probe, p)
        if d < half:
            return i
        if d == half and tie is None:
            tie = i
    if tie is not None:
        return tie
    raise NotCovered(f"no partition ball of radius {delta} covers probe {probe}")


def dist_to_finite_set(x: Sequence, pts: Iterable[Sequence]) -> Fraction:
    best = None
    for p in pts:
        d = dinf(x, p)
        if best is None or d < best:
            best = d
    if best is None:
        raise EmptySet("distance to an empty set")
    return best


def partition_to_csv(points: Iterable[Sequence]) -> str:
    pts = list(points)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    dim = len(pts[0]) if pts else 0
    w.writerow([f"x{j}" for j in range(dim)])
    for p in pts:
        w.writerow([format_rational(c) for c in p])
    return buf.getvalue()


def partition_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    return [tuple(as_fraction(c) for c in row) for row in rows[1:]]

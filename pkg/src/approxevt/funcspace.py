"""Uniformly Lipschitz, uniformly bounded function spaces and their finite nets.

Functions are represented by values on a finite grid and extended to the
whole domain by the McShane-type midpoint of the upper and lower Lipschitz
envelopes, clamped to ``[-K, K]``.

Net construction
----------------
For a box domain of radius ``R`` the value lattice step ``delta = K/M`` and
the grid step ``s = R/j`` are chosen with ``L*s == delta`` exactly.  Lattice
assignments with ``|n_a - n_b| <= ceil(L*rho_ab/delta)`` are then exactly
Lipschitz-compatible, and rounding any ``f`` in the space to the lattice
gives one of them (rounding commutes with lattice shifts and is monotone).
The extension of the rounded values is within ``delta/2 + L*s/2 = delta`` of
``f`` everywhere, so ``delta <= eps`` gives an ``eps``-net.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .creal import CReal, as_fraction, format_rational, from_rational
from .errors import CapExceeded, IncompatibleValues
from .metric import BoxSpace, FiniteSpace, Space, dinf, locate, regular_partition

DEFAULT_NET_CAP = 5_000_000


@dataclass(frozen=True)
class LipschitzSpaceDesc:
    domain: Space
    lip: Fraction
    bound: Fraction
    codomain_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "lip", as_fraction(self.lip))
        object.__setattr__(self, "bound", as_fraction(self.bound))
        if self.lip <= 0 or self.bound <= 0:
            raise ValueError("Lipschitz constant and bound must be positive")
        if self.codomain_dim < 1:
            raise ValueError("codomain dimension must be >= 1")


def _clamp(v: Fraction, bound: Optional[Fraction]) -> Fraction:
    if bound is None:
        return v
    return max(min(v, bound), -bound)


@dataclass(frozen=True, eq=False)
class PWLFunction:
    """Grid values plus the clamped McShane extension rule.

    ``values`` holds Fractions, or tuples of Fractions for vector-valued
    functions.  ``bound=None`` disables clamping.
    """

    grid: tuple
    values: tuple
    lip: Fraction
    bound: Optional[Fraction] = None
    domain: Optional[Space] = None
    _checked: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(tuple(as_fraction(c) for c in p) for p in self.grid))
        vals = []
        for v in self.values:
            vals.append(tuple(as_fraction(c) for c in v) if isinstance(v, (tuple, list)) else as_fraction(v))
        object.__setattr__(self, "values", tuple(vals))
        object.__setattr__(self, "lip", as_fraction(self.lip))
        if self.bound is not None:
            object.__setattr__(self, "bound", as_fraction(self.bound))
        if len(self.grid) != len(self.values) or not self.grid:
            raise ValueError("grid and values must be non-empty and of equal length")

    @property
    def vector_valued(self) -> bool:
        return isinstance(self.values[0], tuple)

    def coordinate(self, c: int) -> "PWLFunction":
        return PWLFunction(self.grid, tuple(v[c] for v in self.values), self.lip, self.bound, self.domain)

    def check_compatible(self) -> None:
        if self._checked:
            return
        coords = [self.coordinate(c) for c in range(len(self.values[0]))] if self.vector_valued else [self]
        for g in coords:
            for (i, xi), vi in zip(enumerate(g.grid), g.values):
                if g.bound is not None and abs(vi) > g.bound:
                    raise IncompatibleValues(f"|value| {vi} at grid point {i} exceeds bound {g.bound}")
                for j in range(i):
                    if abs(vi - g.values[j]) > g.lip * dinf(xi, g.grid[j]):
                        raise IncompatibleValues(
                            f"grid values {j} and {i} violate the Lipschitz constant {g.lip}"
                        )
        self._checked.append(True)

    def __call__(self, x):
        return mcshane_extend(self, x)


def _extend_raw(grid, values, lip, bound, x) -> Fraction:
    hi = None
    lo = None
    for xi, vi in zip(grid, values):
        d = lip * dinf(x, xi)
        a = vi - d
        b = vi + d
        if hi is None or a > hi:
            hi = a
        if lo is None or b < lo:
            lo = b
    return _clamp((hi + lo) / 2, bound)


def mcshane_extend(f: PWLFunction, x: Sequence):
    """Clamped midpoint of the Lipschitz envelopes at ``x`` (exact)."""
    f.check_compatible()
    x = tuple(as_fraction(c) for c in x)
    if f.vector_valued:
        m = len(f.values[0])
        return tuple(_extend_raw(f.grid, [v[c] for v in f.values], f.lip, f.bound, x) for c in range(m))
    return _extend_raw(f.grid, f.values, f.lip, f.bound, x)


def _as_creal(v) -> CReal:
    return v if isinstance(v, CReal) else from_rational(as_fraction(v))


def snap_to_partition(f: Callable, space: LipschitzSpaceDesc, grid: Sequence, n: int) -> PWLFunction:
    """Lipschitz-compatible grid values within ``1/(nN)`` of ``f`` on the grid.

    Values are detected on a regular partition of ``[-K, K]`` with step at
    most ``1/(2nN^2)``; each is then clamped into the interval allowed by the
    values already placed, so the error grows by at most one step per point.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    grid = [tuple(as_fraction(c) for c in p) for p in grid]
    N = len(grid)
    K, L = space.bound, space.lip
    kk = math.ceil(2 * n * N * N * K)
    part = regular_partition(BoxSpace((Fraction(0),), K), kk)
    vals: list[Fraction] = []
    for i, xi in enumerate(grid):
        p = part.points[locate([_as_creal(f(xi))], part)][0]
        lo, hi = -K, K
        for xl, vl in zip(grid[:i], vals):
            d = L * dinf(xi, xl)
            lo = max(lo, vl - d)
            hi = min(hi, vl + d)
        vals.append(min(max(p, lo), hi))
    return PWLFunction(tuple(grid), tuple(vals), L, K, space.domain)


@dataclass(frozen=True)
class NetPlan:
    """Parameters of an eps-net before enumeration."""

    grid: tuple
    delta: Fraction  # value lattice step
    levels: int  # lattice indices run over -levels..levels
    cons: np.ndarray  # integer pairwise constraints
    precision: Fraction  # guaranteed sup-distance covering radius
    count_bound: int


def _count_bound(levels: int, cons: np.ndarray) -> int:
    width = 2 * levels + 1
    total = width
    for i in range(1, cons.shape[0]):
        c = int(cons[i, :i].min())
        total *= min(width, 2 * c + 1)
    return total


def plan_net(space: LipschitzSpaceDesc, eps) -> NetPlan:
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("net precision must be positive")
    L, K = space.lip, space.bound
    dom = space.domain
    if isinstance(dom, BoxSpace):
        ratio = L * dom.radius / K
        p, q = ratio.numerator, ratio.denominator
        t = math.ceil(K / (q * eps))
        M, j = q * t, p * t
        delta = K / M
        part = regular_partition(dom, j, cap=10**7)
        coords = np.array([part.index_coords(i) for i in range(len(part.points))], dtype=np.int64)
        cons = np.abs(coords[:, None, :] - coords[None, :, :]).max(axis=2)
        grid = part.points
        precision = delta
    else:
        M = math.ceil(K / eps)
        delta = K / M
        grid = dom.points
        n = len(grid)
        cons = np.zeros((n, n), dtype=np.int64)
        for a in range(n):
            for b in range(a):
                c = math.ceil(L * dinf(grid[a], grid[b]) / delta)
                cons[a, b] = cons[b, a] = c
        precision = delta
    cons = np.ascontiguousarray(cons, dtype=np.int64)
    return NetPlan(tuple(grid), delta, M, cons, precision, _count_bound(M, cons))


class FunctionNet:
    """A finite net of a :class:`LipschitzSpaceDesc` stored as lattice indices.

    Member ``i`` has raw grid values ``levels[i] * delta``; its function is
    the clamped extension of those values.  ``members`` is a lazy sequence.
    """

    def __init__(self, space: LipschitzSpaceDesc, plan: NetPlan, levels: np.ndarray):
        self.space = space
        self.plan = plan
        self.levels = levels
        self.precision = plan.precision

    grid = property(lambda self: self.plan.grid)
    delta = property(lambda self: self.plan.delta)

    def __len__(self) -> int:
        return int(self.levels.shape[0])

    def _scaled(self, points):
        """Integer form of the extension: returns (int matrix, denominator)."""
        L, K, delta = self.space.lip, self.space.bound, self.delta
        pts = [tuple(as_fraction(c) for c in p) for p in points]
        lr = [[L * dinf(p, x) for x in self.grid] for p in pts]
        dens = [delta.denominator, K.denominator] + [v.denominator for row in lr for v in row]
        D = reduce(math.lcm, dens, 1)
        if D > 2**40 or K * D > 2**40:
            return None
        unit = int(delta * D)
        vals = self.levels * unit
        lri = np.array([[int(v * D) for v in row] for row in lr], dtype=np.int64).reshape(len(pts), len(self.grid))
        KD = int(K * D)
        out = kernels.mcshane_batch(vals, lri, -2 * KD, 2 * KD)
        return out, 2 * D

    def sample(self, points, rows=None) -> tuple[np.ndarray, int]:
        """Exact member values at ``points``: ``S[i, g] / den``."""
        if rows is not None:
            sub = FunctionNet(self.space, self.plan, self.levels[rows])
            return sub.sample(points)
        res = self._scaled(points)
        if res is None:
            raise OverflowError("lattice denominators too large for the integer kernel")
        return res

    def member(self, i: int) -> PWLFunction:
        S, den = self.sample(self.grid, rows=[i])
        vals = tuple(Fraction(int(v), den) for v in S[0])
        return PWLFunction(self.grid, vals, self.space.lip, self.space.bound, self.space.domain)

    @property
    def members(self):
        return _LazyMembers(self)

    def to_json(self) -> str:
        out = []
        for f in self.members:
            out.append(
                {
                    "grid": [[format_rational(c) for c in p] for p in f.grid],
                    "values": [format_rational(v) for v in f.values],
                }
            )
        return json.dumps(out)


class _LazyMembers:
    def __init__(self, net):
        self._net = net

    def __len__(self):
        return len(self._net)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._net.member(j) for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        return self._net.member(i)

    def __iter__(self):
        for i in range(len(self)):
            yield self._net.member(i)


class VectorFunctionNet:
    """Product of per-coordinate scalar nets (d_inf on outputs)."""

    def __init__(self, space: LipschitzSpaceDesc, coordinate_net: FunctionNet):
        self.space = space
        self.coordinate_net = coordinate_net
        self.precision = coordinate_net.precision

    def __len__(self):
        return len(self.coordinate_net) ** self.space.codomain_dim

    def indices(self, i: int) -> tuple:
        n = len(self.coordinate_net)
        out = []
        for _ in range(self.space.codomain_dim):
            out.append(i % n)
            i //= n
        return tuple(reversed(out))

    def member(self, i: int) -> PWLFunction:
        parts = [self.coordinate_net.member(j) for j in self.indices(i)]
        vals = tuple(tuple(p.values[g] for p in parts) for g in range(len(parts[0].grid)))
        return PWLFunction(parts[0].grid, vals, self.space.lip, self.space.bound, self.space.domain)

    @property
    def members(self):
        return _LazyMembers(self)


def build_net(space: LipschitzSpaceDesc, eps, cap: int = DEFAULT_NET_CAP):
    """An ``eps``-net of the space in the sup metric."""
    scalar = LipschitzSpaceDesc(space.domain, space.lip, space.bound, 1)
    plan = plan_net(scalar, eps)
    m = space.codomain_dim
    if plan.count_bound ** m > cap:
        count = kernels.lattice_count(-plan.levels, plan.levels, plan.cons, cap)
        if count ** m > cap:
            raise CapExceeded(plan.count_bound ** m, cap, "function net")
    else:
        count = kernels.lattice_count(-plan.levels, plan.levels, plan.cons, plan.count_bound)
    levels = kernels.lattice_fill(-plan.levels, plan.levels, plan.cons, count)
    net = FunctionNet(scalar, plan, levels)
    if m == 1:
        return net
    return VectorFunctionNet(space, net)


def enumerate_net(space: LipschitzSpaceDesc, k: int, cap: int = DEFAULT_NET_CAP):
    """A 1/k-net of the space."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return build_net(space, Fraction(1, k), cap)


def sup_dist(f: PWLFunction, g: PWLFunction, k: int, domain: Optional[Space] = None) -> Fraction:
    """``r`` with ``r <= sup|f - g| <= r + 1/k`` over the common domain."""
    dom = domain or f.domain or g.domain
    if dom is None:
        raise ValueError("sup_dist needs a domain")
    if isinstance(dom, FiniteSpace):
        pts = dom.points
    else:
        lip = f.lip + g.lip
        pts = dom.approximation(Fraction(1, k) / lip).points

    def gap(x):
        a, b = f(x), g(x)
        if isinstance(a, tuple):
            return max(abs(u - v) for u, v in zip(a, b))
        return abs(a - b)

    return max(gap(x) for x in pts)


def random_member(space: LipschitzSpaceDesc, rng, grid=None, den: int = 64) -> PWLFunction:
    """Random element of the space: compatible random grid values, extended.

    Values are drawn sequentially inside the interval permitted by earlier
    values, so any ``rng`` (``random.Random``) gives a valid member.
    """
    if grid is None:
        if isinstance(space.domain, FiniteSpace):
            grid = space.domain.points
        else:
            grid = [tuple(space.domain.center[i] + space.domain.radius * Fraction(rng.randint(-den, den), den)
                          for i in range(space.domain.dim)) for _ in range(rng.randint(1, 6))]
            grid = list(dict.fromkeys(grid))
    L, K = space.lip, space.bound
    vals = []
    for i, xi in enumerate(grid):
        lo, hi = -K, K
        for xl, vl in zip(grid[:i], vals):
            d = L * dinf(xi, xl)
            lo, hi = max(lo, vl - d), min(hi, vl + d)
        t = Fraction(rng.randint(0, den), den)
        vals.append(lo + (hi - lo) * t)
    return PWLFunction(tuple(grid), tuple(vals), L, K, space.domain)

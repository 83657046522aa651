"""Approximate extremum values of uniformly continuous functionals.

``approx_inf`` searches a finite net of the function space and returns a
member ``f_j`` with ``J[f_j] - 1/k <= J[f]`` for every ``f`` in the space.
With the value of each member read at precision ``P = 8k`` and a net fine
enough that net neighbours differ by at most ``3/(4k)`` in ``J``, the chain
``J[f_j] <= J[f_j](P) + 1/P <= J[f_i](P) + 1/P <= J[f_i] + 2/P <= J[f] + 1/k``
holds for the neighbour ``f_i`` of any ``f``.

Functionals that are sums of quadratics in sampled function values (point
evaluations, integrals of ``a(x) f^2 + b(x) f + c(x)``) are minimized by a
streaming kernel and never materialize the net.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .creal import CReal, as_fraction, format_rational
from .errors import CapExceeded
from .funcspace import (
    DEFAULT_NET_CAP,
    FunctionNet,
    LipschitzSpaceDesc,
    PWLFunction,
    build_net,
    plan_net,
)
from .metric import BoxSpace, FiniteSpace, dinf

STREAM_CAP = 400_000_000


class Modulus:
    """A modulus of uniform continuity ``eps -> delta``."""

    def __init__(self, fn: Callable[[Fraction], Fraction]):
        self._fn = fn

    def __call__(self, eps) -> Fraction:
        d = as_fraction(self._fn(as_fraction(eps)))
        if d <= 0:
            raise ValueError("modulus must be positive")
        return d

    @classmethod
    def linear(cls, lip) -> "Modulus":
        """Modulus of an ``lip``-Lipschitz map."""
        lip = as_fraction(lip)
        return cls(lambda e: e / lip)


IDENTITY = Modulus(lambda e: e)


@dataclass(frozen=True)
class QuadraticSamples:
    """``J ~ sum_g (a_g y_g^2 + b_g y_g) + c`` with ``y_g = f(points[g])``."""

    points: tuple
    a: tuple
    b: tuple
    c: Fraction

    def value(self, ys: Sequence[Fraction]) -> Fraction:
        return sum((a * y * y + b * y for a, b, y in zip(self.a, self.b, ys)), self.c)


class Functional:
    """A uniformly continuous functional on a Lipschitz function space.

    Subclasses implement ``approx(f, n)`` (a rational within ``1/n`` of
    ``J[f]``) and may implement ``samples(n)`` returning
    :class:`QuadraticSamples` whose value is exactly ``approx(f, n)``.
    """

    modulus: Modulus = IDENTITY

    def approx(self, f: PWLFunction, n: int) -> Fraction:
        raise NotImplementedError

    def eval(self, f: PWLFunction) -> CReal:
        return CReal(lambda n: self.approx(f, n))

    def samples(self, n: int) -> Optional[QuadraticSamples]:
        return None

    def __neg__(self) -> "Functional":
        return _Negated(self)


class _Negated(Functional):
    def __init__(self, inner: Functional):
        self.inner = inner
        self.modulus = inner.modulus

    def approx(self, f, n):
        return -self.inner.approx(f, n)

    def samples(self, n):
        q = self.inner.samples(n)
        if q is None:
            return None
        return QuadraticSamples(q.points, tuple(-a for a in q.a), tuple(-b for b in q.b), -q.c)


class CallableFunctional(Functional):
    """Wraps ``fn(f) -> CReal | Fraction`` with a caller-supplied modulus."""

    def __init__(self, fn: Callable, modulus: Modulus):
        self.fn = fn
        self.modulus = modulus

    def approx(self, f, n):
        v = self.fn(f)
        return v.approx(n) if isinstance(v, CReal) else as_fraction(v)


class PointFunctional(Functional):
    """``J[f] = f(x0)``; 1-Lipschitz in the sup metric."""

    def __init__(self, x0: Sequence):
        self.x0 = tuple(as_fraction(c) for c in x0)
        self.modulus = IDENTITY

    def approx(self, f, n):
        return f(self.x0)

    def samples(self, n):
        return QuadraticSamples((self.x0,), (Fraction(0),), (Fraction(1),), Fraction(0))


class IntegralFunctional(Functional):
    """``J[f] = integral over a box of h(x, f(x))``, by the midpoint rule.

    ``lip_x`` and ``lip_y`` bound the Lipschitz constants of ``h`` in each
    argument (``y`` ranging over ``[-K, K]``) and ``func_lip`` that of the
    functions integrated; the cell count is chosen so the quadrature error
    is at most ``1/n``.  ``quadratic=(a, b, c)`` declares
    ``h(x, y) = a(x) y^2 + b(x) y + c(x)`` and enables the streaming kernel.
    """

    def __init__(self, domain: BoxSpace, h: Callable, lip_x, lip_y, func_lip,
                 quadratic: Optional[tuple] = None):
        self.domain = domain
        self.h = h
        self.lip_x = as_fraction(lip_x)
        self.lip_y = as_fraction(lip_y)
        self.func_lip = as_fraction(func_lip)
        self.quadratic = quadratic
        vol = (2 * domain.radius) ** domain.dim
        self.volume = vol
        self.modulus = Modulus(lambda e: e / (self.lip_y * vol))

    def cells(self, n: int) -> tuple[list, Fraction]:
        """Cell midpoints and cell volume for precision ``n``."""
        d = self.domain.dim
        lam = self.lip_x + self.lip_y * self.func_lip
        side = 2 * self.domain.radius
        # mean d_inf distance to the centre of a cube of side s is s*d/(2(d+1))
        m = 1
        if lam > 0:
            m = max(1, math.ceil(lam * self.volume * side * d * n / (2 * (d + 1))))
        s = side / m
        axes = [[lo + s * (i + Fraction(1, 2)) for i in range(m)] for lo in self.domain.lower]
        return list(itertools.product(*axes)), s ** d

    def approx(self, f, n):
        pts, w = self.cells(n)
        return w * sum(as_fraction(self.h(x, f(x))) for x in pts)

    def samples(self, n):
        if self.quadratic is None:
            return None
        fa, fb, fc = self.quadratic
        pts, w = self.cells(n)
        return QuadraticSamples(
            tuple(pts),
            tuple(w * as_fraction(fa(x)) for x in pts),
            tuple(w * as_fraction(fb(x)) for x in pts),
            w * sum(as_fraction(fc(x)) for x in pts),
        )


class ExtremumResult:
    """Returned member and its rational value; unpacks as ``(f, value)``."""

    def __init__(self, function, value, member_index, net_size, k, precision):
        self.function = function
        self.value = value
        self.member_index = member_index
        self.net_size = net_size
        self.k = k
        self.precision = precision

    def __iter__(self):
        yield self.function
        yield self.value

    def to_dict(self) -> dict:
        return {
            "value": format_rational(self.value),
            "member_index": int(self.member_index),
            "k": self.k,
            "net_size": int(self.net_size),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _stream_min(J, space, plan, n, cap):
    """Exact streaming minimum, or ``None`` when integers would overflow."""
    q = J.samples(n)
    L, K, delta = space.lip, space.bound, plan.delta
    lr = [[L * dinf(p, x) for x in plan.grid] for p in q.points]
    D = reduce(math.lcm, [delta.denominator, K.denominator] + [v.denominator for row in lr for v in row], 1)
    if K * D > 2**40:
        return None
    den = 2 * D
    ca = [a / den**2 for a in q.a]
    cb = [b / den for b in q.b]
    S = reduce(math.lcm, [v.denominator for v in ca + cb], 1)
    QA = [int(v * S) for v in ca]
    QB = [int(v * S) for v in cb]
    ymax = int(2 * K * D)
    if max(map(abs, QA + QB)) >= 2**62 or sum(map(abs, QA)) * ymax**2 + sum(map(abs, QB)) * ymax >= 2**125:
        return None
    count = kernels.lattice_count(-plan.levels, plan.levels, plan.cons, cap)
    if count > cap:
        raise CapExceeded(plan.count_bound, cap, "net for extremum search")
    unit = int(delta * D)
    lri = np.array([[int(v * D) for v in row] for row in lr], dtype=np.int64)
    _, idx, lev = kernels.lattice_min_quad(
        -plan.levels, plan.levels, plan.cons, lri, unit, -ymax, ymax, QA, QB,
    )
    Y = kernels.mcshane_batch(lev[None, :] * unit, lri, -ymax, ymax)[0]
    v = q.value([Fraction(int(y), den) for y in Y])
    return (v, idx, lev), count


def _chain_min(J, space, plan, n):
    """Exact net minimum for a 1D box by dynamic programming along the grid.

    On an aligned 1D grid the admissible level sequences are the walks with
    steps in {-1, 0, 1}, and the extension on ``[x_i, x_{i+1}]`` depends only
    on the two endpoint values.  The lexicographically first minimizer is
    the one with the smallest enumeration index.
    """
    q = J.samples(n)
    L, K, delta, M = space.lip, space.bound, plan.delta, plan.levels
    xs = [p[0] for p in plan.grid]
    N = len(xs)
    if N == 1:
        segs = [[]]
    else:
        segs = [[] for _ in range(N - 1)]
    for g, p in enumerate(q.points):
        i = 0
        while i < N - 2 and p[0] > xs[i + 1]:
            i += 1
        segs[i].append(g)

    def seg_cost(i, v, w):
        a, b = v * delta, w * delta
        tot = Fraction(0)
        for g in segs[i]:
            x = q.points[g][0]
            if N == 1:
                y = a
            else:
                dl, dr = L * (x - xs[i]), L * (xs[i + 1] - x)
                y = (max(a - dl, b - dr) + min(a + dl, b + dr)) / 2
            y = max(min(y, K), -K)
            tot += (q.a[g] * y + q.b[g]) * y
        return tot

    levels = range(-M, M + 1)
    best = [dict() for _ in range(N)]
    cnt = [dict() for _ in range(N)]
    for v in levels:
        best[N - 1][v] = seg_cost(0, v, v) if N == 1 else Fraction(0)
        cnt[N - 1][v] = 1
    for i in range(N - 2, -1, -1):
        for v in levels:
            opts = [seg_cost(i, v, w) + best[i + 1][w] for w in (v - 1, v, v + 1) if -M <= w <= M]
            best[i][v] = min(opts)
            cnt[i][v] = sum(cnt[i + 1][w] for w in (v - 1, v, v + 1) if -M <= w <= M)
    total = sum(cnt[0].values())
    vmin = min(best[0].values())
    path = [min(v for v in levels if best[0][v] == vmin)]
    index = sum(cnt[0][v] for v in levels if v < path[0])
    for i in range(N - 1):
        v = path[-1]
        for w in (v - 1, v, v + 1):
            if -M <= w <= M and seg_cost(i, v, w) + best[i + 1][w] == best[i][v]:
                break
            if -M <= w <= M:
                index += cnt[i + 1][w]
        path.append(w)
    return (vmin + q.c, index, np.array(path, dtype=np.int64)), total


def net_min(J: Functional, space: LipschitzSpaceDesc, eps, n: int, cap: int = STREAM_CAP,
            workers: int = 1, method: str = "auto"):
    """Exact minimum of ``J(., n)`` over the ``eps``-net of ``space``.

    Returns ``(value, member_index, member, net_size)``.  Ties go to the
    smallest index.  ``method`` is ``"chain"`` (1D boxes), ``"stream"``
    (compiled enumeration), ``"enumerate"`` (materialized net) or ``"auto"``.
    """
    eps = as_fraction(eps)
    scalar = space.codomain_dim == 1
    quad = scalar and J.samples(n) is not None
    chain_ok = quad and isinstance(space.domain, BoxSpace) and space.domain.dim == 1
    if method == "chain" or (method == "auto" and chain_ok):
        if not chain_ok:
            raise ValueError("chain minimization needs a scalar 1D box space and sampled functional")
        plan = plan_net(space, eps)
        (v, i, lev), count = _chain_min(J, space, plan, n)
        member = FunctionNet(space, plan, lev[None, :]).member(0)
        return v, i, member, count
    if quad and method in ("auto", "stream"):
        plan = plan_net(space, eps)
        res = _stream_min(J, space, plan, n, cap)
        if res is not None:
            (v, i, lev), count = res
            member = FunctionNet(space, plan, np.asarray(lev, dtype=np.int64)[None, :]).member(0)
            return v, i, member, count
    net = build_net(space, eps, min(cap, DEFAULT_NET_CAP))
    size = len(net)
    members = net.members

    def score(i):
        return J.approx(members[i], n)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(score, range(size)))
    else:
        vals = [score(i) for i in range(size)]
    v, i = min((v, i) for i, v in enumerate(vals))
    return v, i, members[i], size


def approx_inf(J: Functional, space: LipschitzSpaceDesc, k: int, cap: int = STREAM_CAP,
               workers: int = 1, method: str = "auto") -> ExtremumResult:
    """Member ``f_j`` and ``v = J[f_j](8k)`` with ``J[f_j] - 1/k <= inf J``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    eta = J.modulus(Fraction(3, 4 * k))
    v, i, f, size = net_min(J, space, eta, 8 * k, cap, workers, method)
    return ExtremumResult(f, v, i, size, k, eta)


def approx_sup(J: Functional, space: LipschitzSpaceDesc, k: int, cap: int = STREAM_CAP,
               workers: int = 1, method: str = "auto") -> ExtremumResult:
    """Mirror of :func:`approx_inf`: ``J[f_j] + 1/k >= sup J``."""
    r = approx_inf(-J, space, k, cap, workers, method)
    r.value = -r.value
    return r


def approx_sup_over_set(g: Callable, U, omega: Modulus, k: int) -> Fraction:
    """``r`` with ``|r - sup_U g| <= 1/k``.

    ``g`` is evaluated on an ``omega(1/2k)``-approximation of ``U``; CReal
    values are read at precision ``2k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(U, FiniteSpace):
        pts = U.points
    else:
        pts = U.approximation(omega(Fraction(1, 2 * k))).points
    best = None
    for u in pts:
        v = g(u)
        v = v.approx(2 * k) if isinstance(v, CReal) else as_fraction(v)
        if best is None or v > best:
            best = v
    return best


def sup_modulus(omega: Modulus) -> Modulus:
    """Modulus of ``x -> sup_u g(x, u)`` from a joint modulus of ``g``."""
    return Modulus(lambda e: omega(e / 3))

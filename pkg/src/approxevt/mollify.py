"""Smoothing Lipschitz functions with the bump ``exp(-1/t^2)``.

The mollified value at ``x`` is the normalized midpoint-rule sum

    f_k(x) = sum_c w_c f(x - c/k) / sum_c w_c,   w_c = sigma(1 - |c|^2),

over cell midpoints ``c`` of a lattice on ``[-1, 1]^n``.  Being a convex
combination of shifts by at most ``1/k``, it stays within ``L/k`` of an
``L``-Lipschitz ``f`` and is itself ``L``-Lipschitz.  ``quad_tol`` bounds
its distance to the exact convolution with the normalized bump.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .creal import as_fraction, exp_approx
from .errors import DomainInset
from .metric import BoxSpace

# max of d/dt exp(-1/t^2), attained at t = sqrt(2/3); rational upper bound
SIGMA_SLOPE = Fraction(82, 100)


def sigma(t, tol: Fraction) -> Fraction:
    """``exp(-1/t^2)`` for ``t > 0`` (0 otherwise), within ``tol``."""
    t = as_fraction(t)
    if t <= 0:
        return Fraction(0)
    q = 1 / (t * t)
    # exp(-q) <= 2^-q
    if q >= math.log2(1 / tol) + 1:
        return Fraction(0)
    return exp_approx(-q, tol)


def _lattice(dim: int, m: int):
    s = Fraction(2, m)
    axis = [-1 + s * (i + Fraction(1, 2)) for i in range(m)]
    return list(itertools.product(axis, repeat=dim)), s


def _midpoint_error(lip, dim: int, s: Fraction) -> Fraction:
    """Midpoint-rule error on ``[-1,1]^dim`` for a d_inf ``lip``-Lipschitz integrand."""
    return lip * 2**dim * s * dim / (2 * (dim + 1))


def _sqrt_upper(n: int) -> Fraction:
    r = math.isqrt(n)
    return Fraction(r if r * r == n else r + 1)


@dataclass
class MollifierKernel:
    """Normalized bump on the unit ball, tabulated on ``quad_points^dim`` cells."""

    dim: int
    k: int
    quad_points: int
    exp_tol: Fraction = Fraction(1, 10**12)
    points: list = field(init=False, repr=False)
    weights: list = field(init=False, repr=False)
    cell: Fraction = field(init=False)
    a: Fraction = field(init=False)
    quad_tol: Fraction = field(init=False)

    def __post_init__(self):
        if self.dim < 1 or self.k < 1 or self.quad_points < 1:
            raise ValueError("dim, k and quad_points must be positive")
        pts, s = _lattice(self.dim, self.quad_points)
        self.cell = s
        self.points, self.weights = [], []
        for c in pts:
            w = sigma(1 - sum(x * x for x in c), self.exp_tol)
            if w > 0:
                self.points.append(c)
                self.weights.append(w)
        mass = s**self.dim * sum(self.weights)
        self.a = 1 / mass
        self.quad_tol = self.a * self.integral_error(s)

    @property
    def bump_lip(self) -> Fraction:
        """d_inf Lipschitz bound of ``sigma(1 - |x|^2)``."""
        return 2 * SIGMA_SLOPE * _sqrt_upper(self.dim)

    def integral_error(self, s: Fraction) -> Fraction:
        """Bound on ``|quadrature - integral|`` of the unnormalized bump."""
        return _midpoint_error(self.bump_lip, self.dim, s) + 2**self.dim * self.exp_tol

    def integral(self, quad_points: int) -> tuple:
        """Independent midpoint quadrature of the normalized bump and its error bound."""
        pts, s = _lattice(self.dim, quad_points)
        total = s**self.dim * sum(sigma(1 - sum(x * x for x in c), self.exp_tol) for c in pts)
        return self.a * total, self.a * self.integral_error(s)


def bump(x, kernel: MollifierKernel) -> Fraction:
    """``a * sigma(1 - |x|^2)`` within ``a * exp_tol``."""
    x = [as_fraction(c) for c in x]
    return kernel.a * sigma(1 - sum(c * c for c in x), kernel.exp_tol)


class Mollified:
    """Evaluable ``f_k`` on the domain shrunk by ``1/k``."""

    def __init__(self, f: Callable, lip, kernel: MollifierKernel, domain: Optional[BoxSpace]):
        self.f = f
        self.lip = as_fraction(lip)
        self.kernel = kernel
        self.domain = domain
        k = kernel.k
        ker = kernel
        s = ker.cell
        wsum = sum(ker.weights)
        # error of the ratio of quadratures against the exact convolution
        eps_sigma = _midpoint_error(ker.bump_lip, ker.dim, s) + 2**ker.dim * ker.exp_tol
        lip_g = self.lip / k * (1 + ker.bump_lip)
        eps_g = _midpoint_error(lip_g, ker.dim, s) + self.lip / k * 2**ker.dim * ker.exp_tol
        self.quad_tol = (eps_g + self.lip / k * eps_sigma) / (s**ker.dim * wsum)
        self._shifts = [tuple(c / k for c in pt) for pt in ker.points]
        self._w = [w / wsum for w in ker.weights]

    def __call__(self, x) -> Fraction:
        x = tuple(as_fraction(c) for c in x)
        if self.domain is not None:
            inset = Fraction(1, self.kernel.k)
            lo, hi = self.domain.lower, self.domain.upper
            if any(xi - inset < l or xi + inset > h for xi, l, h in zip(x, lo, hi)):
                raise DomainInset(f"{x} is within 1/{self.kernel.k} of the domain boundary")
        return sum(w * as_fraction(self.f(tuple(a - b for a, b in zip(x, c)))) for w, c in zip(self._w, self._shifts))


def mollify(f: Callable, k: int, quad_points: int, lip=None, domain: Optional[BoxSpace] = None,
            dim: Optional[int] = None) -> Mollified:
    """Mollify an ``L``-Lipschitz ``f`` at scale ``1/k``.

    ``lip`` and ``domain`` default to the attributes of a
    :class:`~approxevt.funcspace.PWLFunction`; ``domain=None`` means all of
    R^n.
    """
    lip = as_fraction(lip if lip is not None else f.lip)
    if domain is None:
        domain = getattr(f, "domain", None)
    if dim is None:
        dim = domain.dim if domain is not None else len(f.grid[0])
    kernel = MollifierKernel(dim, k, quad_points)
    return Mollified(f, lip, kernel, domain)

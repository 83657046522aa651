"""Discounted dynamic programming on grids.

Value functions are grid tables extended by the Lipschitz midpoint rule.
One Bellman sweep evaluates ``sup_u r(x, u) + gamma V(f(x, u))`` at every
grid point to within ``1/k``; extending the new table to the whole state
space adds ``L * h`` where ``h`` is the grid covering radius.  Value
iteration fixes its step count before iterating from

    |V_n - V*| <= gamma^n/(1 - gamma) |T V_0 - V_0| + sum_i gamma^(n-1-i) e_i.
"""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .creal import CReal, as_fraction, format_rational
from .errors import DegenerateDiscount
from .evt import CallableFunctional, ExtremumResult, Modulus, approx_sup, approx_sup_over_set
from .funcspace import LipschitzSpaceDesc
from .metric import FiniteSpace, Space, dinf


@dataclass(frozen=True)
class DPProblem:
    """Reward ``r(x, u)``, transition ``f(x, u)`` into ``X``, discount ``gamma``.

    ``r_lip`` and ``f_lip`` are Lipschitz constants with respect to
    ``max(|dx|, |du|)`` (d_inf on states and controls).
    """

    X: Space
    U: Space
    r: Callable
    f: Callable
    gamma: Fraction
    r_lip: Fraction
    f_lip: Fraction

    def __post_init__(self):
        for name in ("gamma", "r_lip", "f_lip"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 0 < self.gamma < 1:
            raise DegenerateDiscount(f"discount must lie strictly between 0 and 1, got {self.gamma}")

    def reward(self, x, u) -> Fraction:
        return as_fraction(self.r(x, u))

    def step(self, x, u) -> tuple:
        y = self.f(x, u)
        return tuple(as_fraction(c) for c in (y if isinstance(y, tuple) else (y,)))


class ValueTable:
    """Grid values of a value function and their extension.

    On finite state spaces the table is the function.  On boxes it is
    extended by the midpoint of the ``lip``-Lipschitz envelopes, which is
    ``lip``-Lipschitz, monotone and commutes with adding constants.
    """

    def __init__(self, grid, values, lip, finite: bool = False, covering_radius=0):
        self.grid = tuple(tuple(as_fraction(c) for c in p) for p in grid)
        self.values = tuple(as_fraction(v) for v in values)
        self.lip = as_fraction(lip)
        self.finite = finite
        self.covering_radius = as_fraction(covering_radius)
        self._index = {p: i for i, p in enumerate(self.grid)} if finite else None

    @property
    def modulus(self) -> Modulus:
        return Modulus.linear(self.lip) if self.lip > 0 else Modulus(lambda e: Fraction(10**9))

    @classmethod
    def on(cls, X: Space, h, fn: Callable, lip) -> "ValueTable":
        """Table of ``fn`` on a grid of ``X`` with covering radius ``<= h``."""
        if isinstance(X, FiniteSpace):
            return cls(X.points, [fn(x) for x in X.points], lip, finite=True)
        part = X.approximation(h)
        return cls(part.points, [fn(x) for x in part.points], lip, covering_radius=part.covering_radius)

    def like(self, values, lip=None) -> "ValueTable":
        return ValueTable(self.grid, values, self.lip if lip is None else lip, self.finite, self.covering_radius)

    def __call__(self, x) -> Fraction:
        x = tuple(x)
        if self.finite:
            return self.values[self._index[x]]
        hi = lo = None
        for xi, vi in zip(self.grid, self.values):
            d = self.lip * dinf(x, xi)
            a, b = vi - d, vi + d
            if hi is None or a > hi:
                hi = a
            if lo is None or b < lo:
                lo = b
        return (hi + lo) / 2

    def grid_values(self) -> list:
        """Extension evaluated on the grid (equals ``values`` when compatible)."""
        return [self(x) for x in self.grid]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{j}" for j in range(len(self.grid[0]))] + ["value"])
        for p, v in zip(self.grid, self.values):
            w.writerow([format_rational(c) for c in p] + [format_rational(v)])
        return buf.getvalue()


def lipschitz_of_values(grid, values) -> Fraction:
    """Largest slope between grid points."""
    best = Fraction(0)
    for i in range(len(grid)):
        for j in range(i):
            d = dinf(grid[i], grid[j])
            if d > 0:
                best = max(best, abs(values[i] - values[j]) / d)
    return best


def next_lip(p: DPProblem, lip) -> Fraction:
    """Lipschitz constant of ``T[V]`` for an ``lip``-Lipschitz ``V``."""
    return p.r_lip + p.gamma * as_fraction(lip) * p.f_lip


def sup_error(p: DPProblem, k: int) -> Fraction:
    """Error of the inner sup: none over a finite control set (exact max of rationals)."""
    return Fraction(0) if isinstance(p.U, FiniteSpace) else Fraction(1, k)


def step_error(p: DPProblem, V: ValueTable, k: int) -> Fraction:
    """Sup error of one approximate sweep, extension included."""
    return sup_error(p, k) + next_lip(p, V.lip) * V.covering_radius


def bellman_apply(V: ValueTable, p: DPProblem, k: int) -> ValueTable:
    """Grid values of ``T[V]``, each within ``1/k`` (exact when ``U`` is finite)."""
    joint = next_lip(p, V.lip)
    omega = Modulus.linear(joint) if joint > 0 else Modulus(lambda e: Fraction(10**9))
    vals = []
    for x in V.grid:
        g = (lambda x: lambda u: p.reward(x, u) + p.gamma * V(p.step(x, u)))(x)
        vals.append(approx_sup_over_set(g, p.U, omega, k))
    return V.like(vals, joint)


def minimal_steps(gamma, d, eps) -> int:
    """Least ``n >= 0`` with ``gamma^n/(1 - gamma) * d <= eps`` (exact)."""
    gamma, d, eps = as_fraction(gamma), as_fraction(d), as_fraction(eps)
    if not 0 < gamma < 1:
        raise DegenerateDiscount(f"discount must lie strictly between 0 and 1, got {gamma}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if d <= 0:
        return 0
    # start near the float solution, then settle exactly
    n = max(0, math.floor(math.log(float(eps * (1 - gamma) / d)) / math.log(float(gamma))) - 2)
    while n > 0 and gamma ** (n - 1) / (1 - gamma) * d <= eps:
        n -= 1
    while gamma ** n / (1 - gamma) * d > eps:
        n += 1
    return n


@dataclass
class ValueIterationResult:
    table: ValueTable
    steps: int
    bound: Fraction
    initial_gap: Fraction  # d, grid estimate of |T V0 - V0|
    slack: Fraction
    step_errors: list

    def __iter__(self):
        yield self.table
        yield self.steps
        yield self.bound


def value_iteration(p: DPProblem, V0: ValueTable, eps, k: int) -> ValueIterationResult:
    """``V_n = T^n V_0`` with ``n`` fixed a priori; ``|V_n - V*| <= bound``."""
    eps = as_fraction(eps)
    if not 0 < p.gamma < 1:
        raise DegenerateDiscount(f"discount must lie strictly between 0 and 1, got {p.gamma}")
    V1 = bellman_apply(V0, p, k)
    base = V0.grid_values()
    d = max(abs(a - b) for a, b in zip(V1.values, base))
    slack = sup_error(p, k) + (V1.lip + V0.lip) * V0.covering_radius
    n = minimal_steps(p.gamma, d + slack, eps)
    errs = []
    V = V0
    for i in range(n):
        errs.append(step_error(p, V, k))
        V = V1 if i == 0 else bellman_apply(V, p, k)
    head = p.gamma ** n / (1 - p.gamma) * (d + slack)
    acc = sum((p.gamma ** (n - 1 - i) * e for i, e in enumerate(errs)), Fraction(0))
    return ValueIterationResult(V, n, head + acc, d, slack, errs)


@dataclass
class BlackwellReport:
    monotonicity: Fraction  # max of T[V] - T[W] over V <= W
    discounting: Fraction  # max |T[V + a] - T[V] - gamma a|
    contraction_excess: Fraction  # max sup|TV - TW| - gamma sup|V - W|
    contraction_ratio: float  # max sup|TV - TW| / sup|V - W|
    samples: int


def random_table(p: DPProblem, rng: random.Random, h, den: int = 64, lip=None) -> ValueTable:
    base = ValueTable.on(p.X, h, lambda x: Fraction(rng.randint(-den, den), den), 0)
    L = lipschitz_of_values(base.grid, base.values) if lip is None else as_fraction(lip)
    return base.like(base.values, L)


def blackwell_check(p: DPProblem, samples: int, k: int, h=Fraction(1, 4), seed: int = 0) -> BlackwellReport:
    """Monotonicity, discounting and contraction residuals on random tables."""
    rng = random.Random(seed)
    mono = disc = excess = Fraction(-10**9)
    ratio = 0.0
    for _ in range(samples):
        V = random_table(p, rng, h)
        W = V.like([v + Fraction(rng.randint(0, 32), 64) for v in V.values])
        L = max(V.lip, lipschitz_of_values(W.grid, W.values))
        V, W = V.like(V.values, L), W.like(W.values, L)
        a = Fraction(rng.randint(0, 64), 64)
        TV, TW = bellman_apply(V, p, k), bellman_apply(W, p, k)
        TVa = bellman_apply(V.like([v + a for v in V.values]), p, k)
        mono = max(mono, max(x - y for x, y in zip(TV.values, TW.values)))
        disc = max(disc, max(abs(x - y - p.gamma * a) for x, y in zip(TVa.values, TV.values)))
        gap = max(abs(x - y) for x, y in zip(V.values, W.values))
        tgap = max(abs(x - y) for x, y in zip(TV.values, TW.values))
        excess = max(excess, tgap - p.gamma * gap)
        if gap > 0:
            ratio = max(ratio, float(tgap / gap))
    return BlackwellReport(mono, disc, excess, ratio, samples)


def relaxed_functional(p: DPProblem, Vn: ValueTable, policy_lip) -> CallableFunctional:
    """``J[u] = inf_x r(x, u(x)) + gamma Vn(f(x, u(x)))`` with its modulus."""
    joint = next_lip(p, Vn.lip)
    Lu = max(Fraction(1), as_fraction(policy_lip))

    def value(u):
        def approx(n):
            if isinstance(p.X, FiniteSpace):
                pts = p.X.points
            else:
                lam = joint * Lu
                pts = p.X.approximation(Fraction(1, n) / lam if lam > 0 else p.X.radius).points
            best = None
            for x in pts:
                c = u(x)
                c = c if isinstance(c, tuple) else (c,)
                v = p.reward(x, c) + p.gamma * Vn(p.step(x, c))
                if best is None or v < best:
                    best = v
            return best

        return CReal(approx)

    alpha = Modulus.linear(joint) if joint > 0 else Modulus(lambda e: e)
    return CallableFunctional(value, alpha)


def relaxed_policy_opt(p: DPProblem, Vn: ValueTable, pspace: LipschitzSpaceDesc, k: int,
                       cap: int = 2_000_000, workers: int = 1) -> ExtremumResult:
    """Policy ``u*`` with ``J[u*] + 1/k >= J[u]`` for every policy in ``pspace``."""
    return approx_sup(relaxed_functional(p, Vn, pspace.lip), pspace, k, cap, workers)

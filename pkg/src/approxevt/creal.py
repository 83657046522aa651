"""Constructive reals as regular Cauchy sequences of exact rationals.

A :class:`CReal` is an operation ``n -> x(n)`` producing rationals with
``|x(n) - x(m)| <= 1/n + 1/m``.  Equivalently ``|x(n) - x| <= 1/n`` for the
represented real ``x``; every constructor here relies on that form.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

Rational = Fraction
Number = Union[int, Fraction]


def as_fraction(q) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are rejected: they silently carry binary rounding.
    """
    if isinstance(q, Fraction):
        return q
    if isinstance(q, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, str):
        s = q.strip()
        if "/" in s:
            p, d = s.split("/", 1)
            den = int(d)
            if den == 0:
                raise ZeroDivisionError(f"zero denominator in {q!r}")
            return Fraction(int(p), den)
        return Fraction(s)
    raise TypeError(f"cannot interpret {q!r} as an exact rational")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


class CReal:
    """A real number given by its rational approximations.

    ``approx(n)`` is memoized; construction never evaluates anything.
    """

    __slots__ = ("_fn", "_cache", "_lock", "exact")

    def __init__(self, fn: Callable[[int], Fraction], exact: Optional[Fraction] = None):
        self._fn = fn
        self._cache: dict[int, Fraction] = {}
        self._lock = threading.Lock()
        self.exact = exact

    def approx(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError("precision index must be >= 1")
        if self.exact is not None:
            return self.exact
        with self._lock:
            hit = self._cache.get(n)
        if hit is not None:
            return hit
        val = Fraction(self._fn(n))
        with self._lock:
            self._cache.setdefault(n, val)
        return val

    __call__ = approx

    def __repr__(self) -> str:
        if self.exact is not None:
            return f"CReal({format_rational(self.exact)})"
        return f"CReal(~{float(self.approx(64)):.6g})"

    # operator sugar delegating to the module functions
    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__


def _lift(x) -> CReal:
    return x if isinstance(x, CReal) else from_rational(as_fraction(x))


def from_rational(q: Number) -> CReal:
    q = as_fraction(q)
    return CReal(lambda n: q, exact=q)


def from_approximator(fn: Callable[[int], Fraction]) -> CReal:
    """Wrap ``fn`` where ``|fn(n) - x| <= 1/n``; regularity follows."""
    return CReal(fn)


def neg(x: CReal) -> CReal:
    if x.exact is not None:
        return from_rational(-x.exact)
    return CReal(lambda n: -x.approx(n))


def add(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return from_rational(x.exact + y.exact)
    return CReal(lambda n: x.approx(2 * n) + y.approx(2 * n))


def sub(x: CReal, y: CReal) -> CReal:
    return add(x, neg(y))


def _bound(x: CReal) -> int:
    # |x(j)| <= |x(1)| + 2 for every j by regularity
    return math.ceil(abs(x.approx(1)) + 2)


def mul(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return from_rational(x.exact * y.exact)
    b = max(_bound(x), _bound(y))
    return CReal(lambda n: x.approx(2 * b * n) * y.approx(2 * b * n))


def scale(x: CReal, q: Number) -> CReal:
    """Multiply by an exact rational; cheaper than :func:`mul`."""
    q = as_fraction(q)
    if x.exact is not None:
        return from_rational(x.exact * q)
    if q == 0:
        return from_rational(0)
    c = math.ceil(abs(q))
    return CReal(lambda n: q * x.approx(c * n))


def cmax(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return from_rational(max(x.exact, y.exact))
    return CReal(lambda n: max(x.approx(n), y.approx(n)))


def cmin(x: CReal, y: CReal) -> CReal:
    if x.exact is not None and y.exact is not None:
        return from_rational(min(x.exact, y.exact))
    return CReal(lambda n: min(x.approx(n), y.approx(n)))


@dataclass(frozen=True)
class LessWitnessed:
    n: int


@dataclass(frozen=True)
class Inconclusive:
    cap: int


ComparisonWitness = Union[LessWitnessed, Inconclusive]


def lt_witness(x: CReal, y: CReal, cap: int) -> ComparisonWitness:
    """Search ``n`` in 1, 2, 4, ..., cap for ``x(n) < y(n) - 2/n``.

    ``Inconclusive`` says nothing about whether ``x < y`` fails.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    n = 1
    while n <= cap:
        if x.approx(n) < y.approx(n) - Fraction(2, n):
            return LessWitnessed(n)
        n *= 2
    return Inconclusive(cap)


def le_upto(x: CReal, y: CReal, n: int) -> bool:
    """Finite check of ``x(m) <= y(m) + 2/m`` for ``m = 1..n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return all(x.approx(m) <= y.approx(m) + Fraction(2, m) for m in range(1, n + 1))


def round_to(q: Fraction, den: int) -> Fraction:
    """Nearest rational with denominator ``den`` (error <= 1/(2 den))."""
    return Fraction(math.floor(q * den + Fraction(1, 2)), den)


def exp_approx(q: Number, tol: Fraction) -> Fraction:
    """Rational within ``tol`` of ``exp(q)``.

    Taylor series on ``q/m`` with ``|q/m| <= 1/2`` and remainder bound, then
    ``m``-fold power.  Intermediate results are rounded to dyadics sized from
    ``tol`` so denominators stay bounded.
    """
    q = as_fraction(q)
    tol = as_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = max(1, math.ceil(abs(q) * 2))
    r = q / m
    # e^{|q|} <= 3^{m/2}... use a loose integer bound on intermediate magnitudes
    big = 3 ** ((m + 1) // 2 + 1)
    inner_tol = tol / (4 * m * big)
    bits = max(8, math.ceil(math.log2(float(1 / inner_tol))) + 8)
    den = 1 << bits
    # series for e^r, |r| <= 1/2: remainder <= 2 |r|^{N+1}/(N+1)!
    term = Fraction(1)
    total = Fraction(1)
    k = 0
    while True:
        k += 1
        term = term * r / k
        total += term
        if 2 * abs(term) * abs(r) / (k + 1) < inner_tol / 2:
            break
    e = round_to(total, den)
    out = Fraction(1)
    for _ in range(m):
        out = round_to(out * e, den)
    return out


def exp_upper(q: Number, tol: Fraction = Fraction(1, 10**12)) -> Fraction:
    """Rational upper bound on ``exp(q)``."""
    return exp_approx(q, tol) + tol


def exp(x: Number) -> CReal:
    """``exp`` of an exact rational as a constructive real."""
    q = as_fraction(x)
    if q == 0:
        return from_rational(1)
    return CReal(lambda n: exp_approx(q, Fraction(1, n)))


def sqrt(q: Number) -> CReal:
    """Square root of a non-negative rational (integer Newton on scaled value)."""
    q = as_fraction(q)
    if q < 0:
        raise ValueError("sqrt of a negative rational")

    def approx(n: int) -> Fraction:
        scale_ = 4 * n * n
        r = math.isqrt(math.floor(q * scale_ * scale_))
        # floor(sqrt(q) * scale_) within 1 of the truth
        return Fraction(r, scale_)

    return CReal(approx)

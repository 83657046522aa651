"""Reals that hide a binary sequence, and optimization problems built on them.

A sequence ``a_1, a_2, ...`` with at most one 1 defines

    b = 1/4 sum_{i >= 0} a_{2i+1} / (i + 1),   c = 1/4 sum_{i >= 1} a_{2i} / (i + 1).

Deciding ``b = 0`` or ``c = 0`` amounts to searching the whole sequence, so a
policy chosen by comparing ``b(n)`` with ``c(n)`` depends on ``n``.  The
approximate minimum of the two-well cost does not.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .creal import CReal, format_rational


@dataclass(frozen=True)
class BrouwerSequence:
    """Binary sequence (indices from 1) that is 1 only at ``one_index``."""

    one_index: Optional[int] = None

    def __post_init__(self):
        if self.one_index is not None and self.one_index < 1:
            raise ValueError("one_index must be >= 1")

    def __getitem__(self, j: int) -> int:
        return 1 if j == self.one_index else 0


def _partial(seq: BrouwerSequence, n: int, odd: bool) -> Fraction:
    total = Fraction(0)
    start = 0 if odd else 1
    for i in range(start, n):
        if seq[2 * i + 1 if odd else 2 * i]:
            total += Fraction(1, 4 * (i + 1))
    return total


def bc_reals(seq: BrouwerSequence) -> tuple[CReal, CReal]:
    """``(b, c)``; approximation ``n`` is the partial sum over ``i < n``.

    The omitted tail holds at most one term, of size at most ``1/(4(n+1))``.
    """
    b = CReal(lambda n: _partial(seq, n, True))
    c = CReal(lambda n: _partial(seq, n, False))
    return b, c


@dataclass
class SwitchedRun:
    policy: list
    cost: Fraction
    precision: int
    b: Fraction
    c: Fraction

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "cost": format_rational(self.cost),
            "precision": self.precision,
            "b_approx": format_rational(self.b),
            "c_approx": format_rational(self.c),
        }


def switched_sim(b: CReal, c: CReal, precision: int, horizon: int) -> SwitchedRun:
    """Greedy run of ``x+ = (1/2 + b) x`` (u = 1) or ``(1/2 + c) x`` (u = -1).

    Uses the device values ``b(precision)``, ``c(precision)``; ``u = 1`` when
    ``b(p) <= c(p)``.  Cost is ``sum_{k < horizon} x_k^2`` from ``x_0 = 1``.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    bp, cp = b.approx(precision), c.approx(precision)
    if bp >= Fraction(1, 4) or cp >= Fraction(1, 4):
        raise ValueError("approximations must stay below 1/4")
    x = Fraction(1)
    cost = Fraction(0)
    policy = []
    for _ in range(horizon):
        cost += x * x
        u = 1 if bp <= cp else -1
        policy.append(u)
        x *= Fraction(1, 2) + (bp if u == 1 else cp)
    return SwitchedRun(policy, cost, precision, bp, cp)


def two_well_min(b: CReal, c: CReal, k: int, precision: Optional[int] = None) -> Fraction:
    """Approximate ``inf_{u in [-1, 2]} min(u^2 + b, (u - 1)^2 + c)``.

    Grid spacing ``1/(4k)`` and slope bound 4 give ``1/(2k)``; ``b``, ``c``
    read at ``precision`` (default ``4k``) add ``1/precision``.  With the
    default the result is within ``3/(4k)`` of the infimum.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 4 * k if precision is None else precision
    bn, cn = b.approx(n), c.approx(n)
    best = None
    for j in range(12 * k + 1):
        u = Fraction(-1) + Fraction(j, 4 * k)
        v = min(u * u + bn, (u - 1) ** 2 + cn)
        if best is None or v < best:
            best = v
    return best


def two_well_error(k: int, precision: Optional[int] = None) -> Fraction:
    n = 4 * k if precision is None else precision
    return Fraction(1, 2 * k) + Fraction(1, n)


def demo(one_index: Optional[int], low: int = 4, high: int = 2**22, horizon: int = 20, k: int = 4) -> dict:
    """Policies and two-well values for one hidden sequence at two precisions."""
    b, c = bc_reals(BrouwerSequence(one_index))
    runs = [switched_sim(b, c, p, horizon) for p in (low, high)]
    wells = [two_well_min(b, c, k, p) for p in (low, high)]
    return {
        "one_index": one_index,
        "precisions": [low, high],
        "runs": [r.to_dict() for r in runs],
        "policies_differ": runs[0].policy != runs[1].policy,
        "two_well": [format_rational(w) for w in wells],
        "two_well_gap": format_rational(abs(wells[0] - wells[1])),
        "two_well_tolerance": format_rational(Fraction(2, k)),
        "two_well_agree": abs(wells[0] - wells[1]) <= Fraction(2, k),
    }


def demo_text(report: dict) -> str:
    lines = [f"hidden one_index: {report['one_index']}"]
    for r in report["runs"]:
        first = r["policy"][0]
        lines.append(
            f"precision {r['precision']}: b={r['b_approx']} c={r['c_approx']} "
            f"u={'+1' if first == 1 else '-1'} throughout, cost {r['cost']}"
        )
    lines.append(f"policies differ: {report['policies_differ']}")
    lines.append(
        f"two-well values {report['two_well'][0]} and {report['two_well'][1]}, "
        f"gap {report['two_well_gap']} <= {report['two_well_tolerance']}: {report['two_well_agree']}"
    )
    return "\n".join(lines)


def demo_json(report: dict) -> str:
    return json.dumps(report, indent=2)

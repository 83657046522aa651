"""Finite-horizon optimal control with state-feedback policies.

Trajectories come from explicit Euler steps with states rounded to a dyadic
grid.  For the closed loop ``F(x, t) = f(x, u(x), t)`` with Lipschitz
constant ``L' = L_f * max(1, L_u)`` the global error is bounded by

    C h (e^{L'T} - 1)/L' + steps * rho * e^{L'T},  C = (L' |f| + L_t)/2,

where ``|f|`` bounds the dynamics, ``L_t`` is its Lipschitz constant in time
and ``rho`` the rounding error per step.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from .creal import CReal, as_fraction, exp_upper, format_rational, round_to
from .errors import StateEscape
from .evt import CallableFunctional, ExtremumResult, Modulus, approx_inf
from .funcspace import LipschitzSpaceDesc
from .metric import BoxSpace



@dataclass(frozen=True)
class OCProblem:
    """Dynamics ``f(x, u, t)``, terminal cost ``phi(x)``, running cost
    ``lagrangian(x, u, t)`` on ``[t0, t1]`` from ``x0``.

    ``phi_modulus`` / ``lagrangian_modulus`` may be ``None`` for costs that
    are identically constant.  The Lagrangian modulus is taken with respect
    to ``max(|dx|, |du|, |dt|)``.
    """

    f: Callable
    lip_f: Fraction
    phi: Callable
    phi_modulus: Optional[Modulus]
    lagrangian: Callable
    lagrangian_modulus: Optional[Modulus]
    t0: Fraction
    t1: Fraction
    x0: tuple
    X: BoxSpace
    U: BoxSpace
    f_bound: Fraction
    f_time_lip: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("lip_f", "t0", "t1", "f_bound", "f_time_lip"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        object.__setattr__(self, "x0", tuple(as_fraction(c) for c in self.x0))
        if self.t1 <= self.t0:
            raise ValueError("need t0 < t1")
        if not self.X.contains(self.x0):
            raise ValueError("x0 must lie in the state box")

    @property
    def horizon(self) -> Fraction:
        return self.t1 - self.t0


@dataclass
class Trajectory:
    times: list
    states: list
    controls: list
    error_bound: Fraction

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        nx, nu = len(self.states[0]), len(self.controls[0])
        w.writerow(["t"] + [f"x{i}" for i in range(nx)] + [f"u{i}" for i in range(nu)])
        for t, x, u in zip(self.times, self.states, self.controls):
            w.writerow([format_rational(t)] + [format_rational(c) for c in x] + [format_rational(c) for c in u])
        return buf.getvalue()


def _control(u, x) -> tuple:
    if callable(u):
        v = u(x)
    else:
        v = u
    if isinstance(v, tuple):
        return tuple(as_fraction(c) for c in v)
    return (as_fraction(v),)


def _policy_lip(u) -> Fraction:
    return as_fraction(getattr(u, "lip", 0))


def _rounding_den(steps: int, T: Fraction) -> int:
    # steps * rho <= h/2 with rho = 1/(2 den)
    target = Fraction(steps * steps) / T
    return 1 << max(1, math.ceil(math.log2(float(target) + 1)))


def euler_error_bound(p: OCProblem, steps: int, policy_lip, den: Optional[int] = None,
                      rho: Optional[Fraction] = None) -> Fraction:
    """Global Euler error; ``rho`` is the per-step rounding error (default: worst case for ``den``)."""
    T = p.horizon
    h = T / steps
    den = den or _rounding_den(steps, T)
    lp = p.lip_f * max(Fraction(1), as_fraction(policy_lip))
    C = (lp * p.f_bound + p.f_time_lip) / 2
    rho = Fraction(1, 2 * den) if rho is None else rho
    if lp == 0:
        return C * h * T + steps * rho
    growth = exp_upper(lp * T)
    return C * h * (growth - 1) / lp + steps * rho * growth


def integrate(p: OCProblem, u, steps: int) -> Trajectory:
    """Euler trajectory of the closed loop with its a-priori error bound."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    T = p.horizon
    h = T / steps
    den = _rounding_den(steps, T)
    x = p.x0
    rho = Fraction(0)
    times, states, controls = [p.t0], [x], []
    for i in range(steps):
        t = p.t0 + i * h
        c = _control(u, x)
        controls.append(c)
        dx = p.f(x, c, t)
        raw = [xi + h * as_fraction(di) for xi, di in zip(x, dx)]
        x = tuple(round_to(v, den) for v in raw)
        rho = max(rho, max(abs(a - b) for a, b in zip(x, raw)))
        if not p.X.contains(x):
            raise StateEscape(i + 1, x)
        times.append(t + h)
        states.append(x)
    controls.append(_control(u, x))
    return Trajectory(times, states, controls, euler_error_bound(p, steps, _policy_lip(u), den, rho))


def steps_for_precision(p: OCProblem, policy_lip, n: int, start: int = 1) -> int:
    """Smallest power-of-two multiple of ``start`` meeting the cost budget ``1/n``.

    A third of the budget each goes to the terminal cost, to node errors in
    the running cost and to the trapezoid rule.
    """
    T = p.horizon
    Lu = max(Fraction(1), as_fraction(policy_lip))
    eps = Fraction(1, 3 * n)
    steps = max(1, start)
    while True:
        E = euler_error_bound(p, steps, policy_lip)
        h = T / steps
        ok = True
        if p.phi_modulus is not None and E > p.phi_modulus(eps):
            ok = False
        if p.lagrangian_modulus is not None:
            w = p.lagrangian_modulus(eps / T)
            if Lu * E > w or Lu * max(p.f_bound, Fraction(1)) * h > w:
                ok = False
        if ok:
            return steps
        steps *= 2


def _trapezoid(p: OCProblem, traj: Trajectory) -> Fraction:
    vals = [as_fraction(p.lagrangian(x, c, t)) for t, x, c in zip(traj.times, traj.states, traj.controls)]
    h = p.horizon / (len(vals) - 1)
    return h * (sum(vals) - (vals[0] + vals[-1]) / 2)


def cost(p: OCProblem, traj: Optional[Trajectory], u) -> CReal:
    """``phi(x(t1)) + integral of the Lagrangian`` along the closed loop.

    ``traj`` (if given) seeds the step count; approximation ``n`` integrates
    with enough steps for a total error of ``1/n``.
    """
    start = len(traj.times) - 1 if traj is not None else 1
    lip = _policy_lip(u)

    def approx(n: int) -> Fraction:
        steps = steps_for_precision(p, lip, n, start)
        tr = traj if traj is not None and len(traj.times) - 1 == steps else integrate(p, u, steps)
        return as_fraction(p.phi(tr.states[-1])) + _trapezoid(p, tr)

    return CReal(approx)


def trajectory_gain(p: OCProblem, policy_lip) -> Fraction:
    """``G`` with ``sup |x_u - x_v| <= G * sup |u - v|`` (Gronwall)."""
    T = p.horizon
    lp = p.lip_f * max(Fraction(1), as_fraction(policy_lip))
    return p.lip_f * T * exp_upper(lp * T)


def functional_modulus(p: OCProblem, policy_lip=1) -> Modulus:
    """Modulus of ``J[u]`` over ``policy_lip``-Lipschitz policies (sup metric).

    ``alpha(eps) = min(w_phi(eps/2)/G, w_L(eps/(2T)) / (max(1, L_u) G + 1))``.
    """
    G = trajectory_gain(p, policy_lip)
    Lu = max(Fraction(1), as_fraction(policy_lip))
    T = p.horizon

    def alpha(eps: Fraction) -> Fraction:
        cands = []
        if p.phi_modulus is not None and G > 0:
            cands.append(p.phi_modulus(eps / 2) / G)
        if p.lagrangian_modulus is not None:
            cands.append(p.lagrangian_modulus(eps / (2 * T)) / (Lu * G + 1))
        # constant costs: any gap is fine, but a net still needs a scale
        return min(cands) if cands else eps

    return Modulus(alpha)


def policy_functional(p: OCProblem, policy_lip) -> CallableFunctional:
    return CallableFunctional(lambda u: cost(p, None, u), functional_modulus(p, policy_lip))


def optimize_policy(p: OCProblem, pspace: LipschitzSpaceDesc, k: int, cap: int = 2_000_000,
                    workers: int = 1) -> ExtremumResult:
    """Policy ``u*`` with ``J[u*] - 1/k <= J[u]`` for every policy in ``pspace``."""
    return approx_inf(policy_functional(p, pspace.lip), pspace, k, cap, workers)

"""Built-in problem families and their JSON config parsing.

Configs carry rationals as ``"p/q"`` or decimal strings (integers are also
accepted).  Every dictionary is checked against the keys listed here and
unknown keys are rejected.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np

from . import adp, dp, evt, optctrl
from .creal import as_fraction
from .errors import ConfigInvalid
from .funcspace import LipschitzSpaceDesc
from .metric import BoxSpace, FiniteSpace


def rational(v, what: str) -> Fraction:
    try:
        return as_fraction(v)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise ConfigInvalid(f"{what}: not a rational ({v!r}): {e}") from None


def natural(v, what: str, minimum: int = 1) -> int:
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise ConfigInvalid(f"{what}: expected an integer >= {minimum}, got {v!r}")
    return v


def check_keys(d: Any, allowed, what: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigInvalid(f"{what}: expected an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigInvalid(f"{what}: unknown keys {extra}")
    return d


def merged(defaults: dict, given: dict, what: str) -> dict:
    check_keys(given, defaults, what)
    out = dict(defaults)
    out.update(given)
    return out


def space(d, what: str):
    """``{"interval": [lo, hi]}``, ``{"center": [...], "radius": r}`` or ``{"points": [[...], ...]}``."""
    check_keys(d, ("interval", "center", "radius", "points"), what)
    if "interval" in d:
        lo, hi = (rational(v, what) for v in d["interval"])
        if hi <= lo:
            raise ConfigInvalid(f"{what}: empty interval")
        return BoxSpace.interval(lo, hi)
    if "center" in d:
        r = rational(d.get("radius"), f"{what}.radius")
        if r <= 0:
            raise ConfigInvalid(f"{what}: radius must be positive")
        return BoxSpace(tuple(rational(c, f"{what}.center") for c in d["center"]), r)
    if "points" in d:
        try:
            return FiniteSpace(tuple(tuple(rational(c, f"{what}.points") for c in p) for p in d["points"]))
        except (ValueError, TypeError) as e:
            raise ConfigInvalid(f"{what}: {e}") from None
    raise ConfigInvalid(f"{what}: needs interval, center/radius or points")


def _abs_max(box) -> Fraction:
    return max(max(abs(v) for v in box.lower), max(abs(v) for v in box.upper))


# --- function spaces and functionals ---------------------------------------

FUNCSPACE_DEFAULTS = {"domain": {"interval": ["0", "1"]}, "lip": "1", "bound": "1"}


def function_space(d) -> LipschitzSpaceDesc:
    d = merged(FUNCSPACE_DEFAULTS, d, "problem")
    dom = space(d["domain"], "problem.domain")
    lip, bound = rational(d["lip"], "problem.lip"), rational(d["bound"], "problem.bound")
    if lip <= 0 or bound <= 0:
        raise ConfigInvalid("problem: lip and bound must be positive")
    return LipschitzSpaceDesc(dom, lip, bound)


EVT_DEFAULTS = dict(FUNCSPACE_DEFAULTS, functional={"type": "integral", "integrand": "f"}, mode="inf")

INTEGRANDS = ("f", "f_minus_x_sq", "neg_f_sq")


def functional(d, sp: LipschitzSpaceDesc) -> evt.Functional:
    check_keys(d, ("type", "x0", "integrand"), "problem.functional")
    kind = d.get("type")
    if kind == "point":
        x0 = tuple(rational(c, "problem.functional.x0") for c in d.get("x0", []))
        if len(x0) != sp.domain.dim or not sp.domain.contains(x0):
            raise ConfigInvalid("problem.functional.x0 must be a point of the domain")
        return evt.PointFunctional(x0)
    if kind == "integral":
        if not isinstance(sp.domain, BoxSpace):
            raise ConfigInvalid("integral functionals need a box domain")
        name = d.get("integrand", "f")
        K = sp.bound
        if name == "f":
            return evt.IntegralFunctional(sp.domain, lambda x, y: y, 0, 1, sp.lip,
                                          quadratic=(lambda x: 0, lambda x: 1, lambda x: 0))
        if name == "f_minus_x_sq":
            if sp.domain.dim != 1:
                raise ConfigInvalid("f_minus_x_sq needs a 1D domain")
            m = _abs_max(sp.domain)
            return evt.IntegralFunctional(sp.domain, lambda x, y: (y - x[0]) ** 2, 2 * (K + m), 2 * (K + m), sp.lip,
                                          quadratic=(lambda x: 1, lambda x: -2 * x[0], lambda x: x[0] ** 2))
        if name == "neg_f_sq":
            return evt.IntegralFunctional(sp.domain, lambda x, y: -y * y, 0, 2 * K, sp.lip,
                                          quadratic=(lambda x: -1, lambda x: 0, lambda x: 0))
        raise ConfigInvalid(f"problem.functional.integrand must be one of {INTEGRANDS}")
    raise ConfigInvalid("problem.functional.type must be 'point' or 'integral'")


# --- optimal control ---------------------------------------------------------

OC_DEFAULTS = {
    "a": "0", "b": "1", "q": "1", "r": "1", "p": "0",
    "t0": "0", "t1": "1/4", "x0": ["1"],
    "X": {"interval": ["1/2", "3/2"]}, "U": {"interval": ["-1/2", "1/2"]},
    "task": "optimize", "steps": 64, "gain": "0",
    "policy_lip": "1/4", "policy_bound": "1/2",
}


def oc_problem(d):
    """Scalar ``x' = a x + b u`` with ``L = q x^2 + r u^2`` and ``phi = p x^2``."""
    d = merged(OC_DEFAULTS, d, "problem")
    a, b, q, r, pp = (rational(d[k], f"problem.{k}") for k in ("a", "b", "q", "r", "p"))
    X, U = space(d["X"], "problem.X"), space(d["U"], "problem.U")
    if not isinstance(X, BoxSpace) or not isinstance(U, BoxSpace) or X.dim != 1 or U.dim != 1:
        raise ConfigInvalid("optctrl built-ins need 1D interval X and U")
    mx, mu = _abs_max(X), _abs_max(U)
    lagr_lip = 2 * abs(q) * mx + 2 * abs(r) * mu
    phi_lip = 2 * abs(pp) * mx
    prob = optctrl.OCProblem(
        f=lambda x, u, t: (a * x[0] + b * u[0],),
        lip_f=abs(a) + abs(b),
        phi=lambda x: pp * x[0] ** 2,
        phi_modulus=evt.Modulus.linear(phi_lip) if phi_lip > 0 else None,
        lagrangian=lambda x, u, t: q * x[0] ** 2 + r * u[0] ** 2,
        lagrangian_modulus=evt.Modulus.linear(lagr_lip) if lagr_lip > 0 else None,
        t0=rational(d["t0"], "problem.t0"),
        t1=rational(d["t1"], "problem.t1"),
        x0=tuple(rational(c, "problem.x0") for c in d["x0"]),
        X=X,
        U=U,
        f_bound=abs(a) * mx + abs(b) * mu,
    )
    pspace = LipschitzSpaceDesc(X, rational(d["policy_lip"], "problem.policy_lip"),
                                rational(d["policy_bound"], "problem.policy_bound"))
    if d["task"] not in ("integrate", "cost", "optimize"):
        raise ConfigInvalid("problem.task must be integrate, cost or optimize")
    return prob, pspace, d


# --- dynamic programming -----------------------------------------------------

DP_DEFAULTS = {
    "X": {"interval": ["0", "1"]}, "U": {"interval": ["-1/4", "1/4"]},
    "reward": {"qx": "1", "qu": "1"}, "transition": {"a": "1/2", "b": "1/2"},
    "reward_table": None, "transition_table": None,
    "gamma": "1/2", "eps": "1/16", "grid_radius": "1/32",
    "policy_lip": "1/4", "policy_bound": "1/4",
}


def dp_problem(d):
    """Box problems: ``r = -qx x^2 - qu u^2``, ``f = clip_X(a x + b u)``.
    Finite problems: ``reward_table[i][j]`` and ``transition_table[i][j]``
    (an index into X) for state ``i`` and control ``j``."""
    d = merged(DP_DEFAULTS, d, "problem")
    X, U = space(d["X"], "problem.X"), space(d["U"], "problem.U")
    gamma = rational(d["gamma"], "problem.gamma")
    if d["reward_table"] is not None or d["transition_table"] is not None:
        if not isinstance(X, FiniteSpace) or not isinstance(U, FiniteSpace):
            raise ConfigInvalid("tables need finite X and U")
        R = d["reward_table"]
        T = d["transition_table"]
        nX, nU = len(X.points), len(U.points)
        if not (isinstance(R, list) and isinstance(T, list) and len(R) == nX and len(T) == nX
                and all(isinstance(row, list) and len(row) == nU for row in R + T)):
            raise ConfigInvalid("reward/transition tables must be |X| x |U|")
        R = [[rational(v, "problem.reward_table") for v in row] for row in R]
        T = [[natural(v, "problem.transition_table", 0) for v in row] for row in T]
        if any(v >= nX for row in T for v in row):
            raise ConfigInvalid("problem.transition_table: index out of range")
        xi = {p: i for i, p in enumerate(X.points)}
        ui = {p: j for j, p in enumerate(U.points)}
        prob = dp.DPProblem(X, U, lambda x, u: R[xi[x]][ui[u]], lambda x, u: X.points[T[xi[x]][ui[u]]],
                            gamma, 0, 0)
    else:
        if not isinstance(X, BoxSpace) or not isinstance(U, BoxSpace) or X.dim != 1 or U.dim != 1:
            raise ConfigInvalid("box DP built-ins need 1D intervals")
        rw = merged({"qx": "1", "qu": "1"}, d["reward"], "problem.reward")
        tr = merged({"a": "1/2", "b": "1/2"}, d["transition"], "problem.transition")
        qx, qu = rational(rw["qx"], "problem.reward.qx"), rational(rw["qu"], "problem.reward.qu")
        a, b = rational(tr["a"], "problem.transition.a"), rational(tr["b"], "problem.transition.b")
        mx, mu = _abs_max(X), _abs_max(U)
        prob = dp.DPProblem(
            X, U,
            lambda x, u: -qx * x[0] ** 2 - qu * u[0] ** 2,
            lambda x, u: X.clip((a * x[0] + b * u[0],)),
            gamma,
            2 * abs(qx) * mx + 2 * abs(qu) * mu,
            abs(a) + abs(b),
        )
    pspace = LipschitzSpaceDesc(X, rational(d["policy_lip"], "problem.policy_lip"),
                                rational(d["policy_bound"], "problem.policy_bound"))
    return prob, pspace, d


# --- ADP ---------------------------------------------------------------------

ADP_DEFAULTS = {
    "a": "1/2", "b": "1", "q": "1", "R": "1",
    "X": {"interval": ["-1", "1"]}, "U": {"interval": ["-1/2", "1/2"]},
    "grid_step": "1/100", "tol": "1/10000", "max_iter": 200,
    "horizon": 60, "u0_gain": "0",
    "x": "3/5", "u_init": "0", "iters": 200, "fd_step": None, "relaxation": "1/2",
}


def adp_problem(d):
    d = merged(ADP_DEFAULTS, d, "problem")
    vals = {k: rational(d[k], f"problem.{k}") for k in ("a", "b", "q", "R")}
    if vals["R"] <= 0:
        raise ConfigInvalid("problem.R must be positive")
    X, U = space(d["X"], "problem.X"), space(d["U"], "problem.U")
    if not isinstance(X, BoxSpace) or X.dim != 1:
        raise ConfigInvalid("ADP built-ins need a 1D interval X")
    prob = adp.linear_problem(vals["a"], vals["b"], vals["q"], vals["R"], X, U)
    return prob, vals, d


def riccati_gain(vals) -> float:
    P = adp.riccati_root(vals["a"], vals["b"], vals["q"], vals["R"])
    a, b, R = (float(vals[k]) for k in ("a", "b", "R"))
    return -a * b * P / (R + b * b * P)


def u0_policy(gain):
    g = float(gain)
    return lambda Z: np.asarray(Z, dtype=float)[:, 0:1] * g


# --- mollification -----------------------------------------------------------

MOLLIFY_DEFAULTS = {
    "function": "abs", "lip": "1", "domain": {"interval": ["-2", "2"]},
    "quad_points": 200, "samples": 201,
}

FUNCTIONS = {
    "abs": lambda L: (lambda x: L * abs(x[0])),
    "identity": lambda L: (lambda x: L * x[0]),
    "constant": lambda L: (lambda x: L),
}

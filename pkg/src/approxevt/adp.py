"""Adaptive dynamic programming for ``x+ = f(x) + g(x) u`` with cost
``q(x) + u'Ru``: value iteration, policy iteration and the Heydari
fixed-point control update.

These run in float64.  Value tables over one-dimensional state grids use
linear interpolation; higher-dimensional grids use the Lipschitz midpoint
extension with the slope estimated from the table.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergentRollout, MaxIterExceeded, NoContraction
from .metric import BoxSpace, finite_approximation


@dataclass
class ADPProblem:
    """``f(X) -> (B, d)``, ``g(X) -> (B, d, m)``, ``q(X) -> (B,)`` on batches."""

    f: Callable
    g: Callable
    q: Callable
    R: np.ndarray
    X: BoxSpace
    U: BoxSpace

    def __post_init__(self):
        self.R = np.atleast_2d(np.asarray(self.R, dtype=float))
        if not np.allclose(self.R, self.R.T) or np.any(np.linalg.eigvalsh(self.R) <= 0):
            raise ValueError("R must be symmetric positive definite")

    @property
    def state_dim(self) -> int:
        return self.X.dim

    @property
    def control_dim(self) -> int:
        return self.U.dim

    def successor(self, X: np.ndarray, Uc: np.ndarray) -> np.ndarray:
        """``f(x) + g(x) u`` for states ``(B, d)`` and controls ``(B, C, m)``."""
        return self.f(X)[:, None, :] + np.einsum("bdm,bcm->bcd", self.g(X), Uc)

    def stage(self, X: np.ndarray, Uc: np.ndarray) -> np.ndarray:
        return self.q(X)[:, None] + np.einsum("bcm,mn,bcn->bc", Uc, self.R, Uc)


def linear_problem(a, b, q, R, X: BoxSpace, U: BoxSpace) -> ADPProblem:
    """Scalar ``x+ = a x + b u`` with cost ``q x^2 + R u^2``."""
    a, b, q, R = float(a), float(b), float(q), float(R)
    return ADPProblem(
        f=lambda Z: a * Z,
        g=lambda Z: np.full((Z.shape[0], 1, 1), b),
        q=lambda Z: q * Z[:, 0] ** 2,
        R=np.array([[R]]),
        X=X,
        U=U,
    )


def riccati_root(a, b, q, R) -> float:
    """Positive root of the scalar discrete Riccati equation (undiscounted)."""
    a, b, q, R = float(a), float(b), float(q), float(R)
    # b^2 P^2 + (R - a^2 R - q b^2) P - q R = 0
    A, B, C = b * b, R - a * a * R - q * b * b, -q * R
    return (-B + np.sqrt(B * B - 4 * A * C)) / (2 * A)


class Table:
    """Function on a state grid with interpolation."""

    def __init__(self, grid: np.ndarray, values: np.ndarray):
        self.grid = np.asarray(grid, dtype=float).reshape(len(grid), -1)
        self.values = np.asarray(values, dtype=float)
        self._lip = None

    @property
    def dim(self):
        return self.grid.shape[1]

    @property
    def lip(self) -> float:
        if self._lip is None:
            G = self.grid
            d = np.abs(G[:, None, :] - G[None, :, :]).max(axis=2)
            dv = np.abs(self.values.reshape(len(G), -1)[:, None, :] - self.values.reshape(len(G), -1)[None, :, :]).max(axis=2)
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(d > 0, dv / np.where(d > 0, d, 1), 0)
            self._lip = float(s.max())
        return self._lip

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        shape = Z.shape[:-1]
        Z = Z.reshape(-1, self.dim)
        vals = self.values.reshape(len(self.grid), -1)
        if self.dim == 1:
            out = np.stack([np.interp(Z[:, 0], self.grid[:, 0], vals[:, j]) for j in range(vals.shape[1])], axis=1)
        else:
            rho = np.abs(Z[:, None, :] - self.grid[None, :, :]).max(axis=2) * self.lip
            out = np.stack(
                [0.5 * ((vals[None, :, j] - rho).max(axis=1) + (vals[None, :, j] + rho).min(axis=1)) for j in range(vals.shape[1])],
                axis=1,
            )
        if self.values.ndim == 1:
            return out[:, 0].reshape(shape)
        return out.reshape(shape + (vals.shape[1],))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        vals = self.values.reshape(len(self.grid), -1)
        w.writerow([f"x{j}" for j in range(self.dim)] + [f"v{j}" for j in range(vals.shape[1])])
        for p, v in zip(self.grid, vals):
            w.writerow([repr(float(c)) for c in p] + [repr(float(c)) for c in v])
        return buf.getvalue()


def state_grid(p: ADPProblem, step) -> np.ndarray:
    return np.array(finite_approximation(p.X, _k_of(step)), dtype=float)


def _k_of(step) -> int:
    return max(1, int(round(1 / float(step))))


def control_net(p: ADPProblem, k: int) -> np.ndarray:
    return np.array(finite_approximation(p.U, k), dtype=float)


def _greedy(p: ADPProblem, V: Table, grid: np.ndarray, net: np.ndarray):
    """Arg-inf over the control net (first index on ties) and the attained value."""
    Uc = np.broadcast_to(net, (len(grid),) + net.shape)
    tot = p.stage(grid, Uc) + V(p.successor(grid, Uc))
    j = np.argmin(tot, axis=1)
    return net[j], tot[np.arange(len(grid)), j]


def vi_step(V: Table, p: ADPProblem, k: int, net: Optional[np.ndarray] = None):
    """One VI-ADP update: greedy policy on the net and the new table."""
    net = control_net(p, k) if net is None else net
    u, val = _greedy(p, V, V.grid, net)
    return Table(V.grid, u), Table(V.grid, val)


@dataclass
class TraceRow:
    iteration: int
    change: float
    residual: float


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "sup_change", "hjb_residual"])
    for r in trace:
        w.writerow([r.iteration, repr(r.change), repr(r.residual)])
    return buf.getvalue()


@dataclass
class ADPResult:
    value: Table
    policy: Table
    residual: float
    iterations: int
    trace: list = field(default_factory=list)

    def __iter__(self):
        yield self.value
        yield self.policy
        yield self.residual

    def quadratic_coefficient(self) -> float:
        """Least-squares ``P`` in ``V(x) ~ P x^2`` (scalar states)."""
        x = self.value.grid[:, 0]
        return float((self.value.values * x * x).sum() / (x ** 4).sum())


def hjb_residual(p: ADPProblem, V: Table, net: np.ndarray) -> float:
    _, val = _greedy(p, V, V.grid, net)
    return float(np.abs(V.values - val).max())


def vi_run(p: ADPProblem, tol: float, max_iter: int, k: int, grid_step=0.01,
           V0: Optional[Table] = None) -> ADPResult:
    """Iterate :func:`vi_step` from ``V0`` (default 0) until the sup change is ``<= tol``."""
    grid = state_grid(p, grid_step)
    net = control_net(p, k)
    V = V0 if V0 is not None else Table(grid, np.zeros(len(grid)))
    trace = []
    change = float("inf")
    for i in range(1, max_iter + 1):
        pol, Vn = vi_step(V, p, k, net)
        change = float(np.abs(Vn.values - V.values).max())
        V = Vn
        res = hjb_residual(p, V, net)
        trace.append(TraceRow(i, change, res))
        if change <= tol:
            return ADPResult(V, pol, res, i, trace)
    raise MaxIterExceeded(max_iter, change)


def rollout_values(p: ADPProblem, policy: Table, grid: np.ndarray, horizon: int,
                   divergence_bound: float = 1e6):
    """Truncated closed-loop cost from each grid state; also the last stage cost."""
    Z = grid.copy()
    total = np.zeros(len(grid))
    last = np.zeros(len(grid))
    for t in range(horizon):
        u = policy(Z).reshape(len(Z), 1, -1)
        last = p.stage(Z, u)[:, 0]
        total += last
        Z = p.successor(Z, u)[:, 0, :]
        if not np.all(np.isfinite(total)) or total.max() > divergence_bound:
            raise DivergentRollout(f"rollout cost exceeded {divergence_bound} at step {t + 1}")
    return total, float(np.abs(last).max())


def pi_run(p: ADPProblem, u0: Table, horizon: int, tol: float, k: int, grid_step=0.01,
           max_iter: int = 100, divergence_bound: float = 1e6) -> ADPResult:
    """Policy iteration with truncated-rollout evaluation."""
    grid = state_grid(p, grid_step)
    net = control_net(p, k)
    pol = Table(grid, u0(grid).reshape(len(grid), -1))
    trace = []
    for i in range(1, max_iter + 1):
        vals, tail = rollout_values(p, pol, grid, horizon, divergence_bound)
        V = Table(grid, vals)
        u, _ = _greedy(p, V, grid, net)
        change = float(np.abs(u - pol.values).max())
        pol = Table(grid, u)
        res = hjb_residual(p, V, net)
        trace.append(TraceRow(i, change, res))
        if change <= tol:
            vals, tail = rollout_values(p, pol, grid, horizon, divergence_bound)
            V = Table(grid, vals)
            return ADPResult(V, pol, hjb_residual(p, V, net), i, trace)
    raise MaxIterExceeded(max_iter, change)


@dataclass
class HeydariResult:
    control: np.ndarray
    ratio: float
    iterations: int
    residual: float  # |u - F[u]| at the returned u


def gradient(V: Table, z: np.ndarray, h: float) -> np.ndarray:
    """Central differences of the interpolated table at ``z``."""
    z = np.asarray(z, dtype=float)
    out = np.empty(len(z))
    for i in range(len(z)):
        e = np.zeros(len(z))
        e[i] = h
        out[i] = (float(V((z + e)[None, :])[0]) - float(V((z - e)[None, :])[0])) / (2 * h)
    return out


def heydari_map(p: ADPProblem, V: Table, x: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    """``F[u] = -1/2 R^-1 g(x)' grad V(f(x) + g(x) u)``."""
    X = x[None, :]
    gx = p.g(X)[0]
    z = p.f(X)[0] + gx @ u
    return -0.5 * np.linalg.solve(p.R, gx.T @ gradient(V, z, h))


def heydari_iterate(p: ADPProblem, V: Table, x, u_init, iters: int, fd_step=None,
                    relaxation: float = 1.0, floor: float = 1e-12) -> HeydariResult:
    """Fixed-point iteration ``u <- (1 - beta) u + beta F[u]`` at state ``x``.

    ``beta = relaxation`` (1 is the plain update; the fixed point does not
    depend on it).  The empirical ratio of successive step sizes is
    reported; steps below ``floor`` are ignored as converged.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u = np.atleast_1d(np.asarray(u_init, dtype=float))
    if fd_step is None:
        gs = np.diff(np.unique(V.grid[:, 0]))
        fd_step = float(gs.min()) / 2
    h = float(fd_step)
    beta = float(relaxation)
    prev = None
    ratio = 0.0
    n = 0
    for n in range(1, iters + 1):
        new = (1 - beta) * u + beta * heydari_map(p, V, x, u, h)
        step = float(np.abs(new - u).max())
        u = new
        if prev is not None and prev > floor:
            ratio = max(ratio, step / prev)
        if step <= floor:
            break
        prev = step
    if ratio >= 1:
        raise NoContraction(ratio)
    res = float(np.abs(u - heydari_map(p, V, x, u, h)).max())
    return HeydariResult(u, ratio, n, res)

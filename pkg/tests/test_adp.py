from fractions import Fraction as F

import numpy as np
import pytest

from approxevt import adp
from approxevt.errors import DivergentRollout, MaxIterExceeded, NoContraction
from approxevt.metric import BoxSpace

# positive root of P^2 - P/4 - 1 = 0, i.e. (1 + sqrt(65))/8
RICCATI_P = 1.1327822185373186
X = BoxSpace.interval(-1, 1)
U = BoxSpace.interval(F(-1, 2), F(1, 2))
K = 1000
TOL = 1e-4


def riccati():
    return adp.linear_problem(F(1, 2), 1, 1, 1, X, U)


def quadratic_table(P, n=401):
    x = np.linspace(-1, 1, n)
    return adp.Table(x, P * x * x)


def zero_policy(Z):
    return np.zeros((len(Z), 1))


def test_riccati_root_matches_frozen_value():
    assert adp.riccati_root(F(1, 2), 1, 1, 1) == pytest.approx(RICCATI_P, abs=1e-15)
    P = RICCATI_P
    assert abs(P * P - P / 4 - 1) < 1e-14


def test_vi_step_from_zero_on_static_problem():
    # f = 0, g = 1: the first sweep picks u = 0 and V_1 = x^2
    p = adp.linear_problem(0, 1, 1, 1, X, U)
    grid = adp.state_grid(p, F(1, 10))
    pol, V1 = adp.vi_step(adp.Table(grid, np.zeros(len(grid))), p, K)
    assert np.abs(pol.values).max() == 0
    assert np.allclose(V1.values, grid[:, 0] ** 2)


def test_zero_state_is_preserved():
    res = adp.vi_run(riccati(), TOL, 200, K)
    i = int(np.argmin(np.abs(res.value.grid[:, 0])))
    assert res.value.grid[i, 0] == 0
    assert res.value.values[i] == 0 and res.policy.values[i] == 0


def test_vi_static_problem_converges_immediately():
    p = adp.linear_problem(0, 1, 1, 1, X, U)
    res = adp.vi_run(p, TOL, 200, K)
    assert res.iterations <= 2
    assert np.allclose(res.value.values, res.value.grid[:, 0] ** 2)


def test_vi_reaches_riccati_coefficient():
    res = adp.vi_run(riccati(), TOL, 200, K)
    assert abs(res.quadratic_coefficient() - RICCATI_P) <= 1e-3
    assert res.residual <= 5 * TOL


def test_vi_is_monotone_from_zero():
    p = riccati()
    k = 200
    grid = adp.state_grid(p, F(1, 50))
    V = adp.Table(grid, np.zeros(len(grid)))
    for _ in range(8):
        _, W = adp.vi_step(V, p, k)
        assert np.all(W.values >= V.values - 2 / k)
        V = W


def test_vi_max_iter():
    with pytest.raises(MaxIterExceeded) as e:
        adp.vi_run(riccati(), 1e-12, 2, K)
    assert e.value.iterations == 2 and e.value.residual > 1e-12


def test_pi_agrees_with_vi():
    vi = adp.vi_run(riccati(), TOL, 200, K)
    pi = adp.pi_run(riccati(), zero_policy, 60, TOL, K)
    assert np.abs(vi.value.values - pi.value.values).max() <= 10 * TOL
    assert abs(pi.quadratic_coefficient() - RICCATI_P) <= 1e-3


def test_pi_from_optimal_policy_barely_moves():
    gain = -0.5 * RICCATI_P / (1 + RICCATI_P)
    # the state grid must be fine enough that interpolation does not dominate the 1/k net error
    res = adp.pi_run(riccati(), lambda Z: gain * Z[:, 0:1], 60, 1.0, K, grid_step=F(1, 500))
    grid = res.policy.grid[:, 0]
    assert np.abs(res.policy.values[:, 0] - gain * grid).max() <= 2 / K


def test_pi_static_problem_is_single_stage_cost():
    p = adp.linear_problem(0, 1, 1, 1, X, U)
    grid = adp.state_grid(p, F(1, 10))
    vals, tail = adp.rollout_values(p, adp.Table(grid, np.zeros((len(grid), 1))), grid, 5)
    assert np.allclose(vals, grid[:, 0] ** 2)
    assert tail == 0


def test_pi_divergent_rollout():
    p = adp.linear_problem(2, 1, 1, 1, BoxSpace.interval(-1, 1), U)
    with pytest.raises(DivergentRollout):
        adp.pi_run(p, zero_policy, 60, TOL, 10, grid_step=F(1, 4), divergence_bound=1e6)


def test_heydari_fixed_point_relaxed():
    V = quadratic_table(RICCATI_P)
    x = 0.6
    r = adp.heydari_iterate(riccati(), V, [x], [0.0], 200, relaxation=0.5)
    exact = -0.5 * RICCATI_P / (1 + RICCATI_P) * x
    assert abs(r.control[0] - exact) <= 1e-3
    assert r.ratio < 1


def test_heydari_plain_update_fails_to_contract_for_unit_weight():
    # |dF/du| = b^2 P / R > 1 here
    with pytest.raises(NoContraction):
        adp.heydari_iterate(riccati(), quadratic_table(RICCATI_P), [0.6], [0.0], 50)


def test_heydari_ratio_for_heavy_control_weight():
    R = 10.0
    p = adp.linear_problem(F(1, 2), 1, 1, R, X, BoxSpace.interval(-1, 1))
    P = 1.0
    x = 0.5
    r = adp.heydari_iterate(p, quadratic_table(P), [x], [0.3], 200)
    assert abs(r.ratio - P / R) <= 1e-2
    assert abs(r.control[0] - (-0.5 * P * x / (R + P))) <= 1e-4
    assert r.residual <= 1e-9


def test_heydari_zero_input_map():
    p = adp.linear_problem(F(1, 2), 0, 1, 1, X, U)
    r = adp.heydari_iterate(p, quadratic_table(RICCATI_P), [0.6], [0.4], 10)
    assert r.control[0] == 0 and r.residual == 0


def test_tables_and_trace_csv():
    res = adp.vi_run(riccati(), TOL, 200, K, grid_step=F(1, 2))
    lines = res.value.to_csv().splitlines()
    assert lines[0] == "x0,v0" and len(lines) == 6
    trace = adp.trace_csv(res.trace).splitlines()
    assert trace[0] == "iteration,sup_change,hjb_residual"
    assert len(trace) == res.iterations + 1


def test_multidimensional_table_uses_lipschitz_midpoint():
    grid = np.array([[0.0, 0.0], [1.0, 1.0]])
    T = adp.Table(grid, np.array([0.0, 1.0]))
    assert T.lip == 1.0
    assert T(np.array([[0.5, 0.5]]))[0] == pytest.approx(0.5)

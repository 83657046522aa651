import json
import random
from fractions import Fraction as F

import pytest

from approxevt.errors import CapExceeded
from approxevt.evt import (
    CallableFunctional, IntegralFunctional, Modulus, PointFunctional, approx_inf, approx_sup,
    approx_sup_over_set, net_min, sup_modulus,
)
from approxevt.funcspace import LipschitzSpaceDesc, build_net, random_member
from approxevt.metric import BoxSpace

UNIT = BoxSpace.interval(0, 1)
SPACE = LipschitzSpaceDesc(UNIT, 1, 1)


def point():
    return PointFunctional((F(1, 2),))


def integral():
    return IntegralFunctional(UNIT, lambda x, y: y, 0, 1, 1, quadratic=(lambda x: 0, lambda x: 1, lambda x: 0))


def squared_gap():
    # (f(x) - x)^2: slope in x and in y bounded by 2 (|f| + |x|) <= 4
    return IntegralFunctional(UNIT, lambda x, y: (y - x[0]) ** 2, 4, 4, 1,
                              quadratic=(lambda x: 1, lambda x: -2 * x[0], lambda x: x[0] ** 2))


def neg_square():
    return IntegralFunctional(UNIT, lambda x, y: -y * y, 0, 2, 1, quadratic=(lambda x: -1, lambda x: 0, lambda x: 0))


def generic(J):
    """Same functional without the quadratic structure: forces plain enumeration."""
    return CallableFunctional(J.eval, J.modulus)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_inf_examples(k):
    assert abs(approx_inf(point(), SPACE, k).value + 1) <= F(1, k)
    assert abs(approx_inf(integral(), SPACE, k).value + 1) <= F(1, k)
    # the identity is in the space, so the infimum is 0
    assert abs(approx_inf(squared_gap(), SPACE, k).value) <= F(1, k)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_sup_examples(k):
    assert abs(approx_sup(point(), SPACE, k).value - 1) <= F(1, k)
    assert abs(approx_sup(neg_square(), SPACE, k).value) <= F(1, k)
    assert abs(approx_sup(integral(), SPACE, k).value - 1) <= F(1, k)


def test_sup_is_negated_inf_of_negation():
    for J in (point(), integral(), squared_gap()):
        for k in (1, 2):
            assert approx_sup(J, SPACE, k).value == -approx_inf(-J, SPACE, k).value


def test_integral_quadrature_error_bound():
    J = squared_gap()
    f = random_member(SPACE, random.Random(5))
    # fine midpoint rule as an independent value
    m = 2000
    ref = sum((f((F(2 * i + 1, 2 * m),)) - F(2 * i + 1, 2 * m)) ** 2 for i in range(m)) / m
    for n in (4, 16, 64):
        assert abs(J.approx(f, n) - ref) <= F(1, n) + F(1, 1000)


def test_methods_agree_exactly():
    for J in (point(), integral(), squared_gap()):
        eta = J.modulus(F(1))
        a = net_min(J, SPACE, eta, 8, method="chain")
        b = net_min(J, SPACE, eta, 8, method="stream")
        c = net_min(J, SPACE, eta, 8, method="enumerate")
        assert a[0] == b[0] == c[0]
        assert a[1] == b[1] == c[1]
        assert a[3] == b[3] == c[3]
        assert a[2].values == c[2].values


def test_ties_go_to_smallest_index_and_relabeling_keeps_value():
    J = integral()
    eta = J.modulus(F(1, 2))
    v, i, _, size = net_min(J, SPACE, eta, 16, method="enumerate")
    net = build_net(SPACE, eta)
    vals = [J.approx(net.member(j), 16) for j in range(size)]
    assert vals.index(min(vals)) == i
    perm = list(range(size))
    random.Random(0).shuffle(perm)
    assert min(vals[p] for p in perm) == v


def test_workers_do_not_change_result():
    J = generic(point())
    a = approx_inf(J, SPACE, 2, workers=1)
    b = approx_inf(J, SPACE, 2, workers=4)
    assert (a.value, a.member_index, a.net_size) == (b.value, b.member_index, b.net_size)


@pytest.mark.parametrize("k", [1, 2])
def test_lower_bound_certificate_on_finer_net(k):
    # v - 1/(2k) - 1/(4k) <= J[f] for every f of a finer net, checked member by member
    J = point()
    r = approx_inf(J, SPACE, k)
    net = build_net(SPACE, r.precision / 2)
    P = 64 * k
    worst = min(J.approx(net.member(i), P) for i in range(len(net))) - F(1, P)
    assert r.value - F(3, 4 * k) <= worst


def test_lower_bound_certificate_random_members():
    rng = random.Random(11)
    for J in (integral(), squared_gap()):
        for k in (1, 2, 4):
            r = approx_inf(J, SPACE, k)
            for _ in range(15):
                f = random_member(SPACE, rng)
                assert r.value - F(3, 4 * k) <= J.approx(f, 256) + F(1, 256)


def test_result_json():
    r = approx_inf(point(), SPACE, 2)
    d = json.loads(r.to_json())
    assert set(d) == {"value", "member_index", "k", "net_size"}
    assert d["value"] == "-1/1" and d["k"] == 2
    f, v = r
    assert v == r.value and f is r.function


def test_cap_propagates():
    with pytest.raises(CapExceeded):
        approx_inf(generic(point()), SPACE, 8, cap=1000)


def test_sup_over_set_examples():
    U = BoxSpace.interval(0, 1)
    ident = Modulus.linear(1)
    for k in (1, 4, 16):
        assert abs(approx_sup_over_set(lambda u: F(2, 7), U, ident, k) - F(2, 7)) <= F(1, k)
        assert abs(approx_sup_over_set(lambda u: -(u[0] - F(1, 3)) ** 2, U, Modulus.linear(2), k)) <= F(1, k)
        assert abs(approx_sup_over_set(lambda u: u[0], BoxSpace.interval(-1, 1), ident, k) - 1) <= F(1, k)


def test_sup_modulus_examples():
    assert sup_modulus(Modulus(lambda e: e))(F(3, 5)) == F(1, 5)
    L = F(7, 2)
    assert sup_modulus(Modulus.linear(L))(F(1, 4)) == F(1, 4) / (3 * L)


def test_sup_modulus_sampled():
    # g(x, u) = -|x - u| + x u / 2 is 3/2-Lipschitz jointly on [0,1]^2
    U = BoxSpace.interval(0, 1)
    omega = Modulus.linear(F(3, 2))
    rng = random.Random(2)
    for k in (2, 4, 8):
        step = omega(F(1, k))
        for _ in range(10):
            x = F(rng.randint(0, 100), 100)
            y = min(F(1), x + step * F(rng.randint(0, 10), 10))

            def h(z):
                return approx_sup_over_set(lambda u: -abs(z - u[0]) + z * u[0] / 2, U, omega, k)

            assert abs(h(x) - h(y)) <= F(3, k)


def test_modulus_monotone():
    m = Modulus.linear(F(5, 2))
    eps = [F(i, 16) for i in range(1, 17)]
    vals = [m(e) for e in eps]
    assert vals == sorted(vals)

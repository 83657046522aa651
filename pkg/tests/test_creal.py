from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from approxevt.creal import (
    Inconclusive, LessWitnessed, add, cmax, cmin, exp, exp_approx, format_rational, from_approximator,
    from_rational, le_upto, lt_witness, mul, neg, scale, sqrt,
)

rationals = st.fractions(min_value=-8, max_value=8, max_denominator=64)


def wobbly(q, shift=0):
    """A non-exact regular real equal to ``q``: ``x(n) = q + s/(2n)``, ``s`` in {-1, 0, 1}."""
    q = F(q)
    return from_approximator(lambda n: q + F(((n + shift) % 3) - 1, 2 * n))


def regular(x, ns=(1, 2, 3, 5, 8, 13, 21, 34, 55, 64)):
    return all(abs(x.approx(n) - x.approx(m)) <= F(1, n) + F(1, m) for n in ns for m in ns)


def test_from_rational_is_constant():
    assert from_rational(F(1, 2)).approx(10) == F(1, 2)
    assert all(from_rational(0).approx(n) == 0 for n in range(1, 20))
    assert from_rational(F(-3, 4)).approx(1) == F(-3, 4)


def test_add_exact():
    x = add(from_rational(F(1, 2)), from_rational(F(1, 3)))
    assert all(x.approx(n) == F(5, 6) for n in (1, 7, 40))


def test_add_zero_is_identity_within_2_over_n():
    x = wobbly(F(2, 7))
    y = add(x, from_rational(0))
    assert all(abs(y.approx(n) - x.approx(n)) <= F(2, n) for n in range(1, 65))


def test_add_uses_doubled_precision():
    x, y = wobbly(F(1, 3)), wobbly(F(1, 5), 1)
    s = add(x, y)
    assert s.approx(7) == x.approx(14) + y.approx(14)


def test_mul_exact_and_annihilator():
    assert mul(from_rational(2), from_rational(3)).approx(9) == 6
    z = mul(wobbly(F(5, 3)), from_rational(0))
    assert all(abs(z.approx(n)) <= F(2, n) for n in range(1, 65))


def test_mul_square_of_shifted_rational():
    # (1/2 + 1/8)^2 = 25/64
    x = add(from_rational(F(1, 2)), from_rational(F(1, 8)))
    assert mul(x, x).approx(5) == F(25, 64)


def test_mul_uses_bound_from_first_approximation():
    import math

    x, y = wobbly(F(3, 2)), wobbly(F(-1, 4), 2)
    b = max(math.ceil(abs(x.approx(1)) + 2), math.ceil(abs(y.approx(1)) + 2))
    p = mul(x, y)
    assert all(p.approx(n) == x.approx(2 * b * n) * y.approx(2 * b * n) for n in (1, 3, 10))
    assert regular(p)
    assert abs(p.approx(64) - F(-3, 8)) <= F(1, 64)


def test_cmax_cmin_pointwise():
    assert cmax(from_rational(1), from_rational(2)).approx(3) == 2
    x = wobbly(F(1, 7))
    assert all(cmax(x, x).approx(n) == x.approx(n) for n in range(1, 30))
    y = wobbly(F(2, 7), 1)
    assert all(cmin(x, y).approx(n) == min(x.approx(n), y.approx(n)) for n in range(1, 30))


def test_lt_witness_examples():
    w = lt_witness(from_rational(0), from_rational(1), 8)
    assert isinstance(w, LessWitnessed) and w.n <= 8
    assert lt_witness(from_rational(0), from_rational(0), 1024) == Inconclusive(1024)
    w = lt_witness(from_rational(0), from_rational(F(1, 2**20)), 2**22)
    assert isinstance(w, LessWitnessed)
    # smallest power of two with 2/n < 2^-20 is 2^22
    assert w.n == 2**22


def test_le_upto_examples():
    assert le_upto(from_rational(F(1, 2)), from_rational(1), 100)
    assert not le_upto(from_rational(1), from_rational(0), 10)
    # first failing m is 3, since 1 > 0 + 2/3
    assert le_upto(from_rational(1), from_rational(0), 2)
    assert not le_upto(from_rational(1), from_rational(0), 3)
    x = wobbly(F(5, 9))
    assert le_upto(x, x, 50)


def test_exp_and_sqrt_against_math():
    import math

    assert abs(float(exp_approx(-1, F(1, 10**9))) - math.exp(-1)) < 2e-9
    e = exp(F(1, 3))
    assert regular(e)
    assert abs(float(e.approx(1000)) - math.exp(1 / 3)) <= 1e-3
    r = sqrt(2)
    assert regular(r)
    assert abs(float(r.approx(10**6)) - math.sqrt(2)) <= 1e-6


def test_format_rational():
    assert format_rational(F(-3, 4)) == "-3/4"
    assert format_rational(F(2)) == "2/1"


def test_memoized_fn_called_once():
    calls = []

    def fn(n):
        calls.append(n)
        return F(1, n)

    x = from_approximator(fn)
    x.approx(5)
    x.approx(5)
    assert calls == [5]


@settings(max_examples=60, deadline=None)
@given(rationals, rationals, st.integers(0, 2), st.integers(0, 2))
def test_regularity_closure(p, q, s, t):
    x, y = wobbly(p, s), wobbly(q, t)
    for r in (add(x, y), mul(x, y), cmax(x, y), cmin(x, y), neg(x), scale(x, F(5, 3))):
        assert regular(r)


@settings(max_examples=60, deadline=None)
@given(rationals, st.fractions(min_value=0, max_value=4, max_denominator=64))
def test_max_of_ordered_pair_tracks_larger(p, gap):
    x, y = wobbly(p), wobbly(p + gap, 1)
    m = cmax(x, y)
    assert all(abs(m.approx(n) - y.approx(n)) <= F(2, n) for n in range(1, 65))


@settings(max_examples=40, deadline=None)
@given(rationals, rationals)
def test_witness_soundness(p, q):
    x, y = wobbly(p), wobbly(q, 2)
    w = lt_witness(x, y, 2**12)
    if isinstance(w, LessWitnessed):
        assert x.approx(w.n) < y.approx(w.n) - F(2, w.n)
        assert p < q

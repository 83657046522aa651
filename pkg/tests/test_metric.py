from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from approxevt.creal import from_approximator, from_rational
from approxevt.errors import CapExceeded, EmptySet, NotCovered
from approxevt.metric import (
    BoxSpace, FiniteSpace, dinf, dist_to_finite_set, finite_approximation, locate, partition_from_csv,
    partition_to_csv, regular_partition,
)


def pts1(part):
    return [p[0] for p in part.points]


def test_regular_partition_examples():
    assert pts1(regular_partition(BoxSpace((F(1, 2),), F(1, 2)), 2)) == [0, F(1, 4), F(1, 2), F(3, 4), 1]
    assert pts1(regular_partition(BoxSpace((0,), 1), 1)) == [-1, 0, 1]
    sq = regular_partition(BoxSpace((0, 0), 1), 1)
    assert len(sq) == 9
    assert set(sq.points) == {(a, b) for a in (-1, 0, 1) for b in (-1, 0, 1)}
    assert list(sq.points) == sorted(sq.points)


def test_regular_partition_cap():
    with pytest.raises(CapExceeded):
        regular_partition(BoxSpace((0, 0, 0), 1), 10, cap=1000)


def test_finite_approximation_examples():
    unit = BoxSpace.interval(0, 1)
    assert [p[0] for p in finite_approximation(unit, 2)] == [0, F(1, 2), 1]
    assert [p[0] for p in finite_approximation(unit, 4)] == [0, F(1, 4), F(1, 2), F(3, 4), 1]
    sq = finite_approximation(BoxSpace((0, 0), 1), 1)
    assert len(sq) == 9
    # every corner and the center of each cell is within 1 of a point
    probes = [(F(a, 2), F(b, 2)) for a in range(-2, 3) for b in range(-2, 3)]
    assert all(dist_to_finite_set(x, sq) <= 1 for x in probes)


def test_dist_to_finite_set_examples():
    assert dist_to_finite_set((0,), [(1,), (-1,)]) == 1
    assert dist_to_finite_set((F(1, 4),), [(0,), (F(1, 4),)]) == 0
    assert dist_to_finite_set((F(1, 3),), [(0,), (F(1, 4),), (F(1, 2),)]) == F(1, 12)
    with pytest.raises(EmptySet):
        dist_to_finite_set((0,), [])


def test_locate_examples():
    part = regular_partition(BoxSpace((F(1, 2),), F(1, 2)), 2)
    # probe distance to 1/2 is 0 < 1/8, so the first strict hit is the point 1/2 itself
    assert part.points[locate([from_rational(F(1, 2))], part)] == (F(1, 2),)
    assert locate([from_rational(0)], part) == 0
    assert part.points[locate([from_rational(F(13, 100))], part)] == (F(1, 4),)


def test_locate_tie_goes_to_smallest_index():
    part = regular_partition(BoxSpace((F(1, 2),), F(1, 2)), 2)
    # 1/8 and 3/8 sit exactly at distance step/2 from two neighbours
    assert part.points[locate([from_rational(F(1, 8))], part)] == (0,)
    assert part.points[locate([from_rational(F(3, 8))], part)] == (F(1, 4),)
    sq = regular_partition(BoxSpace((0, 0), 1), 1)
    assert sq.points[locate([from_rational(F(1, 2)), from_rational(F(-1, 2))], sq)] == (0, -1)


def test_locate_outside_box_raises():
    part = regular_partition(BoxSpace((0,), 1), 1)
    with pytest.raises(NotCovered):
        locate([from_rational(5)], part)


def test_spaces_and_csv_roundtrip():
    box = BoxSpace.interval(F(-1, 2), F(3, 2))
    assert box.lower == (F(-1, 2),) and box.upper == (F(3, 2),)
    assert box.clip((2,)) == (F(3, 2),)
    fs = FiniteSpace(((0,), (1,), (3,)))
    assert fs.radius == F(3, 2)
    assert fs.approximation().points == fs.points
    with pytest.raises(EmptySet):
        FiniteSpace(())
    part = regular_partition(BoxSpace((0, 0), 1), 1)
    assert partition_from_csv(partition_to_csv(part.points)) == list(part.points)
    assert partition_to_csv([(F(1, 3),)]).splitlines() == ["x0", "1/3"]


boxes = st.tuples(
    st.fractions(min_value=-4, max_value=4, max_denominator=16),
    st.fractions(min_value=F(1, 8), max_value=4, max_denominator=16),
    st.integers(1, 12),
)


@settings(max_examples=80, deadline=None)
@given(boxes, st.lists(st.fractions(min_value=-1, max_value=1, max_denominator=997), min_size=1, max_size=12))
def test_coverage(box, offsets):
    c, r, k = box
    space = BoxSpace((c,), r)
    part = regular_partition(space, k)
    for t in offsets:
        assert dist_to_finite_set((c + r * t,), part.points) <= r / k


@settings(max_examples=80, deadline=None)
@given(boxes, st.fractions(min_value=-1, max_value=1, max_denominator=997), st.integers(0, 2))
def test_detection_soundness(box, t, s):
    c, r, k = box
    part = regular_partition(BoxSpace((c,), r), k)
    q = c + r * t
    x = from_approximator(lambda n: q + F(s - 1, 2 * n))
    i = locate([x], part)
    for m in (16, 64, 256):
        assert dinf((x.approx(m),), part.points[i]) <= part.step + F(2, m)
    assert dinf((q,), part.points[i]) <= part.step


def test_locate_is_order_independent():
    part = regular_partition(BoxSpace((0, 0), 1), 2)
    x = [from_rational(F(1, 4)), from_rational(F(-3, 4))]
    y = [from_rational(F(1, 4)), from_rational(F(-3, 4))]
    y[1].approx(99)
    assert locate(x, part) == locate(y, part)

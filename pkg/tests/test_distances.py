import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bdrd.distances import (
    DistanceCapExceeded,
    EditOp,
    close_bdrd,
    close_pm,
    dist_bdrd,
    dist_pm,
    dist_pm_search,
    dist_to_property_pm,
    isomorphic,
    partition_check,
    replay,
)
from bdrd.generators import all_graphs, cycle, grid, grid_minus_corner, path, triangles
from bdrd.relational import graph_db

from test_relational import small_graphs


def assert_witness(a, b, result):
    assert len(result.witness) == result.value
    left, right = replay(a, b, result.witness)
    assert isomorphic(left, right, a.schema.names)


class TestBdrd:
    def test_examples(self):
        tri, p3 = triangles(1), path(3)
        assert dist_bdrd(tri, tri).value == 0
        assert dist_bdrd(tri, p3).value == 2
        assert dist_bdrd(grid(2, 2), grid_minus_corner(2, 2)).value == math.inf

    def test_cap(self):
        with pytest.raises(DistanceCapExceeded):
            dist_bdrd(cycle(9), cycle(9))

    @settings(max_examples=30)
    @given(small_graphs(max_n=5), small_graphs(max_n=5))
    def test_witness(self, a, b):
        if a.n != b.n:
            return
        assert_witness(a, b, dist_bdrd(a, b))


class TestPm:
    def test_examples(self):
        g, h = grid(3, 3), grid_minus_corner(3, 3)
        assert dist_pm(g, g).value == 0
        result = dist_pm(g, h)
        assert result.value == 1
        assert_witness(g, h, result)

    def test_empty_and_isolated(self):
        empty = graph_db(0, [], d=4)
        assert dist_pm(triangles(1), empty).value == 3
        assert dist_pm(empty, empty).value == 0

    def test_upper_limit(self):
        c6, t2 = cycle(6), triangles(2)
        assert dist_pm(c6, t2).value == 4
        assert dist_pm(c6, t2, upper=3).value == math.inf
        assert dist_pm(c6, t2, upper=4).value == 4

    def test_cap(self):
        with pytest.raises(DistanceCapExceeded):
            dist_pm(cycle(20), cycle(20))

    @settings(max_examples=40)
    @given(small_graphs(max_n=4, max_degree=2), small_graphs(max_n=4, max_degree=2))
    def test_matches_search_oracle(self, a, b):
        fast, slow = dist_pm(a, b), dist_pm_search(a, b)
        assert fast.value == slow.value
        assert_witness(a, b, fast)
        assert_witness(a, b, slow)

    @settings(max_examples=30)
    @given(small_graphs(max_n=6))
    def test_isolated_element(self, db):
        bigger = graph_db(db.n + 1, [t for t in db.tuples("E") if t[0] < t[1]], db.d)
        assert dist_pm(db, bigger).value == 1


def graphs_up_to(n):
    return [g for m in range(n + 1) for g in all_graphs(m, d=4)]


class TestPseudometric:
    def test_exhaustive_three_vertices(self):
        gs = graphs_up_to(3)
        d = {(i, j): dist_pm(a, b).value for (i, a), (j, b) in itertools.product(enumerate(gs), repeat=2)}
        for i, j in d:
            assert d[i, j] == d[j, i]
        for i in range(len(gs)):
            assert d[i, i] == 0
        for i, j, k in itertools.product(range(len(gs)), repeat=3):
            assert d[i, k] <= d[i, j] + d[j, k]


class TestCloseness:
    def test_close_pm(self):
        a = graph_db(3, [(1, 2)], d=4)
        b = graph_db(3, [(1, 2), (2, 3)], d=4)
        assert close_pm(a, b, 1)
        assert not close_pm(a, b, 0)
        # grid pair: eps * d * min = 1/64 * 8 * 8 = 1
        assert close_pm(grid(3, 3), grid_minus_corner(3, 3), Fraction(1, 64))
        assert not close_pm(grid(3, 3), grid_minus_corner(3, 3), Fraction(1, 65))

    def test_close_bdrd(self):
        a = graph_db(3, [(1, 2)], d=4)
        b = graph_db(3, [(1, 2), (2, 3)], d=4)
        assert close_bdrd(a, b, 1)
        assert not close_bdrd(a, b, 0)
        # distance 2, budget eps*4*3
        assert close_bdrd(triangles(1), path(3), Fraction(1, 6))
        assert not close_bdrd(triangles(1), path(3), Fraction(1, 7))
        assert not close_bdrd(grid(3, 3), grid_minus_corner(3, 3), 1)

    def test_to_property(self):
        t2 = triangles(2)
        assert dist_to_property_pm(t2, [t2], 0)
        assert not dist_to_property_pm(t2, [], 1)
        members = [triangles(t) for t in range(4)]
        # dist_pm(C6, 2K3) = 4 > 1/8 * 4 * 6
        assert not dist_to_property_pm(cycle(6), members, Fraction(1, 8))
        assert dist_to_property_pm(cycle(6), members, Fraction(1, 6))


class TestPartition:
    def test_examples(self):
        t2 = triangles(2)
        assert partition_check(t2, t2, 0, 3)
        c6 = cycle(6)
        cut = graph_db(6, [(1, 2), (2, 3), (4, 5), (5, 6)], d=4)
        # four tuples removed, pieces of three elements
        assert partition_check(c6, cut, Fraction(4, 6), 3)
        assert not partition_check(c6, cut, Fraction(3, 6), 3)
        assert not partition_check(c6, cut, 1, 2)
        assert not partition_check(c6, graph_db(6, [], d=4), Fraction(1, 2), 1)


def test_edit_op_validation():
    with pytest.raises(ValueError):
        EditOp("rename", "left")
    with pytest.raises(ValueError):
        EditOp("insert-element", "middle")

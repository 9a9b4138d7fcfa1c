import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bdrd.neighborhoods import TypeRegistry
from bdrd.semilinear import (
    LinearSet,
    SemilinearFormatError,
    SemilinearSet,
    alon_size_bound,
    contains,
    enumerate_norm_range,
    find_witness,
    min_distribution_distance,
    parse_semilinear,
    round_half_up,
    round_to_target_size,
    rounding_distance_bound,
    serialize_semilinear,
    small_representative,
)

THREES = SemilinearSet(1, (LinearSet((0,), ((3,),)),))


def brute_members(S, max_norm):
    """Every member with norm <= max_norm, by enumerating coefficients."""
    out = set()
    for comp in S.components:
        norms = [sum(p) for p in comp.periods]
        ranges = [range(max_norm // x + 1) for x in norms]
        for coeffs in itertools.product(*ranges):
            h = comp.point(coeffs)
            if sum(h) <= max_norm:
                out.add(h)
    return out


@st.composite
def semilinear_sets(draw, max_c=4, max_k=3, max_v=3):
    c = draw(st.integers(1, max_c))
    vec = st.lists(st.integers(0, max_v), min_size=c, max_size=c)
    comps = []
    for _ in range(draw(st.integers(1, 3))):
        base = tuple(draw(vec.filter(lambda x: sum(x) <= max_v)))
        periods = tuple(
            tuple(p) for p in draw(st.lists(vec.filter(lambda x: 0 < sum(x) <= max_v), max_size=max_k - 1))
        )
        comps.append(LinearSet(base, periods))
    return SemilinearSet(c, tuple(comps))


class TestLinearSet:
    def test_rejects_zero_period_and_negative(self):
        with pytest.raises(ValueError):
            LinearSet((0,), ((0,),))
        with pytest.raises(ValueError):
            LinearSet((-1,), ())

    def test_k_and_v(self):
        S = SemilinearSet(2, (LinearSet((1, 1), ((3, 0), (0, 2))), LinearSet((0, 0), ())))
        assert S.k == 3 and S.v == 3
        empty = SemilinearSet(2)
        assert empty.is_empty and empty.k * empty.v == 0


class TestContains:
    def test_examples(self):
        assert find_witness(THREES, (6,)) == (0, (2,))
        assert not contains(THREES, (7,))
        S = SemilinearSet(2, (LinearSet((1, 2), ((1, 0),)),))
        assert find_witness(S, (1, 2)) == (0, (0,))

    def test_large_norm(self):
        S = SemilinearSet(2, (LinearSet((0, 3), ((0, 1), (1, 1))),))
        assert find_witness(S, (60_000, 100_003)) == (0, (40_000, 60_000))
        assert not contains(S, (60_000, 2))

    @given(semilinear_sets(), st.data())
    def test_matches_brute_force(self, S, data):
        members = brute_members(S, 20)
        h = tuple(data.draw(st.lists(st.integers(0, 8), min_size=S.dim, max_size=S.dim)))
        assert contains(S, h) == (h in members)
        for m in list(members)[:10]:
            i, coeffs = find_witness(S, m)
            assert S.components[i].point(coeffs) == m


class TestEnumerate:
    def test_examples(self):
        assert enumerate_norm_range(THREES, 5, 10) == [(6,), (9,)]
        assert enumerate_norm_range(THREES, 1, 2) == []
        assert enumerate_norm_range(SemilinearSet(1), 0, 10) == []

    @given(semilinear_sets(), st.integers(0, 12), st.integers(0, 12))
    def test_matches_contains(self, S, lo, width):
        hi = lo + width
        got = enumerate_norm_range(S, lo, hi)
        assert len(got) == len(set(got))
        assert set(got) == {h for h in brute_members(S, hi) if sum(h) >= lo}


class TestMinDistance:
    def test_two_coordinate_example(self):
        S = SemilinearSet(2, (LinearSet((0, 0), ((3, 0), (0, 2))),))
        dist, arg = min_distribution_distance(S, (Fraction(1, 2), Fraction(1, 2)), 4, 6)
        assert (dist, arg) == (Fraction(1, 5), (3, 2))

    def test_single_coordinate(self):
        assert min_distribution_distance(THREES, (1,), 1, 10)[0] == 0

    def test_empty_range(self):
        assert min_distribution_distance(THREES, (1,), 1, 2) == (math.inf, None)

    @given(semilinear_sets(max_c=2), st.integers(1, 6), st.integers(0, 4), st.integers(0, 4))
    def test_monotone_in_range(self, S, lo, w1, w2):
        v = tuple([Fraction(1, S.dim)] * S.dim)
        narrow = min_distribution_distance(S, v, lo, lo + w1)[0]
        wide = min_distribution_distance(S, v, max(1, lo - w2), lo + w1 + w2)[0]
        assert wide <= narrow


class TestRounding:
    def test_half_up(self):
        assert round_half_up(Fraction(5, 2)) == 3
        assert round_half_up(Fraction(3, 2)) == 2
        assert round_half_up(Fraction(7, 3)) == 2

    def test_identity_at_n0(self):
        S = SemilinearSet(2, (LinearSet((1, 1), ((1, 0), (0, 1))),))
        h = S.components[0].point((4, 5))
        assert round_to_target_size(S, 0, (4, 5), sum(h), sum(h)) == h

    def test_requires_large_input(self):
        with pytest.raises(ValueError):
            round_to_target_size(THREES, 0, (1,), 3, 6)

    @given(semilinear_sets(), st.data())
    def test_bounds(self, S, data):
        i = data.draw(st.integers(0, len(S.components) - 1))
        comp = S.components[i]
        kv = S.k * S.v
        n0 = kv * (3 * S.dim * kv * data.draw(st.integers(1, 40)) + 1)
        coeffs = tuple(data.draw(st.integers(n0, 5 * n0)) for _ in comp.periods)
        h = comp.point(coeffs)
        if not comp.periods or sum(h) < n0:
            return
        h2 = round_to_target_size(S, i, coeffs, sum(h), n0)
        assert contains(S, h2)
        assert n0 - kv <= sum(h2) <= n0 + kv
        dist = sum(abs(Fraction(a, sum(h)) - Fraction(b, sum(h2))) for a, b in zip(h, h2))
        assert dist <= rounding_distance_bound(S, n0)


class TestSmallRepresentative:
    def test_bound_arithmetic(self):
        assert alon_size_bound(2, 2, 3, Fraction(1, 10)) == 2172

    def test_small_input_returned(self):
        assert small_representative(THREES, (6,), Fraction(1, 2)) == (6,)

    def test_rejects_non_member(self):
        with pytest.raises(ValueError):
            small_representative(THREES, (7,), Fraction(1, 2))


class TestFormat:
    def test_round_trip(self):
        S = SemilinearSet(2, (LinearSet((1, 0), ((3, 0), (0, 2))), LinearSet((0, 0), ())))
        assert parse_semilinear(serialize_semilinear(S)) == S

    def test_rejects_zero_period(self):
        with pytest.raises(SemilinearFormatError):
            parse_semilinear("dim 1\nbase 0\nperiod 0\n")

    def test_rejects_registry_mismatch(self, tmp_path):
        (tmp_path / "r.registry").write_text(TypeRegistry([b"a", b"b"]).to_text())
        with pytest.raises(SemilinearFormatError):
            parse_semilinear("dim 1\nregistry r.registry\nbase 0\n", base_dir=tmp_path)

    def test_comments_and_errors(self):
        S = parse_semilinear("# c\ndim 1  # one\nbase 3\n")
        assert S.components == (LinearSet((3,), ()),)
        for bad in ("base 1\n", "dim 1\nperiod 1\n", "dim 1\nbase 1 2\n", "dim 1\nfoo 1\n"):
            with pytest.raises(SemilinearFormatError):
                parse_semilinear(bad)

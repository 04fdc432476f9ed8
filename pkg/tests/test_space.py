import collections
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pibo.errors import BoundsError, CapacityError, PreconditionError
from pibo.space import (
    AxisSpec,
    SearchSpace,
    enumerate_all,
    normalize,
    point_from_indices,
    sample_uniform,
    table_i_as_printed_space,
    total_count,
)


def tiny(*cards):
    return SearchSpace(tuple(AxisSpec(f"a{i}", 0.0, float(n - 1), 1.0) for i, n in enumerate(cards)))


class TestAxisSpec:
    def test_cardinality_of_width_axis(self):
        assert AxisSpec("W", 3, 8, 0.25).cardinality == 21

    def test_degenerate_axis(self):
        assert AxisSpec("x", 2.5, 2.5, 0.1).cardinality == 1

    @pytest.mark.parametrize("kwargs", [
        dict(min=0, max=1, step=0),
        dict(min=0, max=1, step=-0.5),
        dict(min=2, max=1, step=0.5),
        dict(min=0, max=1, step=0.3),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(PreconditionError):
            AxisSpec("x", **kwargs)


class TestTotalCount:
    def test_table_i(self, table_space):
        assert total_count(table_space) == 99225 == 21 * 21 * 3 * 5 * 5 * 3

    def test_as_printed_same_cardinality(self):
        assert table_i_as_printed_space().total_count == 99225

    def test_all_degenerate(self):
        space = SearchSpace(tuple(AxisSpec(n, 1.0, 1.0, 1.0) for n in "abcdef"))
        assert space.total_count == 1


class TestPoints:
    def test_lower_corner(self, table_space):
        p = point_from_indices(table_space, [0] * 6)
        assert p.values == pytest.approx((3, 3, 1.1, 3, 8, 3.6))

    def test_upper_corner(self, table_space):
        p = point_from_indices(table_space, [c - 1 for c in table_space.shape])
        assert p.values == pytest.approx((8, 8, 1.3, 5, 10, 3.8))
        # decoded values are exact decimals, not 1.3000000000000003
        assert p["T"] == 1.3

    def test_one_step_of_w(self, table_space):
        assert point_from_indices(table_space, [1, 0, 0, 0, 0, 0])["W"] == 3.25

    def test_out_of_range_names_axis(self, table_space):
        with pytest.raises(BoundsError, match="H1"):
            point_from_indices(table_space, [0, 0, 0, 5, 0, 0])

    def test_wrong_arity(self, table_space):
        with pytest.raises(BoundsError):
            point_from_indices(table_space, [0, 0])

    def test_from_values_roundtrip(self, table_space):
        p = table_space.point_from_values((7.25, 7.75, 1.3, 5, 10, 3.6))
        assert p.values == pytest.approx((7.25, 7.75, 1.3, 5, 10, 3.6))
        with pytest.raises(BoundsError):
            table_space.point_from_values((7.3, 7.75, 1.3, 5, 10, 3.6))

    def test_geometry_is_physical_everywhere(self, table_space):
        h1, t, h2 = (table_space.axis(n) for n in ("H1", "T", "H2"))
        assert h1.max + t.max < h2.min

    @settings(max_examples=200, deadline=None)
    @given(st.data())
    def test_roundtrip(self, table_space, data):
        idx = tuple(data.draw(st.integers(0, c - 1)) for c in table_space.shape)
        p = table_space.point_from_indices(idx)
        assert p.indices == idx
        assert table_space.point_from_flat(p.flat_index) == p
        assert table_space.point_from_values(p.values) == p


class TestNormalize:
    def test_corners_and_midpoint(self, table_space):
        assert np.array_equal(normalize(table_space, table_space.point_from_indices([0] * 6)), np.zeros(6))
        top = table_space.point_from_indices([c - 1 for c in table_space.shape])
        assert np.array_equal(normalize(table_space, top), np.ones(6))
        mid = table_space.point_from_indices([10, 0, 0, 0, 0, 0])
        assert normalize(table_space, mid)[0] == 0.5

    def test_degenerate_axis_maps_to_zero(self):
        space = SearchSpace((AxisSpec("a", 1, 1, 1), AxisSpec("b", 0, 4, 1)))
        assert list(normalize(space, space.point_from_indices([0, 2]))) == [0.0, 0.5]

    def test_neighbor_distance(self, table_space):
        base = [2, 2, 1, 2, 2, 1]
        x0 = normalize(table_space, table_space.point_from_indices(base))
        for d, card in enumerate(table_space.shape):
            idx = list(base)
            idx[d] += 1
            x1 = normalize(table_space, table_space.point_from_indices(idx))
            assert np.linalg.norm(x1 - x0) == pytest.approx(1 / (card - 1), rel=1e-12)

    def test_injective_on_grid(self, table_space):
        X = table_space.normalized_grid
        assert len({tuple(r) for r in X}) == table_space.total_count


class TestEnumerate:
    def test_small_grid_order(self):
        space = tiny(2, 3)
        pts = list(enumerate_all(space))
        assert len(pts) == 6
        assert pts[0].indices == (0, 0) and pts[1].indices == (0, 1)
        assert pts[-1].indices == (1, 2)

    def test_table_i_complete_without_duplicates(self, table_space):
        keys = [p.indices for p in enumerate_all(table_space)]
        assert len(keys) == 99225 == len(set(keys))

    def test_matches_flat_order(self, table_space):
        for k, p in zip(range(500), enumerate_all(table_space)):
            assert p.flat_index == k


class TestSampleUniform:
    def test_exhaustive_draw(self):
        space = tiny(2, 2)
        pts = sample_uniform(space, 4, seed=3)
        assert sorted(p.indices for p in pts) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_deterministic(self, table_space):
        a = sample_uniform(table_space, 25, seed=11)
        b = sample_uniform(table_space, 25, seed=11)
        assert [p.indices for p in a] == [p.indices for p in b]
        assert len({p.indices for p in a}) == 25

    def test_zero(self, table_space):
        assert sample_uniform(table_space, 0, seed=0) == []

    def test_capacity(self):
        with pytest.raises(CapacityError):
            sample_uniform(tiny(2, 2), 5, seed=0)

    def test_uniform_frequencies(self):
        space = tiny(3, 4)
        n_seeds, draws = 3000, 3
        counts = collections.Counter()
        for s in range(n_seeds):
            counts.update(p.indices for p in sample_uniform(space, draws, seed=s))
        p = draws / space.total_count
        mean = n_seeds * p
        sigma = math.sqrt(n_seeds * p * (1 - p))
        assert len(counts) == space.total_count
        for c in counts.values():
            assert abs(c - mean) <= 5 * sigma

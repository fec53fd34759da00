import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpslab.analysis.density import DensityAccumulator, DensityTrace, density_estimate
from cpslab.lattice import embed, new_uniform_coloring
from cpslab.rng import RngStream

from conftest import col, edges


def test_uniform_three_colors():
    n = 100_000
    p, q, r = density_estimate(embed(new_uniform_coloring(n, 3, RngStream(10))))
    assert abs(p - 2 / 3) <= 3 * math.sqrt(2 / 9 / n)
    assert q == 0 and r == p


def test_uniform_four_colors():
    n = 100_000
    p, q, _ = density_estimate(embed(new_uniform_coloring(n, 4, RngStream(11))))
    assert abs(p - 0.5) <= 3 * math.sqrt(0.25 / n)
    assert abs(q - 0.25) <= 3 * math.sqrt(0.1875 / n)


def test_all_vacant():
    assert density_estimate(edges(3, "....")) == (0.0, 0.0, 0.0)


def test_colorings_with_many_colors_count_unequal_neighbours():
    x = col(6, 0, 1, 3, 3, 2)
    # differences (mod 6): 1, 2, 0, 5, 4 -> directed: 1 and 5; inert: 2 and 4
    assert density_estimate(x) == (0.4, 0.4, 0.8)


def test_accumulator_stats():
    acc = DensityAccumulator(10)
    acc.add(0.0, 4, 1)
    acc.add(0.0, 6, 3)
    st = acc.stats(0.0)
    assert st["p"] == 0.5 and st["q"] == 0.2 and st["r"] == 0.7
    # across-replica s.e. of r: replica values 0.5, 0.9
    assert st["se_r"] == pytest.approx(np.std([0.5, 0.9], ddof=1) / math.sqrt(2))
    single = DensityAccumulator(10)
    single.add(1.0, 1, 0)
    assert math.isnan(single.stats(1.0)["se_r"])


@given(st.lists(st.tuples(st.sampled_from([0.0, 1.0, 2.0]), st.integers(0, 50), st.integers(0, 50)),
                min_size=1, max_size=30), st.randoms())
def test_merge_is_order_independent(rows, rnd):
    whole = DensityAccumulator(100)
    for t, d, b in rows:
        whole.add(t, d, b)
    parts = [DensityAccumulator(100) for _ in range(3)]
    for i, (t, d, b) in enumerate(rows):
        parts[i % 3].add(t, d, b)
    rnd.shuffle(parts)
    merged = parts[0].merge(parts[1]).merge(parts[2])
    assert merged.trace().rows == whole.trace().rows


def test_merge_rejects_different_sizes():
    with pytest.raises(ValueError):
        DensityAccumulator(10).merge(DensityAccumulator(11))


def test_trace_columns():
    tr = DensityTrace.from_arrays([1.0, 2.0], [0.5, 0.25])
    assert tr.t.tolist() == [1.0, 2.0] and tr.r.tolist() == [0.5, 0.25]
    assert len(tr) == 2

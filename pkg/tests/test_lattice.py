import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpslab.lattice import (Coloring, EdgeConfig, EdgeKind, as_signed, embed, new_uniform_coloring,
                            reconstruct, reverse_edges)
from cpslab.rng import RngStream

from conftest import col, edges


def colorings(kappas=(3, 4), max_n=40):
    return st.sampled_from(kappas).flatmap(
        lambda k: st.lists(st.integers(0, k - 1), min_size=2, max_size=max_n)
        .map(lambda s: Coloring(k, np.array(s))))


# --- examples

def test_new_uniform_coloring_deterministic():
    a = new_uniform_coloring(4, 3, RngStream(11))
    b = new_uniform_coloring(4, 3, RngStream(11))
    assert a == b


def test_new_uniform_coloring_frequencies():
    n = 100_000
    x = new_uniform_coloring(n, 3, RngStream(2024))
    p = 1 / 3
    tol = 3 * np.sqrt(p * (1 - p) / n)
    freq = np.bincount(x.sites, minlength=3) / n
    assert np.all(np.abs(freq - p) <= tol)


def test_new_uniform_coloring_two_sites_two_colors():
    x = new_uniform_coloring(2, 2, RngStream(0))
    assert x.n == 2 and set(x.sites.tolist()) <= {0, 1}


def test_new_uniform_coloring_consumes_n_draws():
    rng = RngStream(4)
    new_uniform_coloring(17, 4, rng)
    assert rng.counter == 17


@pytest.mark.parametrize("n,kappa", [(1, 3), (5, 1)])
def test_new_uniform_coloring_rejects(n, kappa):
    with pytest.raises(ValueError):
        new_uniform_coloring(n, kappa, RngStream(0))


def test_embed_examples():
    assert embed(col(3, 0, 1, 2, 0)).symbols() == "LLL."
    assert embed(col(3, 1, 1, 1)).symbols() == "..."
    assert embed(col(4, 0, 2)).symbols() == "BB"


def test_embed_minus_one_is_residue_kappa_minus_one():
    e = embed(col(4, 1, 0, 0, 1))
    assert e.kinds()[0] is EdgeKind.R
    assert e.residues[0] == 3


def test_embed_rejects_other_kappa():
    with pytest.raises(ValueError):
        embed(col(5, 0, 1, 2))


def test_reconstruct_examples():
    assert reconstruct(0, edges(3, "LLL.")) == col(3, 0, 1, 2, 0)
    assert reconstruct(2, edges(4, "....")) == col(4, 2, 2, 2, 2)
    with pytest.raises(ValueError):
        reconstruct(0, edges(3, "R."))


def test_edge_config_rejects_blockade_for_three_colors():
    with pytest.raises(ValueError):
        edges(3, "B.")


def test_json_round_trip():
    x = col(4, 0, 3, 2, 2)
    assert Coloring.from_json(json.dumps(x.to_json())) == x
    e = embed(x)
    assert EdgeConfig.from_json(json.dumps(e.to_json())) == e


def test_coloring_is_read_only():
    x = col(3, 0, 1)
    with pytest.raises(ValueError):
        x.sites[0] = 2


def test_as_signed_accepts_several_forms():
    want = [-1, 0, 1, 2]
    assert as_signed("R.LB").tolist() == want
    assert as_signed([EdgeKind.R, EdgeKind.VACANT, EdgeKind.L, EdgeKind.B]).tolist() == want
    assert as_signed(edges(4, "R.LB")).tolist() == want


# --- properties

@given(colorings())
def test_round_trip(x):
    assert reconstruct(int(x.sites[0]), embed(x)) == x


@given(colorings())
def test_signed_sum_vanishes_mod_kappa(x):
    assert embed(x).signed_sum() % x.kappa == 0


@given(colorings(), st.integers(0, 10))
def test_color_shift_invariance(x, c):
    assert embed(x.shifted(c)) == embed(x)


@given(colorings())
def test_reflection(x):
    assert embed(x.reversed()) == reverse_edges(embed(x))


@given(colorings())
def test_counts_partition_ring(x):
    e = embed(x)
    c = e.counts()
    assert sum(c.values()) == x.n
    assert e.n_directed() == c[EdgeKind.R] + c[EdgeKind.L]
    if x.kappa == 3:
        assert e.n_blockades() == 0

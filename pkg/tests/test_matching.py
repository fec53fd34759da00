import pytest
from hypothesis import given, strategies as st

from cpslab.analysis.matching import (Matching, brute_force_max_matching, is_valid_matching,
                                      pairs_by_definition, running_sums, water_fill_matching)

seqs = st.lists(st.sampled_from("R.LB"), min_size=1, max_size=16).map("".join)


def test_running_sum_examples():
    p = running_sums("RRLL")
    assert p.S.tolist() == [0, 1, 2, 1, 0] and p.C[-1] == 4 and p.m == 0
    p = running_sums("....")
    assert not p.S.any() and not p.C.any() and p.m == 0
    p = running_sums("LR")
    assert p.S.tolist() == [0, -1, 0] and p.m == -1


def test_water_fill_examples():
    m = water_fill_matching("RRLL")
    assert set(m) == {(0, 3), (1, 2)}
    assert running_sums("RRLL").matched_particles() == 4
    assert len(water_fill_matching("LR")) == 0
    assert running_sums("LR").matched_particles() == 0
    assert set(water_fill_matching("RL")) == {(0, 1)}
    assert running_sums("RL").matched_particles() == 2


def test_formula_uses_closed_minimum():
    # S(1) = -1 is the minimum only once the endpoint is included
    p = running_sums("L")
    assert p.m == 0 and p.m_closed == -1
    assert p.matched_particles() == 0 == 2 * len(water_fill_matching("L"))


def test_brute_force_examples():
    assert brute_force_max_matching("RRLL") == 2
    assert brute_force_max_matching("LR") == 0
    assert brute_force_max_matching("......") == 0
    with pytest.raises(ValueError):
        brute_force_max_matching("R" * 17)


def test_prefix_interval():
    assert set(water_fill_matching("RLRL", 2)) == {(0, 1)}
    with pytest.raises(ValueError):
        water_fill_matching("RL", 3)


def test_validity_checker_rejects_bad_pairs():
    assert not is_valid_matching("RL", Matching(((1, 0),)))
    assert not is_valid_matching("RLL", Matching(((0, 1), (0, 2))))
    assert not is_valid_matching(".L", Matching(((0, 1),)))


@given(seqs)
def test_water_fill_is_valid_exact_and_maximum(xi):
    m = water_fill_matching(xi)
    assert is_valid_matching(xi, m)
    assert 2 * len(m) == running_sums(xi).matched_particles()
    assert len(m) == brute_force_max_matching(xi)


@given(seqs)
def test_water_fill_equals_pairing_rule(xi):
    assert set(water_fill_matching(xi)) == pairs_by_definition(xi)


@given(seqs)
def test_profile_invariants(xi):
    p = running_sums(xi)
    assert (p.S == p.R - p.L).all() and (p.C == p.R + p.L).all()
    assert p.m <= 0 and p.m_closed <= p.m

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpslab.dynamics.rules import Direction, EventKind, classify_event, edge_step, endpoints, vertex_step
from cpslab.lattice import Coloring, embed, reconstruct

from conftest import col, edges


def test_vertex_step_examples():
    assert vertex_step(col(3, 2, 1, 0), 0, "+") == col(3, 2, 2, 0)
    assert vertex_step(col(3, 2, 0, 0), 0, "+") == col(3, 2, 0, 0)
    assert vertex_step(col(4, 3, 2, 1), 0, "+") == col(4, 3, 3, 1)


def test_minus_clock_pushes_leftward():
    # edge 0 joins sites 0 and 1; "-" has site 1 act on site 0
    assert vertex_step(col(3, 0, 1, 1), 0, "-") == col(3, 1, 1, 1)
    assert endpoints(3, 2, Direction.PLUS) == (2, 0)
    assert endpoints(3, 2, Direction.MINUS) == (0, 2)


@pytest.mark.parametrize("kappa,syms,d,kind", [
    (3, "R..", "+", EventKind.MOVE),
    (3, "RR.", "+", EventKind.FLIP),
    (4, "RR.", "+", EventKind.BLOCKADE_CREATE),
    (4, "RB.", "+", EventKind.REFLECT),
    (3, "RL.", "+", EventKind.ANNIHILATE),
    (4, "RL..", "+", EventKind.ANNIHILATE),
])
def test_classify_event_table(kappa, syms, d, kind):
    assert classify_event(edges(kappa, syms), 0, d) is kind


def test_left_mover_wraps_around_the_ring():
    # the "-" clock of edge 0 looks at edge N-1
    e = edges(3, "LRR")
    assert classify_event(e, 0, "-") is EventKind.ANNIHILATE
    assert classify_event(e, 1, "-") is EventKind.NOOP


def test_mirror_cases_for_left_movers():
    assert classify_event(edges(3, "..L"), 2, "-") is EventKind.MOVE
    assert classify_event(edges(3, ".LL"), 2, "-") is EventKind.FLIP
    assert classify_event(edges(4, ".BL"), 2, "-") is EventKind.REFLECT
    assert classify_event(edges(4, ".LL"), 2, "-") is EventKind.BLOCKADE_CREATE


def test_inactive_clock_is_noop():
    assert classify_event(edges(3, "R.."), 0, "-") is EventKind.NOOP
    assert classify_event(edges(4, "B.."), 0, "+") is EventKind.NOOP


def test_edge_step_examples():
    # the ring closes with enough vacant edges to keep signed sums valid
    e = edges(3, "RRL")
    assert edge_step(e, 0, "+").symbols() == ".LL"
    assert edge_step(edges(4, "RBL."), 0, "+").symbols() == ".LL."
    assert edge_step(edges(3, "RL."), 0, "+").symbols() == "..."


def test_edge_step_examples_match_colors():
    # colors (2,1,0) -> (2,2,0); (3,2,0) -> (3,3,0); (2,1,2) -> (2,2,2)
    for kappa, before, after in [(3, (2, 1, 0), (2, 2, 0)), (4, (3, 2, 0), (3, 3, 0)), (3, (2, 1, 2), (2, 2, 2))]:
        x = col(kappa, *before)
        assert vertex_step(x, 0, "+") == col(kappa, *after)
        assert edge_step(embed(x), 0, "+") == embed(col(kappa, *after))


def test_direction_parse():
    assert Direction.parse("+") is Direction.PLUS
    assert Direction.parse("-") is Direction.MINUS
    assert Direction.parse(1) is Direction.MINUS
    with pytest.raises(ValueError):
        Direction.parse("x")


def test_event_labels_round_trip():
    for k in EventKind:
        assert EventKind.from_label(k.label) is k


@given(st.sampled_from([3, 4]).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.integers(0, k - 1), min_size=2, max_size=30))),
    st.integers(0, 10_000), st.sampled_from(["+", "-"]), st.integers(0, 3))
def test_edge_step_commutes_with_vertex_step(kx, edge_seed, d, base):
    kappa, sites = kx
    x = Coloring(kappa, np.array(sites))
    edge = edge_seed % x.n
    e = embed(x)
    assert edge_step(e, edge, d) == embed(vertex_step(x, edge, d))
    # and for every base color of the same edge configuration
    y = reconstruct(base % kappa, e)
    assert edge_step(e, edge, d) == embed(vertex_step(y, edge, d))


@given(st.sampled_from([3, 4]).flatmap(
    lambda k: st.tuples(st.just(k), st.lists(st.integers(0, k - 1), min_size=2, max_size=30))),
    st.integers(0, 10_000), st.sampled_from(["+", "-"]))
def test_no_event_increases_particle_count(kx, edge_seed, d):
    kappa, sites = kx
    e = embed(Coloring(kappa, np.array(sites)))
    edge = edge_seed % e.n
    after = edge_step(e, edge, d)
    before_total = e.n_directed() + e.n_blockades()
    after_total = after.n_directed() + after.n_blockades()
    kind = classify_event(e, edge, d)
    if kind in (EventKind.MOVE, EventKind.NOOP):
        assert after_total == before_total
    else:
        assert after_total < before_total

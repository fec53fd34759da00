import numpy as np
import pytest
from hypothesis import given, strategies as st

from cpslab import io
from cpslab.analysis.density import DensityRow, DensityTrace
from cpslab.analysis.fits import RateFit
from cpslab.dynamics.ballistic import Collision
from cpslab.dynamics.cps import SimConfig, run_cps
from cpslab.render import PALETTE, read_ppm, render_spacetime, write_ppm

from conftest import col

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


def test_events_round_trip(tmp_path):
    traj = run_cps(SimConfig(4, 100, 3, 5.0, log_events=True))
    path = tmp_path / "events.csv"
    io.write_events_csv(path, traj.events)
    back = io.read_events_csv(path, 0.0, 5.0, 100, 4)
    for name in ("time", "edge", "direction", "kind"):
        assert np.array_equal(getattr(back, name), getattr(traj.events, name))
    assert path.read_text().splitlines()[0] == "time,edge,direction,kind"


@given(st.lists(st.tuples(finite, finite, finite, finite, st.integers(1, 10**6), st.integers(1, 500), finite),
                max_size=20))
def test_density_round_trip(tmp_path_factory, rows):
    trace = DensityTrace([DensityRow(*r) for r in rows])
    path = tmp_path_factory.mktemp("d") / "densities.csv"
    io.write_density_csv(path, trace)
    assert io.read_density_csv(path).rows == trace.rows


def test_density_nan_standard_error_round_trips(tmp_path):
    trace = DensityTrace([DensityRow(0.0, 0.5, 0.25, 0.75, 10, 1, float("nan"))])
    io.write_density_csv(tmp_path / "d.csv", trace)
    assert np.isnan(io.read_density_csv(tmp_path / "d.csv").rows[0].se_r)


def test_density_columns_checked(tmp_path):
    (tmp_path / "bad.csv").write_text("t,r\n1,0.5\n")
    with pytest.raises(ValueError):
        io.read_density_csv(tmp_path / "bad.csv")


@given(st.lists(st.tuples(finite, finite, st.integers(0, 10**6), st.integers(0, 10**6)), max_size=20))
def test_collisions_round_trip(tmp_path_factory, rows):
    cs = [Collision(*r) for r in rows]
    path = tmp_path_factory.mktemp("c") / "events.csv"
    io.write_collisions_csv(path, cs)
    assert io.read_collisions_csv(path) == cs


def test_snapshots_round_trip(tmp_path):
    traj = run_cps(SimConfig(4, 30, 8, 4.0, (0.0, 2.0, 4.0)))
    io.write_snapshots_jsonl(tmp_path / "s.jsonl", traj.snapshots)
    back = io.read_snapshots_jsonl(tmp_path / "s.jsonl")
    for a, b in zip(back, traj.snapshots):
        assert a.time == b.time and a.coloring == b.coloring and a.edges == b.edges


def test_rate_fit_json_round_trip(tmp_path):
    fit = RateFit(0.5, 0.48, 0.01, (10.0, 300.0), 12)
    io.write_json(tmp_path / "f.json", fit.to_json())
    import json
    assert io.rate_fit_from_json(json.loads((tmp_path / "f.json").read_text())) == fit


def test_render_constant_single_row():
    img = read_ppm(render_spacetime([col(3, 1, 1, 1, 1)]))
    assert img.shape == (1, 4, 3)
    assert (img == PALETTE[1]).all()


def test_render_row_order():
    data = render_spacetime([col(3, 0, 1, 2), col(3, 2, 2, 2)])
    assert data.startswith(b"P6\n3 2\n255\n")
    img = read_ppm(data)
    assert img.shape == (2, 3, 3)
    assert img[0].tolist() == [list(PALETTE[0]), list(PALETTE[1]), list(PALETTE[2])]
    assert (img[1] == PALETTE[2]).all()


def test_render_four_color_run_is_valid_p6(tmp_path):
    traj = run_cps(SimConfig(4, 64, 1, 10.0, (0.0, 1.0, 2.0, 5.0, 10.0)))
    write_ppm(tmp_path / "r.ppm", render_spacetime(traj.snapshots))
    raw = (tmp_path / "r.ppm").read_bytes()
    assert raw.split(b"\n")[:3] == [b"P6", b"64 5", b"255"]
    assert read_ppm(raw).shape == (5, 64, 3)


def test_render_errors():
    with pytest.raises(ValueError):
        render_spacetime([col(3, 0, 1), col(3, 0, 1, 2)])
    with pytest.raises(ValueError):
        render_spacetime([])
    with pytest.raises(ValueError):
        render_spacetime([np.array([0, 20])])


def test_read_ppm_keeps_whitespace_valued_first_pixel():
    # the first pixel byte equals "\n" (10); it must not be taken as header whitespace
    data = b"P6\n1 1\n255\n" + bytes([10, 32, 9])
    assert read_ppm(data).tolist() == [[[10, 32, 9]]]

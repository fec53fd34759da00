import json

import pytest

from cpslab import io
from cpslab.experiment import (InconsistentSpec, MalformedSpec, MissingField, ReplicaError, parse_spec,
                               run_experiment, run_replicas)


def quiet(*_):
    pass


def spec(**kw):
    base = {"model": "CPS", "kappa": 3, "n_sites": 1000, "seed": 1, "t_max": 10}
    base.update(kw)
    return json.dumps(base)


def test_minimal_spec_defaults():
    s = parse_spec(spec())
    assert s.replicas == 1
    assert s.engine == "Edge" and s.scheduler == "RejectionFree"
    assert s.snapshot_times == [0.0, 1.0, 2.0, 4.0, 8.0]
    assert s.analyses == [] and not s.log_events


def test_five_colors_default_to_vertex_engine():
    assert parse_spec(spec(kappa=5)).engine == "Vertex"
    with pytest.raises(InconsistentSpec):
        parse_spec(spec(kappa=5, engine="Edge"))


def test_error_kinds_have_distinct_messages():
    errors = []
    for text, kind in [("{not json", MalformedSpec),
                       ('{"model":"CCA","analyses":["audit"]}', InconsistentSpec),
                       ('{"model":"CPS","kappa":3}', MissingField)]:
        with pytest.raises(kind) as info:
            parse_spec(text)
        errors.append(str(info.value))
    assert len(set(errors)) == 3
    assert "audit" in errors[1] and "kappa 4" in errors[1]


@pytest.mark.parametrize("bad", [
    spec(colour=3),
    spec(replicas=0),
    spec(analyses=["nonsense"]),
    spec(snapshot_times=[20]),
    spec(model="CCA", t_max=2.5),
    spec(model="BA", velocities=[2]),
])
def test_rejects_bad_specs(bad):
    with pytest.raises(MalformedSpec):
        parse_spec(bad)


@pytest.mark.parametrize("bad", [
    spec(kappa=4, analyses=["audit"]),                 # needs log_events
    spec(analyses=["audit"], log_events=True),         # needs kappa 4
    spec(analyses=["survival"]),                       # needs CCA
    spec(model="BA", analyses=["clustering"]),
    spec(model="CCA", velocities=[1]),
])
def test_rejects_inconsistent_specs(bad):
    with pytest.raises(InconsistentSpec):
        parse_spec(bad)


def test_rate_fit_pulls_in_densities():
    s = parse_spec(spec(analyses=["rate_fit"]))
    assert [a.name for a in s.analyses] == ["densities", "rate_fit"]


def test_two_replicas_byte_identical(tmp_path):
    s = parse_spec(spec(replicas=2, log_events=True, analyses=["rate_fit"]))
    run_experiment(s, tmp_path / "a", echo=quiet)
    run_experiment(s, tmp_path / "b", echo=quiet)
    for name in ("densities.csv", "events.csv", "events_001.csv", "fits.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_thread_count_does_not_change_results(tmp_path, monkeypatch):
    s = parse_spec(spec(replicas=4))
    monkeypatch.setenv("CPSLAB_THREADS", "1")
    run_experiment(s, tmp_path / "a", echo=quiet)
    monkeypatch.setenv("CPSLAB_THREADS", "4")
    run_experiment(s, tmp_path / "b", echo=quiet)
    assert (tmp_path / "a" / "densities.csv").read_bytes() == (tmp_path / "b" / "densities.csv").read_bytes()


def test_initial_density_two_thirds(tmp_path):
    s = parse_spec(spec(n_sites=10_000, t_max=100, analyses=["densities"]))
    run_experiment(s, tmp_path, echo=quiet)
    row0 = io.read_density_csv(tmp_path / "densities.csv").rows[0]
    assert row0.t == 0.0 and abs(row0.r - 2 / 3) < 3 * (2 / 9 / 10_000) ** 0.5
    assert row0.n_edges == 10_000 and row0.n_replicas == 1


def test_ba_all_right_movers_no_collisions(tmp_path):
    s = parse_spec(json.dumps({"model": "BA", "n_sites": 500, "seed": 3, "t_max": 100,
                               "velocities": [1], "log_events": True}))
    run_experiment(s, tmp_path, echo=quiet)
    assert (tmp_path / "events.csv").read_text().strip() == "time,position,left,right"


def test_ba_densities_decay(tmp_path):
    s = parse_spec(json.dumps({"model": "BA", "n_sites": 5000, "seed": 3, "t_max": 64, "replicas": 2}))
    status, _ = run_experiment(s, tmp_path, echo=quiet)
    rows = io.read_density_csv(tmp_path / "densities.csv").rows
    assert status == 0 and rows[0].r == 1.0 and rows[-1].r < 0.3


def test_audit_matching_clustering_and_raster(tmp_path):
    s = parse_spec(spec(kappa=4, n_sites=2000, replicas=3, log_events=True, raster=True, save_snapshots=True,
                        analyses=["audit", "matching", {"name": "clustering", "x": 0, "y": 3}, "rate_fit"]))
    status, summary = run_experiment(s, tmp_path, echo=quiet)
    assert status == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert all(a["removals_equal_reflects"] for a in report["audit"])
    assert all(m["matched_particles"] == m["formula"] for m in report["matching"])
    assert len(report["clustering"]) == len(s.snapshot_times)
    assert (tmp_path / "raster.ppm").read_bytes().startswith(b"P6\n2000 5\n255\n")
    assert len(io.read_snapshots_jsonl(tmp_path / "snapshots.jsonl")) == 5
    assert "alpha" in summary["fits"]["rate_fit"]


def test_cca_survival_analysis(tmp_path):
    s = parse_spec(json.dumps({"model": "CCA", "kappa": 3, "n_sites": 500, "seed": 4, "t_max": 50,
                               "replicas": 2, "analyses": [{"name": "survival", "t": 40}]}))
    status, summary = run_experiment(s, tmp_path, echo=quiet)
    assert status == 0
    assert [r["mismatches"] for r in summary["report"]["survival"]] == [0, 0]


def test_engine_errors_carry_replica_index(monkeypatch):
    import cpslab.experiment as ex

    def boom(spec, k):
        if k == 1:
            raise RuntimeError("tied event times")
        return ex._run_cps_replica(spec, k)

    monkeypatch.setitem(ex._RUNNERS, "CPS", boom)
    with pytest.raises(ReplicaError) as info:
        run_replicas(parse_spec(spec(replicas=3, n_sites=50)))
    assert info.value.index == 1 and "replica 1" in str(info.value)

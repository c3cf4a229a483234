import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlqueue.cli import main
from mlqueue.cli.config import (
    DEFAULT_SEED,
    SCHEMAS,
    ExperimentConfig,
    parse_config,
    parse_config_text,
    serialize_config,
)
from mlqueue.cli.experiments import run_experiment
from mlqueue.cli.io import emit_path_csv, parse_path_csv, path_csv_text
from mlqueue.errors import SchemaError
from mlqueue.mlf import MLParams
from mlqueue.queues import Model, QueueModelConfig, reflect, simulate
from mlqueue.sampling import CountingPath, RngStream, simulate_fpp_renewal, simulate_inverse_subordinator


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def same_queue_path(a, b):
    return (
        a.horizon == b.horizon
        and a.initial_level == b.initial_level
        and a.times.tolist() == b.times.tolist()
        and a.levels.tolist() == b.levels.tolist()
        and a.marks.tolist() == b.marks.tolist()
    )


# configuration


def test_minimal_config_gets_defaults(tmp_path):
    f = tmp_path / "c.json"
    f.write_text('{"name":"pgrid","seed":1}')
    cfg = parse_config(f)
    assert cfg.seed == 1
    assert cfg.parameters == SCHEMAS["pgrid"]
    assert cfg["tol"] == 1e-3


def test_unknown_key_is_named():
    with pytest.raises(SchemaError, match="alpa1"):
        parse_config_text('{"name": "recurrence", "alpa1": 0.6}')


def test_unknown_experiment():
    with pytest.raises(SchemaError, match="nosuch"):
        ExperimentConfig("nosuch")


def test_parse_error_has_line_context():
    text = '{\n  "name": "pgrid",\n  "seed": 1,,\n}'
    with pytest.raises(SchemaError) as exc:
        parse_config_text(text, "bad.json")
    msg = str(exc.value)
    assert msg.startswith("bad.json:3:")
    assert '"seed": 1,,' in msg


@pytest.mark.parametrize("name", sorted(SCHEMAS))
def test_config_round_trip(name):
    cfg = ExperimentConfig(name, seed=42, output_dir="somewhere")
    assert parse_config_text(serialize_config(cfg)) == cfg


def test_nested_parameters_accepted():
    cfg = parse_config_text('{"name": "mixing", "parameters": {"alpha": 0.8}}')
    assert cfg["alpha"] == 0.8 and cfg.seed == DEFAULT_SEED


@pytest.mark.parametrize("bad", [{"replicas": 0}, {"replicas": 2.5}, {"horizon": -1.0}])
def test_schema_violations(bad):
    with pytest.raises(SchemaError):
        ExperimentConfig("recurrence", bad)


def test_bad_seed():
    with pytest.raises(SchemaError):
        ExperimentConfig("pgrid", seed=-1)


# CSV emission


def test_reflect_example_csv(tmp_path):
    path = reflect(CountingPath(4.0, [1, 2]), CountingPath(4.0, [1.5, 2.5, 3.5]))
    f = tmp_path / "p.csv"
    emit_path_csv(path, f)
    rows = read_csv(f)
    assert len(rows) == 5
    assert [r["mark"] for r in rows] == ["A", "D", "A", "D", "U"]
    assert [int(r["level"]) for r in rows] == [1, 0, 1, 0, 0]


def test_empty_path_is_header_only(tmp_path):
    f = tmp_path / "e.csv"
    emit_path_csv(reflect(CountingPath(1.0), CountingPath(1.0)), f)
    assert f.read_text() == "time,level,mark\n"
    emit_path_csv(CountingPath(1.0), f)
    assert f.read_text() == "time\n"


@settings(max_examples=50, deadline=None)
@given(
    model=st.sampled_from(list(Model)),
    a1=st.floats(0.3, 1.0),
    a2=st.floats(0.3, 1.0),
    horizon=st.floats(0.0, 50.0),
    i0=st.integers(0, 3),
    seed=st.integers(0, 2**32),
)
def test_queue_path_round_trip(model, a1, a2, horizon, i0, seed, tmp_path_factory):
    cfg = QueueModelConfig(model, a1, a2, horizon=horizon, initial_level=i0)
    path = simulate(cfg, RngStream(seed, 0))
    f = tmp_path_factory.mktemp("rt") / "q.csv"
    emit_path_csv(path, f)
    back = parse_path_csv(f, horizon, i0)
    assert same_queue_path(path, back)
    assert path_csv_text(back) == f.read_text()


def test_counting_and_subordinator_round_trip(tmp_path):
    cp = simulate_fpp_renewal(MLParams(0.7), 20.0, RngStream(3, 0))
    emit_path_csv(cp, tmp_path / "c.csv")
    back = parse_path_csv(tmp_path / "c.csv", 20.0)
    assert back.events.tolist() == cp.events.tolist()

    sp = simulate_inverse_subordinator(0.7, 2.0, 0.25, RngStream(3, 1))
    emit_path_csv(sp, tmp_path / "s.csv")
    back = parse_path_csv(tmp_path / "s.csv", 2.0)
    assert back.values.tolist() == sp.values.tolist()
    assert back.times.tolist() == sp.times.tolist()


def test_write_error_names_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_path_csv(CountingPath(1.0), blocker / "sub" / "p.csv")


# experiments


def test_pgrid_report(tmp_path):
    cfg = ExperimentConfig("pgrid", {"alphas": [0.3, 0.7], "betas": [0.2, 0.9]}, seed=1, output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert report.passed
    assert report.summary["max_abs_dev"] < 1e-3
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["checks"]["half_at_unit_rho"]["passed"]
    rows = read_csv(tmp_path / "records.csv")
    assert max(abs(float(r["p"]) - 0.5) for r in rows) == pytest.approx(doc["summary"]["max_abs_dev"], abs=0)


def test_trivial_run_is_vacuous(tmp_path):
    cfg = ExperimentConfig("recurrence", {"replicas": 1, "horizon": 0.0}, output_dir=str(tmp_path))
    report = run_experiment(cfg)
    assert len(report.records) == 1
    assert report.checks and all(c["vacuous"] and c["passed"] for c in report.checks.values())


def test_summary_recomputable_from_records(tmp_path):
    params = {"alpha1": 0.6, "alpha2": 0.9, "horizon": 200.0, "replicas": 30}
    run_experiment(ExperimentConfig("recurrence", params, seed=5, output_dir=str(tmp_path)))
    doc = json.loads((tmp_path / "report.json").read_text())
    rows = read_csv(tmp_path / "records.csv")
    assert len(rows) == 30 == doc["n_records"]
    hits = np.array([r["hit_zero"] == "True" for r in rows])
    finals = np.array([int(r["final_level"]) for r in rows])
    s = doc["summary"]
    assert s["hit_zero_fraction"] == hits.mean()
    assert s["exceed_fraction"] == (finals > s["exceed_level"]).mean()
    assert s["final_level_quantiles"]["q50"] == np.quantile(finals, 0.5)
    assert s["mean_unused"] == np.mean([int(r["unused"]) for r in rows])


def test_moments_summary_recomputable(tmp_path):
    params = {"ps": [0.7], "times": [10.0, 30.0, 100.0], "replicas": 20}
    run_experiment(ExperimentConfig("moments", params, seed=5, output_dir=str(tmp_path)))
    doc = json.loads((tmp_path / "report.json").read_text())
    rows = read_csv(tmp_path / "records.csv")
    levels = np.array([[int(r[f"level_{k}"]) for k in range(3)] for r in rows], float)
    fit = doc["summary"]["fits"][0]
    assert fit["mean"] == pytest.approx(levels.mean(axis=0).tolist(), rel=1e-15)
    slope = np.polyfit(np.log(params["times"]), np.log(levels.mean(axis=0)), 1)[0]
    assert fit["mean_exponent"] == pytest.approx(slope, rel=1e-12)


def test_determinism_and_worker_independence(tmp_path):
    params = {"pairs": [[0.6, 0.9]], "horizon": 100.0, "replicas": 2}
    for d in ("a", "b"):
        run_experiment(ExperimentConfig("fig-regimes", params, seed=9, output_dir=str(tmp_path / d)))
    for f in (tmp_path / "a").glob("*.csv"):
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()

    rec = {"alpha1": 0.7, "alpha2": 0.7, "horizon": 50.0, "replicas": 12}
    one = run_experiment(ExperimentConfig("recurrence", rec, seed=9, output_dir=str(tmp_path / "t1")))
    three = run_experiment(ExperimentConfig("recurrence", rec, seed=9, output_dir=str(tmp_path / "t3")), threads=3)
    assert three.workers == 3
    assert one.records == three.records
    assert (tmp_path / "t1" / "records.csv").read_bytes() == (tmp_path / "t3" / "records.csv").read_bytes()


# command line


def test_cli_mlf(capsys):
    assert main(["mlf", "--alpha", "1", "--beta", "1", "--z", "0", "1"]) == 0
    lines = capsys.readouterr().out.split()
    assert float(lines[0]) == 1.0
    assert float(lines[1]) == pytest.approx(math.e, rel=1e-14)


def test_cli_pml_rhostar_mix(capsys):
    assert main(["pml", "--alpha", "0.5", "--beta", "0.7", "--rho", "1"]) == 0
    assert json.loads(capsys.readouterr().out) == pytest.approx(0.5, abs=1e-6)
    assert main(["rhostar", "--alpha", "1", "--beta", "0.6"]) == 0
    assert json.loads(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-4)
    assert main(["mix", "--p", "0.3", "--alpha", "0.8", "--eps", "0.1"]) == 0
    assert json.loads(capsys.readouterr().out) > 0


def test_cli_invert(tmp_path):
    out = tmp_path / "inv.csv"
    assert main(["--out", str(out), "invert", "--target", "p00", "--p", "0.3", "--alpha", "1", "--t", "0.5", "5"]) == 0
    rows = read_csv(out)
    assert [float(r["t"]) for r in rows] == [0.5, 5.0]
    assert all(0 < float(r["value"]) < 1 for r in rows)
    assert main(["--out", str(out), "invert", "--target", "mean", "--p", "0.3", "--alpha", "1", "--t", "1"]) == 0
    assert float(read_csv(out)[0]["value"]) > 0


def test_cli_sample_and_fpp(tmp_path, capsys):
    out = tmp_path / "s.csv"
    assert main(["--seed", "4", "--out", str(out), "sample", "--alpha", "0.7", "--n", "5"]) == 0
    first = out.read_bytes()
    assert len(read_csv(out)) == 5
    assert main(["--seed", "4", "--out", str(out), "sample", "--alpha", "0.7", "--n", "5"]) == 0
    assert out.read_bytes() == first

    assert main(["fpp", "--alpha", "0.6", "--horizon", "50", "--method", "timechange"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("time\n")
    times = [float(x) for x in text.split()[1:]]
    assert times == sorted(times) and all(0 < t <= 50 for t in times)


def test_cli_simulate_summary(tmp_path, capsys):
    args = ["--seed", "2", "--out", str(tmp_path), "simulate", "--model", "3"]
    args += ["--alpha1", "0.6", "--alpha2", "0.9", "--horizon", "100", "--replicas", "3"]
    assert main(args) == 0
    summary = json.loads(capsys.readouterr().out)["replicas"]
    assert len(summary) == 3
    for rec in summary:
        rows = read_csv(tmp_path / f"replica_{rec['replica']}.csv")
        final = int(rows[-1]["level"]) if rows else 0
        assert final == rec["final_level"]
        assert sum(r["mark"] == "U" for r in rows) == rec["unused"]


def test_cli_exit_codes(tmp_path, capsys):
    # invalid input
    assert main(["experiment", "recurrence", "--alpa1", "0.6"]) == 1
    assert "alpa1" in capsys.readouterr().err
    assert main(["experiment", "nosuch"]) == 1
    assert main(["mix", "--p", "0.7", "--alpha", "0.5", "--eps", "0.1"]) == 1
    # data written, check failed: an impossible return threshold
    out = tmp_path / "fail"
    code = main(["--out", str(out), "experiment", "recurrence", "--horizon", "50", "--replicas", "3",
                 "--return-threshold", "1.5"])
    assert code == 2
    assert not json.loads((out / "report.json").read_text())["passed"]
    # passing
    out = tmp_path / "ok"
    assert main(["--seed", "1", "--out", str(out), "experiment", "pgrid", "--alphas", "[0.5]", "--betas", "[0.5]"]) == 0


def test_cli_config_file(tmp_path, capsys):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"name": "pgrid", "seed": 3, "alphas": [0.4], "betas": [0.6]}))
    assert main(["--config", str(f), "--out", str(tmp_path / "o"), "experiment"]) == 0
    doc = json.loads((tmp_path / "o" / "report.json").read_text())
    assert doc["config"]["seed"] == 3 and doc["n_records"] == 1
    f.write_text('{"name": "pgrid",\n "seed": }')
    assert main(["--config", str(f), "experiment"]) == 1
    assert "2:" in capsys.readouterr().err

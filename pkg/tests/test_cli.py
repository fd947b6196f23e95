import csv
import json
import math

import pytest

from dagsim import cli
from dagsim.cli import ExperimentConfig, emit_best_response_locus, emit_utility_curves, main, run_experiment
from dagsim.engine import SimulationError


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_row_count_and_schema(tmp_path):
    out = tmp_path / "sweep.csv"
    cfg = ExperimentConfig(payloads=(100, 250, 500, 750, 1000, 1500), runs=1, out=str(out))
    run_experiment(cfg)
    rows = read_csv(out)
    assert len(rows) == 3 * 6 * 2
    assert list(rows[0]) == cli.EXPERIMENT_COLUMNS
    for row in rows:
        for k, v in row.items():
            if k not in ("strategy", "energy_scope"):
                assert math.isfinite(float(v))


def test_same_seed_byte_identical(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    args = ["run", "--strategy", "simple,delay-bounded,bo-mac", "--payloads", "100,500",
            "--rate", "both", "--runs", "3", "--seed", "11"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(args[:-1] + ["12", "--out", str(c)]) == 0
    assert a.read_bytes() != c.read_bytes()


def test_worker_pool_matches_serial():
    base = dict(strategies=("simple", "bo-mac"), payloads=(100,), rates=(54,), runs=4, master_seed=5)
    serial = run_experiment(ExperimentConfig(**base))
    pooled = run_experiment(ExperimentConfig(**base, workers=2))
    assert serial == pooled


@pytest.mark.parametrize("args", [
    ["run", "--strategy", "aloha"],
    ["run", "--rate", "11"],
    ["run", "--payloads", "50"],
    ["run", "--runs", "0"],
])
def test_usage_errors(args, capsys):
    with pytest.raises(SystemExit) as exc:
        main(args)
    assert exc.value.code != 0


def test_slot_cap_exit_status(monkeypatch):
    def boom(cfg):
        raise SimulationError("non-terminating configuration")
    monkeypatch.setattr(cli, "run_experiment", boom)
    assert main(["run", "--runs", "1"]) == 3


def test_config_file_and_overrides(tmp_path):
    conf = tmp_path / "exp.json"
    conf.write_text(json.dumps({"strategies": ["bo-mac"], "payloads": [100], "rates": [54], "runs": 2,
                                "master_seed": 3}))
    out = tmp_path / "o.csv"
    assert main(["run", "--config", str(conf), "--runs", "4", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 1 and rows[0]["strategy"] == "bo-mac" and rows[0]["runs"] == "4"
    conf.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        main(["run", "--config", str(conf)])


def test_slot_log_emission(tmp_path):
    logs = tmp_path / "logs"
    main(["run", "--strategy", "simple", "--payloads", "100", "--rate", "54", "--runs", "2",
          "--emit-slot-log", str(logs), "--out", str(tmp_path / "x.csv")])
    files = sorted(logs.iterdir())
    assert [f.name for f in files] == ["simple_54_100_0000.jsonl", "simple_54_100_0001.jsonl"]
    first = json.loads(files[0].read_text().splitlines()[0])
    assert first["round"] == 0


def test_delay_bounded_faster_at_large_payload_low_rate():
    cfg = ExperimentConfig(strategies=("simple", "delay-bounded"), payloads=(1500,), rates=(24,), runs=20)
    simple, db = run_experiment(cfg)
    assert db.completion_ms.mean < simple.completion_ms.mean


def test_utility_curves():
    rows = emit_utility_curves(grid=2)
    assert len(rows) == 2 * 5
    rows = emit_utility_curves(grid=101)
    at_ind = {r["s2"]: r["utility_at_indifference"] for r in rows}
    ref = at_ind[0.0]
    assert all(abs(u - ref) <= 1e-12 * ref for u in at_ind.values())
    assert rows[0]["indifference_s1"] == pytest.approx(0.41176, abs=1e-5)
    s2_one = [r for r in rows if r["s2"] == 1.0]
    best = max(s2_one, key=lambda r: r["utility"])
    assert best["s1"] == min(r["s1"] for r in s2_one)
    assert all(math.isfinite(v) for r in rows for v in r.values())
    with pytest.raises(ValueError):
        emit_utility_curves(grid=1)


def test_best_response_locus():
    rows = emit_best_response_locus(grid=101)
    fixed = [r for r in rows if r["kind"] == "fixed_point"]
    assert len(fixed) == 1
    assert fixed[0]["s1"] == pytest.approx(0.248, abs=5e-4)
    brackets = [r for r in rows if r["kind"] == "bracket"]
    assert [(r["s1"], r["residual"] > 0) for r in brackets] == [(0.24, False), (0.25, True)]
    locus = [r for r in rows if r["kind"] == "locus"]
    assert locus and all(abs(r["residual"]) < 1e-9 and 0 <= r["s1"] <= 1 for r in locus)
    assert all(math.isfinite(v) for r in rows for k, v in r.items() if k != "kind")


def test_curve_commands_write_csv(tmp_path, capsys):
    assert main(["br-locus", "--grid", "11"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("kind,s1,s2,residual\n")
    out = tmp_path / "u.csv"
    assert main(["utility-curves", "--grid", "3", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 15

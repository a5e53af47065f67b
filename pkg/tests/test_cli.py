import csv
import io
import json
import subprocess
import sys

import pytest

from ordclust.cli import main
from ordclust.experiment import COLUMNS, BatchConfig, ConfigError, records_to_csv, run_batch, summarize, trial_generators
from ordclust.metric import save_instance


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_zero_trials_header_only(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert main(["run", "--algorithm", "kcenter-2k", "--generate", "random", "--trials", "0", "--out", str(out)]) == 0
    assert out.read_text() == ",".join(COLUMNS) + "\n"


def test_same_seed_same_csv(tmp_path):
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in paths:
        main(["run", "--algorithm", "kz-zero", "--generate", "random", "--n", "20", "--k", "2",
              "--trials", "4", "--seed", "9", "--out", str(p), "--summary", str(tmp_path / "s.json")])
    assert paths[0].read_bytes() == paths[1].read_bytes()
    other = tmp_path / "other.csv"
    main(["run", "--algorithm", "kz-zero", "--generate", "random", "--n", "20", "--k", "2",
          "--trials", "4", "--seed", "10", "--out", str(other), "--summary", str(tmp_path / "s.json")])
    assert other.read_bytes() != paths[0].read_bytes()


def test_parallel_matches_sequential():
    base = dict(algorithm="kz-lowquery", generate="random", n=16, k=2, trials=4, seed=3, T=3)
    seq, _ = run_batch(BatchConfig(**base))
    par, _ = run_batch(BatchConfig(**base, jobs=2))
    assert records_to_csv(seq) == records_to_csv(par)


def test_kcenter_2k_grid(tmp_path):
    out = tmp_path / "r.csv"
    main(["run", "--algorithm", "kcenter-2k", "--generate", "random", "--n", "30", "--k", "5",
          "--trials", "100", "--out", str(out), "--summary", str(tmp_path / "s.json")])
    rows = _rows(out.read_text())
    assert len(rows) == 100
    assert all(int(r["queries"]) <= 10 and float(r["distortion"]) <= 4 for r in rows)


def test_record_fields_consistent():
    records, _ = run_batch(BatchConfig("kcenter-quadratic", k=3, generate="random", n=12, trials=5))
    for r in records:
        assert float(r.distortion) == pytest.approx(r.cost / float(r.opt))
        assert r.queries <= 3
        assert r.wall_time == ""
        assert r.num_centers == len(r.centers.split())


def test_oracle_skip_and_budget():
    records, _ = run_batch(BatchConfig("kcenter-zero", k=2, generate="random", n=12, trials=2, oracle="skip"))
    assert all(r.opt == "skipped" and r.distortion == "skipped" for r in records)
    records, _ = run_batch(BatchConfig("kcenter-quadratic", k=12, generate="random", n=60, trials=1))
    assert records[0].opt == "skipped"
    assert summarize(records)["with_opt"] == 0


def test_instance_file_and_descriptor_families(tmp_path):
    inst_path = tmp_path / "tree.json"
    assert main(["generate", "tree", "--k", "4", "--seed", "2", "--out", str(inst_path)]) == 0
    desc = json.loads((tmp_path / "tree.descriptor.json").read_text())
    assert desc["opt"] == 1.0
    out = tmp_path / "r.csv"
    main(["run", "--algorithm", "kcenter-quadratic", "--instance", str(inst_path), "--k", "4",
          "--trials", "2", "--out", str(out), "--summary", str(tmp_path / "s.json")])
    rows = _rows(out.read_text())
    assert [r["opt"] for r in rows] == ["1.0", "1.0"]
    records, _ = run_batch(BatchConfig("meyerson", generate="facility", n=12, f=1.0, trials=3,
                                       family_params={"s": 3}))
    assert all(r.opt != "skipped" and float(r.distortion) >= 1 for r in records)


def test_trace_jsonl(tmp_path):
    trace = tmp_path / "t.jsonl"
    main(["run", "--algorithm", "kcenter-2k", "--generate", "random", "--n", "12", "--k", "4",
          "--trials", "2", "--trace", str(trace), "--out", str(tmp_path / "r.csv"),
          "--summary", str(tmp_path / "s.json")])
    lines = [json.loads(x) for x in trace.read_text().splitlines()]
    assert len(lines) == 6 and {x["trial"] for x in lines} == {0, 1}


def test_summary_and_timing(tmp_path):
    summary = tmp_path / "s.json"
    main(["facility", "--generate", "random", "--n", "8", "--f", "2", "--trials", "20", "--threshold", "8",
          "--timing", "--out", str(tmp_path / "r.csv"), "--summary", str(summary)])
    data = json.loads(summary.read_text())
    assert data["trials"] == 20 and 0 <= data["success_rate"] <= 1
    assert data["query_quantiles"]["1.0"] <= 7
    rows = _rows((tmp_path / "r.csv").read_text())
    assert all(r["wall_time"] for r in rows)


@pytest.mark.parametrize("argv", [
    ["run", "--algorithm", "kz-zero", "--generate", "random", "--k", "1"],
    ["run", "--algorithm", "kcenter-2k", "--generate", "random", "--n", "5", "--k", "6"],
    ["run", "--algorithm", "kz-lowquery", "--generate", "random", "--T", "0"],
    ["run", "--algorithm", "kcenter-2k", "--instance", "/nonexistent.json"],
    ["facility", "--generate", "random", "--f", "0"],
    ["generate", "tree", "--s", "3", "--out", "/tmp/x.json"],
])
def test_config_errors_exit_nonzero(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_unknown_algorithm_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--algorithm", "nope", "--generate", "random"])
    assert exc.value.code != 0
    with pytest.raises(ConfigError):
        run_batch(BatchConfig("nope", generate="random"))


def test_instance_file_k_too_large(tmp_path, line):
    inst, _ = line
    path = tmp_path / "line.json"
    save_instance(inst, path)
    with pytest.raises(ConfigError):
        run_batch(BatchConfig("kcenter-quadratic", k=5, instance=str(path)))


def test_trial_generators_are_independent_streams():
    a1, b1 = trial_generators(7, 0)
    a2, b2 = trial_generators(7, 1)
    x = [g.random() for g in (a1, b1, a2, b2)]
    assert len(set(x)) == 4
    assert trial_generators(7, 0)[0].random() == x[0]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ordclust", "run", "--algorithm", "kcenter-zero",
                           "--generate", "random", "--n", "8", "--k", "3", "--trials", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("instance,")

import csv
import json
import subprocess
import sys

import pytest

from ccfair.cli import ExperimentSpec, main
from ccfair.errors import InvalidArgumentError


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_outputs(tmp_path, capsys):
    rc = main(["simulate", "--rs", "pa", "--n", "3", "--m", "5", "--runs", "200", "--seed", "4", "--out", str(tmp_path)])
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["schema"] == 1
    assert summary["spec"]["rs"] == "pa" and summary["spec"]["m"] == 5
    assert "wall_time_s" not in summary
    assert summary["headline_fully_fair"] == summary["report"]["fully_fair_freq"]
    rows = read_csv(tmp_path / "fairness.csv")
    assert rows[0] == ["i", "cc_fair_freq", "ci_halfwidth", "mean_final_count"]
    assert [r[0] for r in rows[1:]] == ["1", "2", "3"]
    assert str(tmp_path / "summary.json") in capsys.readouterr().out


def test_simulate_strict_headline_and_json_table(tmp_path):
    rc = main(
        ["simulate", "--rs", "extremepa", "--n", "3", "--m", "9", "--runs", "300", "--out", str(tmp_path),
         "--strict-fairness", "--format", "json", "--record-time"]
    )
    assert rc == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["headline_fully_fair"] == summary["report"]["strict_fully_fair_freq"]
    assert summary["wall_time_s"] >= 0
    table = json.loads((tmp_path / "fairness.json").read_text())["rows"]
    assert [r["i"] for r in table] == [1, 2, 3]


def test_exact_outputs(tmp_path):
    assert main(["exact", "--rs", "ur", "--n", "2", "--m", "1", "--out", str(tmp_path), "--dump"]) == 0
    exact = json.loads((tmp_path / "exact.json").read_text())
    assert exact["mu_empty"] == pytest.approx(2.0)
    assert exact["n_states"] == 4
    assert sum(a["prob"] for a in exact["absorption"]) == pytest.approx(1.0)
    trans = read_csv(tmp_path / "transitions.csv")
    assert trans[0] == ["from", "to", "prob"]
    states = read_csv(tmp_path / "states.csv")
    assert len(states) == 1 + exact["n_states"]


def test_exact_lumped_matches_labeled(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["exact", "--rs", "pa", "--n", "2", "--m", "3", "--out", str(a)]) == 0
    assert main(["exact", "--rs", "pa", "--n", "2", "--m", "3", "--out", str(b), "--lumped"]) == 0
    ja, jb = (json.loads((d / "exact.json").read_text()) for d in (a, b))
    assert ja["mu_empty"] == pytest.approx(jb["mu_empty"], abs=1e-12)
    assert jb["n_states"] <= ja["n_states"]


def test_tiescan_outputs(tmp_path):
    rc = main(["tiescan", "--n", "2", "--m", "10", "100", "--runs", "2000", "--seed", "1", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "tiescan.csv")
    assert rows[0] == ["m", "tie_freq", "ci_halfwidth"]
    assert [r[0] for r in rows[1:]] == ["10", "100"]
    assert json.loads((tmp_path / "tiescan_summary.json").read_text())["spec"]["m"] == [10, 100]


def test_sweep_thm4_small_grid(tmp_path):
    rc = main(["sweep", "--preset", "thm4", "--m", "200", "--runs", "100", "--grid", "2,3", "--out", str(tmp_path)])
    assert rc == 0
    rows = read_csv(tmp_path / "thm4.csv")
    assert rows[0] == ["n", "mean_time", "ci_halfwidth", "target", "deviation"]
    assert [r[0] for r in rows[1:]] == ["2", "3"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["preset"] == "thm4" and len(manifest["files"]) == 2


def test_sweep_fig3_small(tmp_path):
    rc = main(["sweep", "--preset", "fig3", "--n", "4", "--m", "20", "--runs", "50", "--out", str(tmp_path)])
    assert rc == 0
    for rs in ("extremepa", "pa", "ur"):
        assert read_csv(tmp_path / f"fig3_{rs}.csv")[0][0] == "i"


def test_sweep_oracle_small(tmp_path):
    assert main(["sweep", "--preset", "oracle", "--runs", "2000", "--out", str(tmp_path)]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "max_abs_z" in manifest
    rows = read_csv(tmp_path / "oracle.csv")
    assert rows[0] == ["m", "n", "rs", "quantity", "exact", "estimate", "sigma", "z"]


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--rs", "pa", "--n", "1", "--m", "5", "--runs", "10"],
        ["simulate", "--rs", "pa", "--n", "3", "--m", "5"],
        ["simulate", "--rs", "pa", "--n", "3", "--m", "5", "--runs", "0"],
        ["simulate", "--rs", "random", "--n", "3", "--m", "5", "--runs", "10"],
        ["exact", "--n", "2", "--m", "2"],
        ["tiescan", "--m", "10"],
        ["bogus"],
    ],
)
def test_invalid_input_exits_1(tmp_path, argv):
    with pytest.raises(SystemExit) as exc:
        rc = main(argv + ["--out", str(tmp_path)])
        raise SystemExit(rc)
    assert exc.value.code == 1


def test_unknown_preset_lists_available(tmp_path, capsys):
    assert main(["sweep", "--preset", "fig9", "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "fig3" in err and "thm4" in err and "oracle" in err


def test_capacity_exit_code(tmp_path, capsys):
    assert main(["exact", "--rs", "ur", "--n", "3", "--m", "4", "--cap", "10", "--out", str(tmp_path)]) == 2
    assert "frontier" in capsys.readouterr().err


def test_io_failure_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["exact", "--rs", "ur", "--n", "2", "--m", "1", "--out", str(blocker / "sub")]) == 3


def test_spec_rejects_unknown_fields():
    with pytest.raises(InvalidArgumentError, match="colour"):
        ExperimentSpec.from_dict({"command": "simulate", "colour": "red"})


def test_spec_echo_omits_output_location():
    spec = ExperimentSpec.from_dict({"command": "exact", "rs": "ur", "n": 2, "m": 1, "out": "/tmp/x", "threads": 3})
    assert "out" not in spec.echo() and "threads" not in spec.echo()


@pytest.mark.parametrize("argv", [
    ["simulate", "--rs", "extremepa", "--n", "5", "--m", "300", "--runs", "400", "--seed", "7"],
    ["simulate", "--rs", "ur", "--n", "4", "--m", "30", "--runs", "400", "--seed", "7"],
])
def test_outputs_are_byte_identical_across_threads(tmp_path, argv):
    blobs = []
    for threads in (1, 2, 8):
        out = tmp_path / f"t{threads}"
        assert main(argv + ["--threads", str(threads), "--out", str(out)]) == 0
        blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert blobs[0] == blobs[1] == blobs[2]


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ccfair", "exact", "--rs", "extremepa", "--n", "2", "--m", "2", "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "exact.json").exists()

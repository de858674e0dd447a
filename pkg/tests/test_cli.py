import csv
import io
import json
import math

import pytest

from udsim import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# meta ")
    meta = json.loads(lines[0][len("# meta "):])
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    return meta, lines[1].split(","), rows


SWEEP = ("sweep", "--target", "rate", "--trajectory", "uniform",
         "--axis", "omega=lin:0.5:2.5:5", "--axis", "a=1,2,3")


def test_rate_columns_and_planck_value(capsys):
    code, out, _ = run_cli(capsys, "rate", "--trajectory", "uniform", "--a", "2", "--omega", "1.5")
    assert code == 0
    meta, cols, rows = parse_csv(out)
    assert cols == cli.SERIES_COLUMNS["rate"]
    planck = 1.5 / (2 * math.pi) / math.expm1(2 * math.pi * 1.5 / 2)
    assert float(rows[0]["value"]) == pytest.approx(planck, rel=1e-7)
    assert meta["subcommand"] == "rate" and meta["config"]["a"] == 2.0


def test_sweep_shape_and_order(capsys):
    code, out, _ = run_cli(capsys, *SWEEP)
    assert code == 0
    meta, cols, rows = parse_csv(out)
    assert len(rows) == 15
    assert cols[:2] == ["omega", "a"] and cols[-1] == "failure"
    pairs = [(float(r["omega"]), float(r["a"])) for r in rows]
    assert pairs == sorted(pairs)
    assert meta["failed_points"] == 0
    assert all(r["failure"] == "" for r in rows)


def test_same_config_gives_identical_bytes(capsys):
    first = run_cli(capsys, *SWEEP)[1]
    second = run_cli(capsys, *SWEEP)[1]
    assert first == second


def test_parallel_rows_match_serial(capsys):
    serial = parse_csv(run_cli(capsys, *SWEEP)[1])[2]
    parallel = parse_csv(run_cli(capsys, *SWEEP, "--workers", "3")[1])[2]
    assert serial == parallel


def test_values_round_trip_exactly(capsys):
    out = run_cli(capsys, "rate", "--trajectory", "uniform", "--a", "1.3", "--omega", "0.7")[1]
    row = parse_csv(out)[2][0]
    v = float(row["value"])
    assert format(v, ".17g") == row["value"]


def test_failing_point_becomes_error_row(capsys, monkeypatch):
    real = cli._sweep_task

    def flaky(task):
        _, values = task
        if values["omega"] == 1.5 and values["a"] == 2.0:
            return None, "NonConvergence: injected"
        return real(task)

    monkeypatch.setattr(cli, "_sweep_task", flaky)
    monkeypatch.setattr(cli.run_sweep, "__defaults__", (flaky,))
    code, out, err = run_cli(capsys, *SWEEP)
    assert code == cli.EXIT_NUMERIC
    meta, _, rows = parse_csv(out)
    bad = [r for r in rows if r["failure"]]
    assert len(rows) == 15 and len(bad) == 1
    assert bad[0]["value"] == "" and "injected" in bad[0]["failure"]
    assert meta["failed_points"] == 1
    assert "1 sweep point" in err


def test_real_failure_in_sweep(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--target", "rate", "--trajectory", "uniform",
                           "--axis", "a=0,1")
    assert code == cli.EXIT_NUMERIC
    rows = parse_csv(out)[2]
    assert rows[0]["failure"].startswith("ValueError") and rows[1]["failure"] == ""


def test_flag_overrides_file(tmp_path, capsys):
    conf = tmp_path / "run.cfg"
    conf.write_text("# detector\ntrajectory = uniform\na = 1.0\nomega = 2\naxis.omega = 1,2\n")
    code, out, _ = run_cli(capsys, "sweep", "--target", "rate", "--config", str(conf),
                           "--a", "3", "--axis", "omega=0.5,1")
    assert code == 0
    meta, _, rows = parse_csv(out)
    assert meta["overridden"]["a"] == {"file": "1.0", "flag": "3"}
    assert meta["overridden"]["axis.omega"] == {"file": "1,2", "flag": "0.5,1"}
    assert [r["omega"] for r in rows] == ["0.5", "1"]
    assert meta["config"]["a"] == 3.0


def test_out_of_range_dimension(capsys):
    code, _, err = run_cli(capsys, "rate", "--d", "7")
    assert code == cli.EXIT_CONFIG
    assert "d: 7" in err


def test_unknown_file_key(tmp_path, capsys):
    conf = tmp_path / "bad.cfg"
    conf.write_text("bogus = 1\n")
    code, _, err = run_cli(capsys, "rate", "--config", str(conf))
    assert code == cli.EXIT_CONFIG and "bogus" in err


def test_duplicate_file_key(tmp_path, capsys):
    conf = tmp_path / "dup.cfg"
    conf.write_text("a = 1\na = 2\n")
    assert run_cli(capsys, "rate", "--config", str(conf))[0] == cli.EXIT_CONFIG


def test_unknown_flag(capsys):
    assert run_cli(capsys, "rate", "--bogus", "1")[0] == 2


@pytest.mark.parametrize("argv", [
    ("sweep", "--axis", "omega=1,2"),
    ("sweep", "--target", "rate"),
    ("sweep", "--target", "rate", "--axis", "omega=1", "--axis", "a=1", "--axis", "x=0",
     "--axis", "d=4"),
    ("sweep", "--target", "rate", "--axis", "trajectory=1"),
    ("sweep", "--target", "rate", "--axis", "omega=log:-1:2:3"),
    ("probability", "--d", "5"),
    ("teleport", "--a", "3"),
])
def test_bad_configurations(capsys, argv):
    assert run_cli(capsys, *argv)[0] == cli.EXIT_CONFIG


def test_axis_grammar():
    p = cli.Param(cli._real, 0.0)
    assert cli.parse_axis("x", "1, 2.5", p) == (1.0, 2.5)
    assert cli.parse_axis("x", "lin:0:1:3", p) == (0.0, 0.5, 1.0)
    assert cli.parse_axis("x", "log:1:100:3", p) == pytest.approx((1.0, 10.0, 100.0))


def test_json_envelope(capsys):
    code, out, _ = run_cli(capsys, "rho11", "--n", "20", "--eta_max", "20", "--format", "json")
    assert code == 0
    body = json.loads(out)
    assert set(body) == {"meta", "columns", "rows"}
    assert body["columns"] == cli.SERIES_COLUMNS["rho11"]
    assert len(body["rows"]) == 20
    assert body["rows"][0]["eta"] == 0.0


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    code, out, _ = run_cli(capsys, "rate", "--output", str(path))
    assert code == 0 and out == ""
    assert path.read_text().startswith("# meta ")


def test_teleport_columns(capsys):
    code, out, _ = run_cli(capsys, "teleport", "--t_max", "2", "--n", "30")
    assert code == 0
    cols = parse_csv(out)[1]
    assert cols == cli.SERIES_COLUMNS["teleport"][:-2]
    code, out, _ = run_cli(capsys, "teleport", "--t_max", "2", "--n", "5", "--samples", "500")
    assert parse_csv(out)[1] == cli.SERIES_COLUMNS["teleport"]


def test_module_entry_point():
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "udsim", "--version"], capture_output=True,
                          text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout + proc.stderr

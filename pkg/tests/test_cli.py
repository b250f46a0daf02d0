import csv
import io
import json

import pytest

from qudit_bell import cli
from qudit_bell.errors import SolverFailure
from qudit_bell.records import ResultRecord, RunConfig, StateSpec
from qudit_bell.reports import emit_table1, emit_table2, to_csv


def run(argv, capsys):
    code = cli.run_command(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_pv_cglmp(capsys):
    code, out, err = run(["pv", "cglmp", "--state", "mes", "--d", "2", "--samples", "50000", "--seed", "7"], capsys)
    assert code == 0
    rec = json.loads(out)
    assert set(rec) == {"config", "result", "meta"}
    assert set(rec["meta"]) >= {"version", "seed", "wall_time_s"}
    assert rec["meta"]["seed"] == 7
    assert abs(rec["result"]["p_hat"] - 0.32) < 0.01
    assert "p_v" in err


def test_global_flags_before_or_after(capsys, tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    assert cli.run_command(["--seed", "5", "--out", str(a), "pv", "cglmp", "--d", "3", "--samples", "3000"]) == 0
    assert cli.run_command(["pv", "cglmp", "--d", "3", "--samples", "3000", "--seed", "5", "--out", str(b)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    assert ra["config"]["seed"] == rb["config"]["seed"] == 5
    assert ra["result"] == rb["result"]


def test_reproducible_numeric_fields(capsys):
    argv = ["pv", "behaviour", "--state", "mss", "--rank", "2", "--d", "3", "--samples", "500", "--seed", "3"]
    _, out1, _ = run(argv, capsys)
    _, out2, _ = run(argv + ["--threads", "2"], capsys)
    r1, r2 = json.loads(out1)["result"], json.loads(out2)["result"]
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


@pytest.mark.parametrize(
    "argv",
    [
        ["nonsense"],
        ["pv", "cglmp"],
        ["pv", "cglmp", "--d", "1"],
        ["pv", "cglmp", "--d", "3", "--state", "mss", "--rank", "4"],
        ["pv", "cglmp", "--d", "3", "--state", "family", "--theta0", "0.1", "--theta1", "0.2"],
        ["pv", "cglmp", "--d", "3", "--state", "alpha", "--alpha", "0.9,0.9"],
        ["pv", "cglmp", "--d", "3", "--samples", "0"],
        ["figure", "fig9"],
        ["table1", "--scale", "2"],
        ["pv", "cglmp", "--d", "3", "--bogus-flag"],
    ],
)
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "usage" in err


def test_help_is_success(capsys):
    assert run(["--help"], capsys)[0] == 0


def test_solver_failure_exit_code(monkeypatch, capsys):
    def boom(*a, **k):
        raise SolverFailure("pivot cap")

    monkeypatch.setattr(cli, "estimate_pv_behaviour", boom)
    code, _, err = run(["pv", "behaviour", "--d", "3", "--samples", "10"], capsys)
    assert code == 3
    assert "solver failure" in err


def test_threads_default_from_env(monkeypatch):
    monkeypatch.setenv("QBL_THREADS", "3")
    args = cli.build_parser().parse_args(["mvs", "--d", "3"])
    assert args.threads == 3


def test_mvs_command(capsys):
    code, out, _ = run(["mvs", "--d", "3", "--restarts", "4", "--seed", "1"], capsys)
    assert code == 0
    alpha = json.loads(out)["result"]["alpha"]
    assert alpha == pytest.approx([0.6169, 0.4888, 0.6169], abs=2e-3)


def test_fit_points(capsys):
    code, out, _ = run(["fit", "--points", "2:0.025330295910584444,3:0.004031441804149936"], capsys)
    assert code == 0
    assert json.loads(out)["result"]["slope_b"] == pytest.approx(-1.0, abs=1e-9)


def test_scan_and_figure_csv(capsys, tmp_path):
    path = tmp_path / "grid.csv"
    code, out, _ = run(["scan", "--d", "4", "--grid-n", "4", "--samples", "2000", "--csv", str(path)], capsys)
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 16 and list(rows[0]) == ["theta0", "theta1", "pv", "violations", "samples"]
    path2 = tmp_path / "fig2.csv"
    code, _, _ = run(["figure", "fig2", "--dims", "2", "3", "--samples", "20000", "--csv", str(path2)], capsys)
    assert code == 0
    text = path2.read_text()
    assert text.splitlines()[0] == "series,x,y,ci_low,ci_high"
    rows = list(csv.DictReader(io.StringIO(text)))
    assert {r["series"] for r in rows} == {"MES", "MVS"}
    assert all("," not in r["y"] and float(r["y"]) > 0 for r in rows)


def test_record_round_trip():
    cfg = RunConfig(
        "pv", d=4, samples=10, seed=2, scenario="behaviour",
        state_spec=StateSpec("alpha", alpha=(0.6, 0.8)), dims=(2, 3),
    ).validate()
    rec = ResultRecord(cfg, {"p_hat": 0.1, "violations": 1, "nested": {"xs": [1.5, 2.5]}}, 0.25, "0.1.0", "2026-01-01T00:00:00+00:00")
    back = ResultRecord.from_json(rec.to_json())
    assert back == rec
    assert back.to_json() == rec.to_json()


def test_cli_record_round_trip(capsys):
    _, out, _ = run(["pv", "cglmp", "--d", "4", "--state", "family", "--theta0", "0.864", "--theta1", "0.604", "--samples", "2000"], capsys)
    rec = ResultRecord.from_json(out)
    assert json.loads(rec.to_json()) == json.loads(out)
    assert rec.config.state_spec.kind == "family"


def test_table_rows():
    rows = emit_table1(1e-7, seed=0, max_d=3)
    assert [(r["d"], r["r"], r["state_kind"]) for r in rows] == [
        (2, 2, "mss"), (2, 2, "mvs"), (3, 2, "mss"), (3, 2, "mvs"), (3, 3, "mss"), (3, 3, "mvs"),
    ]
    assert rows[0]["samples"] == 1000 and rows[2]["samples"] == 100
    # the rank-2 maximizer is the balanced state, so both kinds see identical samples
    assert rows[0]["violations"] == rows[1]["violations"]
    text = to_csv(rows)
    assert text.splitlines()[0] == "d,r,state_kind,samples,violations,p_hat,p_hat_percent,ci_low,ci_high"
    t2 = emit_table2(1e-6, max_d=3)
    assert [r["d"] for r in t2] == [2, 3] and t2[0]["samples"] == 1000

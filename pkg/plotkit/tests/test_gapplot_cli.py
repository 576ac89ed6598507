import json
import os

import pytest

from gapplot.cli import main

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
PD = os.path.join(FIXTURES, "report_pd.json")
LH = os.path.join(FIXTURES, "report_lh.json")


def test_curves_command_writes_figure(tmp_path, capsys):
    out = tmp_path / "c.png"
    code = main(["curves", PD, "-o", str(out)])
    captured = capsys.readouterr()
    assert code == 0
    assert out.exists() and out.stat().st_size > 0
    assert str(out) in captured.err
    assert captured.out == ""


def test_curves_dump_points_round_trips(tmp_path, capsys):
    code = main(["curves", PD, "-o", str(tmp_path / "c.png"),
                 "--dump-points"])
    captured = capsys.readouterr()
    assert code == 0
    points = json.loads(captured.out)
    report = json.load(open(PD))
    for p in points:
        assert p["mean"] == report["tasks"]["pd"]["methods"][p["method"]][
            "expected_max"]["mean"]


def test_lhgrid_command(tmp_path, capsys):
    out = tmp_path / "g.png"
    code = main(["lhgrid", LH, "-o", str(out), "--dump-points"])
    captured = capsys.readouterr()
    assert code == 0
    assert out.exists()
    grid = json.loads(captured.out)
    assert grid["half_width"] == 4
    assert all("ref" in c for c in grid["cells"])


def test_bad_report_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "tasks": {
        "pd": {"methods": {}}}}))
    code = main(["curves", str(bad), "-o", str(tmp_path / "x.png")])
    captured = capsys.readouterr()
    assert code == 1
    assert "error:" in captured.err


def test_missing_file_exits_nonzero(tmp_path, capsys):
    code = main(["curves", str(tmp_path / "nope.json"),
                 "-o", str(tmp_path / "x.png")])
    captured = capsys.readouterr()
    assert code == 1
    assert "error:" in captured.err


def test_unknown_subcommand_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2

import copy
import json
import os

import pytest

from gapplot.report import ReportError, load_report, pick_task, validate_report

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
PD = os.path.join(FIXTURES, "report_pd.json")
LH = os.path.join(FIXTURES, "report_lh.json")


def test_fixtures_load():
    for path in (PD, LH):
        report = load_report(path)
        assert report["schema_version"] == 1
        assert report["tasks"]


def test_rejects_bad_schema_version():
    report = load_report(PD)
    report["schema_version"] = 99
    with pytest.raises(ReportError, match="schema_version"):
        validate_report(report)


def test_rejects_non_monotonic_budgets():
    report = copy.deepcopy(load_report(PD))
    task = next(iter(report["tasks"].values()))
    curve = next(s["expected_max"] for s in task["methods"].values()
                 if s["expected_max"])
    curve["k"][-1] = curve["k"][0]
    with pytest.raises(ReportError, match="strictly increasing"):
        validate_report(report)


def test_rejects_length_mismatch():
    report = copy.deepcopy(load_report(PD))
    task = next(iter(report["tasks"].values()))
    curve = next(s["expected_max"] for s in task["methods"].values()
                 if s["expected_max"])
    curve["mean"] = curve["mean"][:-1]
    with pytest.raises(ReportError, match="length"):
        validate_report(report)


def test_rejects_non_json(tmp_path):
    path = tmp_path / "report.json"
    path.write_text("not json {")
    with pytest.raises(ReportError, match="not valid JSON"):
        load_report(str(path))


def test_pick_task_disambiguation():
    report = load_report(PD)
    assert pick_task(report, None) == "pd"
    assert pick_task(report, "pd") == "pd"
    with pytest.raises(ReportError, match="unknown task"):
        pick_task(report, "nope")
    two = {"schema_version": 1,
           "tasks": {"a": {"methods": {}}, "b": {"methods": {}}}}
    with pytest.raises(ReportError, match="--task"):
        pick_task(two, None)


def test_pick_task_filters_on_need():
    report = load_report(LH)
    assert pick_task(report, None, need="lighthouse_grid") == "lh2d"
    bare = {"schema_version": 1, "tasks": {"pd": {"methods": {}}}}
    with pytest.raises(ReportError, match="lighthouse_grid"):
        pick_task(bare, None, need="lighthouse_grid")

"""Load and validate sweep-report documents.

The training harness writes one JSON report per sweep: for every task a map
of methods, each carrying the per-run best validation rewards and an
expected-best-of-k curve with bootstrap bands, plus (for view-radius
studies) a grid of final episode lengths keyed by (view radius, expert
radius, method). Everything here is precomputed; this package only checks
structure and draws.
"""

from __future__ import annotations

import json

SUPPORTED_SCHEMA = 1


class ReportError(Exception):
    """Malformed or unusable report document."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ReportError(message)


def _check_curve(task_id: str, method_id: str, curve: dict) -> None:
    where = f"{task_id}/{method_id}"
    _require(isinstance(curve, dict), f"{where}: expected_max must be an object")
    for key in ("k", "mean", "lo", "hi"):
        _require(key in curve, f"{where}: curve is missing {key!r}")
        _require(isinstance(curve[key], list) and curve[key],
                 f"{where}: curve {key!r} must be a non-empty list")
    n = len(curve["k"])
    for key in ("mean", "lo", "hi"):
        _require(len(curve[key]) == n,
                 f"{where}: curve arrays differ in length")
    ks = curve["k"]
    _require(all(isinstance(k, int) and k >= 1 for k in ks),
             f"{where}: budgets must be integers >= 1")
    _require(all(b > a for a, b in zip(ks, ks[1:])),
             f"{where}: budgets must be strictly increasing")
    for key in ("mean", "lo", "hi"):
        _require(all(isinstance(v, (int, float)) for v in curve[key]),
                 f"{where}: curve {key!r} has non-numeric entries")


def _check_grid_cell(task_id: str, cell: dict) -> None:
    _require(isinstance(cell, dict), f"{task_id}: grid cell must be an object")
    for key in ("view_radius", "expert_radius"):
        _require(isinstance(cell.get(key), int),
                 f"{task_id}: grid cell needs integer {key!r}")
    _require(isinstance(cell.get("method"), str),
             f"{task_id}: grid cell needs a method id")
    _require(isinstance(cell.get("ep_lens"), list),
             f"{task_id}: grid cell needs an ep_lens list")


def validate_report(report: dict) -> dict:
    _require(isinstance(report, dict), "report must be a JSON object")
    _require(report.get("schema_version") == SUPPORTED_SCHEMA,
             f"unsupported schema_version {report.get('schema_version')!r}")
    tasks = report.get("tasks")
    _require(isinstance(tasks, dict), "report needs a tasks object")
    for task_id, block in tasks.items():
        _require(isinstance(block, dict), f"{task_id}: task block must be an object")
        methods = block.get("methods")
        _require(isinstance(methods, dict), f"{task_id}: needs a methods object")
        for method_id, slot in methods.items():
            _require(isinstance(slot, dict),
                     f"{task_id}/{method_id}: method block must be an object")
            curve = slot.get("expected_max")
            if curve is not None:
                _check_curve(task_id, method_id, curve)
        grid = block.get("lighthouse_grid")
        if grid is not None:
            _require(isinstance(grid, list),
                     f"{task_id}: lighthouse_grid must be a list")
            for cell in grid:
                _check_grid_cell(task_id, cell)
    return report


def load_report(path) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            report = json.load(f)
    except json.JSONDecodeError as e:
        raise ReportError(f"{path}: not valid JSON ({e})") from e
    return validate_report(report)


def pick_task(report: dict, task_id: str | None, *, need: str | None = None) -> str:
    """Resolve which task block to draw. With no explicit id, a unique
    candidate (optionally filtered to blocks having `need`) is required."""
    tasks = report["tasks"]
    if task_id is not None:
        if task_id not in tasks:
            raise ReportError(f"unknown task {task_id!r}; report has: "
                              f"{', '.join(sorted(tasks))}")
        return task_id
    candidates = sorted(t for t, block in tasks.items()
                        if need is None or block.get(need))
    if not candidates:
        raise ReportError(f"report has no task with {need}" if need
                          else "report has no tasks")
    if len(candidates) > 1:
        raise ReportError("several tasks qualify "
                          f"({', '.join(candidates)}); pass --task")
    return candidates[0]

"""Fold run records into a sweep report.

The report is one JSON document per invocation: for every (task, method) it
lists each run's best validation reward and the expected-best-of-k curve
with bootstrap bands. Tasks with a view-radius parameter and runs carrying
an expert radius also get a (view_radius, expert_radius) grid of final
episode lengths, which is what the lighthouse capability study plots.

A CSV summary (one row per task/method/k) sits alongside for quick grepping,
and if the gapplot package is importable the report step also renders its
figures next to the JSON.
"""

from __future__ import annotations

import csv
import io
import json
import os

from .records import load_records_dir
from .stats import expected_max_curve

REPORT_SCHEMA_VERSION = 1
MAX_BUDGET_K = 45


def build_report(records: list, n_resamples: int = 1000, seed: int = 0,
                 max_k: int = MAX_BUDGET_K) -> dict:
    tasks: dict = {}
    for rec in records:
        task_id = rec.task["task_id"]
        method_id = rec.method["method_id"]
        entry = tasks.setdefault(task_id, {"methods": {}, "_grid": [],
                                           "_params": rec.task.get("params", {})})
        best = rec.best_reward()
        slot = entry["methods"].setdefault(
            method_id, {"n_runs": 0, "n_failed": 0, "best_values": []})
        slot["n_runs"] += 1
        if rec.failed:
            slot["n_failed"] += 1
        if best is not None:
            slot["best_values"].append(best)
        view_radius = rec.task.get("params", {}).get("view_radius")
        final = rec.final_row()
        if (view_radius is not None and rec.expert_radius is not None
                and final is not None):
            entry["_grid"].append({"view_radius": view_radius,
                                   "expert_radius": rec.expert_radius,
                                   "method": method_id,
                                   "ep_len": final["ep_len"],
                                   "reward": final["reward"]})
    out_tasks = {}
    for task_id, entry in sorted(tasks.items()):
        methods = {}
        for method_id, slot in sorted(entry["methods"].items()):
            values = slot["best_values"]
            curve = (expected_max_curve(values, max_k=max_k,
                                        n_resamples=n_resamples, seed=seed)
                     if values else None)
            methods[method_id] = {"n_runs": slot["n_runs"],
                                  "n_failed": slot["n_failed"],
                                  "best_values": values,
                                  "expected_max": curve}
        # params of the first record seen; grids assume one env config per task
        block = {"methods": methods, "params": entry["_params"]}
        if entry["_grid"]:
            cells: dict = {}
            for g in entry["_grid"]:
                key = (g["view_radius"], g["expert_radius"], g["method"])
                cell = cells.setdefault(key, {"view_radius": key[0],
                                              "expert_radius": key[1],
                                              "method": key[2],
                                              "ep_lens": [], "rewards": []})
                cell["ep_lens"].append(g["ep_len"])
                cell["rewards"].append(g["reward"])
            block["lighthouse_grid"] = [cells[k] for k in sorted(cells)]
        out_tasks[task_id] = block
    return {"schema_version": REPORT_SCHEMA_VERSION, "tasks": out_tasks}


def report_to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["task", "method", "n_runs", "n_failed", "k",
                     "expected_max", "band_lo", "band_hi"])
    for task_id, block in report["tasks"].items():
        for method_id, slot in block["methods"].items():
            curve = slot["expected_max"]
            if curve is None:
                writer.writerow([task_id, method_id, slot["n_runs"],
                                 slot["n_failed"], "", "", "", ""])
                continue
            for k, m, lo, hi in zip(curve["k"], curve["mean"],
                                    curve["lo"], curve["hi"]):
                writer.writerow([task_id, method_id, slot["n_runs"],
                                 slot["n_failed"], k,
                                 f"{m:.6f}", f"{lo:.6f}", f"{hi:.6f}"])
    return buf.getvalue()


def write_report(runs_dir, out_dir, n_resamples: int = 1000, seed: int = 0,
                 render: bool = True) -> dict:
    """Build and persist report.json + summary.csv (+ figures when gapplot
    is importable). Returns {"report": ..., "paths": [...]}."""
    records = load_records_dir(runs_dir)
    if not records:
        raise ValueError(f"no run records found under {runs_dir}")
    report = build_report(records, n_resamples=n_resamples, seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    csv_path = os.path.join(out_dir, "summary.csv")
    with open(csv_path, "w", encoding="utf-8") as f:
        f.write(report_to_csv(report))
    paths = [json_path, csv_path]
    if render:
        paths.extend(_render_figures(json_path, out_dir))
    return {"report": report, "paths": paths}


def _render_figures(json_path, out_dir) -> list:
    try:
        import gapplot
    except ImportError:
        return []
    return gapplot.render_report(json_path, out_dir)

"""Render-only companion to the training harness.

Consumes the harness's sweep-report JSON and draws expected-best-of-k
reward curves and lighthouse episode-length grids. All statistics arrive
precomputed in the report; this package validates structure and plots.
"""

from __future__ import annotations

import os

from .curves import curve_points, plot_expected_max
from .lhgrid import grid_points, plot_lighthouse_grid, ref_length
from .report import ReportError, load_report, validate_report

__version__ = "0.1.0"

__all__ = ["ReportError", "curve_points", "grid_points", "load_report",
           "plot_expected_max", "plot_lighthouse_grid", "ref_length",
           "render_report", "validate_report"]


def render_report(json_path, out_dir) -> list:
    """Render every figure the report supports; returns the written paths.

    This is the hook the harness's report step calls when gapplot is
    installed, so failures here should be loud, not swallowed."""
    report = load_report(json_path)
    paths = []
    for task_id, block in sorted(report["tasks"].items()):
        if any(slot.get("expected_max") for slot in block["methods"].values()):
            path = os.path.join(out_dir, f"curves_{task_id}.png")
            plot_expected_max(report, path, task_id=task_id)
            paths.append(path)
        if block.get("lighthouse_grid"):
            path = os.path.join(out_dir, f"lhgrid_{task_id}.png")
            plot_lighthouse_grid(report, path, task_id=task_id)
            paths.append(path)
    return paths

"""Lighthouse capability grids: episode-length boxplots per (i, j) cell.

i is the student's view radius, j the teacher's. Each subplot fixes i and
shows one horizontal box per (j, method) group of runs; the vertical
reference line marks the expected episode length of the best policy that
only sees radius i, which on a half-width-n board is
0.5*n + 0.5*(3n - 2i): the goal is found immediately on one side and after
a full sweep-and-return on the other.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .report import ReportError, pick_task


def ref_length(n: int, i: int) -> float:
    return 0.5 * n + 0.5 * (3 * n - 2 * i)


def _board_half_width(block: dict, half_width: int | None) -> int:
    if half_width is not None:
        return half_width
    params = block.get("params") or {}
    if isinstance(params.get("half_width"), int):
        return params["half_width"]
    # older reports lack params; a full study sweeps teachers up to the
    # board half-width, so the largest expert radius is the usual stand-in
    radii = [c["expert_radius"] for c in block["lighthouse_grid"]]
    if not radii:
        raise ReportError("cannot infer board half-width; pass it explicitly")
    return max(radii)


def grid_points(report: dict, task_id: str | None = None,
                half_width: int | None = None) -> dict:
    """Cells in draw order, padded to the full (i, j, method) product so
    combinations without runs are visible as such."""
    task = pick_task(report, task_id, need="lighthouse_grid")
    block = report["tasks"][task]
    n = _board_half_width(block, half_width)
    observed = {(c["view_radius"], c["expert_radius"], c["method"]): c
                for c in block["lighthouse_grid"]}
    i_values = sorted({k[0] for k in observed})
    j_values = sorted({k[1] for k in observed})
    methods = sorted({k[2] for k in observed})
    cells = []
    for i in i_values:
        for j in j_values:
            for m in methods:
                cell = observed.get((i, j, m))
                cells.append({"view_radius": i, "expert_radius": j,
                              "method": m,
                              "ep_lens": list(cell["ep_lens"]) if cell else [],
                              "ref": ref_length(n, i)})
    return {"task": task, "half_width": n, "cells": cells}


def dump_text(grid: dict) -> str:
    return json.dumps(grid, indent=2, sort_keys=True) + "\n"


def plot_lighthouse_grid(report: dict, out_path, task_id: str | None = None,
                         half_width: int | None = None):
    grid = grid_points(report, task_id, half_width)
    i_values = sorted({c["view_radius"] for c in grid["cells"]})
    fig, axes = plt.subplots(len(i_values), 1, sharex=True, squeeze=False,
                             figsize=(6.5, 1.2 + 1.5 * len(i_values)))
    for ax, i in zip(axes[:, 0], i_values):
        rows = [c for c in grid["cells"] if c["view_radius"] == i]
        labels = [f"j={c['expert_radius']} {c['method']}" for c in rows]
        filled = [c for c in rows if c["ep_lens"]]
        positions = [k for k, c in enumerate(rows) if c["ep_lens"]]
        if filled:
            ax.boxplot([c["ep_lens"] for c in filled], positions=positions,
                       orientation="horizontal", widths=0.6)
        for k, c in enumerate(rows):
            if not c["ep_lens"]:
                ax.text(0.5, k, "no runs", transform=ax.get_yaxis_transform(),
                        ha="center", va="center", fontsize=8, color="0.5")
        ax.axvline(rows[0]["ref"], color="tab:red", lw=1.2, ls="--",
                   label=f"radius-{i} optimum")
        ax.set_yticks(range(len(rows)))
        ax.set_yticklabels(labels, fontsize=8)
        ax.set_ylim(-0.7, len(rows) - 0.3)
        ax.invert_yaxis()
        ax.legend(fontsize=7, loc="lower right")
        ax.grid(axis="x", alpha=0.3)
    axes[-1, 0].set_xlabel("evaluation episode length")
    axes[0, 0].set_title(f"{grid['task']} (half-width {grid['half_width']})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return fig

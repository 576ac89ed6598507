"""Expected-best-of-k curves: one line plus band per method.

Reading: with a budget of k sampled hyperparameter configurations, the y
value is the expected best validation reward among them, so methods whose
curve rises quickly are cheap to tune. The numbers are taken verbatim from
the report; nothing is recomputed here.
"""

from __future__ import annotations

import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .report import ReportError, pick_task

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def curve_points(report: dict, task_id: str | None = None) -> list[dict]:
    """The exact per-method numbers the plot draws, in draw order."""
    task = pick_task(report, task_id)
    methods = report["tasks"][task]["methods"]
    points = []
    for method_id in sorted(methods):
        curve = methods[method_id].get("expected_max")
        if curve is None:
            continue
        points.append({"task": task, "method": method_id,
                       "n_runs": methods[method_id].get("n_runs"),
                       "k": list(curve["k"]), "mean": list(curve["mean"]),
                       "lo": list(curve["lo"]), "hi": list(curve["hi"])})
    if not points:
        raise ReportError(f"task {task!r} has no method curves to plot")
    return points


def dump_text(points) -> str:
    """Byte-stable text form of the plotted numbers."""
    return json.dumps(points, indent=2, sort_keys=True) + "\n"


def plot_expected_max(report: dict, out_path, task_id: str | None = None):
    points = curve_points(report, task_id)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, pt in enumerate(points):
        color = _COLORS[i % len(_COLORS)]
        ax.plot(pt["k"], pt["mean"], color=color, lw=1.8,
                label=f"{pt['method']} ({pt['n_runs']} runs)")
        ax.fill_between(pt["k"], pt["lo"], pt["hi"], color=color, alpha=0.2,
                        lw=0)
    ax.set_xlabel("hyperparameter budget (training runs)")
    ax.set_ylabel("expected best validation reward")
    ax.set_title(points[0]["task"])
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return fig

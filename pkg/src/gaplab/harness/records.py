"""Run records: one JSON-lines file per training run.

Layout: a header line (schema version, task, method, seed, budget), one line
per validation point, and a final line (failure flag, checkpoint path,
wall clock). Records round-trip exactly through save/load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

SCHEMA_VERSION = 1


@dataclass
class RunRecord:
    task: dict
    method: dict
    seed: int
    budget_steps: int
    expert_radius: int | None = None
    rows: list = field(default_factory=list)
    failed: bool = False
    checkpoint: str | None = None
    wall_clock_s: float | None = None

    def add_validation(self, step: int, metrics: dict) -> None:
        self.rows.append({"step": int(step),
                          "reward": float(metrics["reward"]),
                          "success": float(metrics["success"]),
                          "ep_len": float(metrics["ep_len"])})

    def best_reward(self) -> float | None:
        if not self.rows:
            return None
        return max(r["reward"] for r in self.rows)

    def final_row(self) -> dict | None:
        return self.rows[-1] if self.rows else None


class RecordFormatError(Exception):
    pass


def save_run_record(path, record: RunRecord) -> None:
    lines = [{"kind": "header", "schema_version": SCHEMA_VERSION,
              "task": record.task, "method": record.method,
              "seed": record.seed, "budget_steps": record.budget_steps,
              "expert_radius": record.expert_radius}]
    for row in record.rows:
        lines.append({"kind": "val", **row})
    lines.append({"kind": "final", "failed": record.failed,
                  "checkpoint": record.checkpoint,
                  "wall_clock_s": record.wall_clock_s})
    with open(path, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(json.dumps(line, sort_keys=True) + "\n")


def load_run_record(path) -> RunRecord:
    with open(path, "r", encoding="utf-8") as f:
        lines = [json.loads(s) for s in f if s.strip()]
    if not lines or lines[0].get("kind") != "header":
        raise RecordFormatError(f"{path}: missing header line")
    head = lines[0]
    if head.get("schema_version") != SCHEMA_VERSION:
        raise RecordFormatError(f"{path}: unsupported schema "
                                f"{head.get('schema_version')}")
    record = RunRecord(task=head["task"], method=head["method"],
                       seed=head["seed"], budget_steps=head["budget_steps"],
                       expert_radius=head.get("expert_radius"))
    for line in lines[1:]:
        kind = line.get("kind")
        if kind == "val":
            record.rows.append({k: line[k] for k in
                                ("step", "reward", "success", "ep_len")})
        elif kind == "final":
            record.failed = line["failed"]
            record.checkpoint = line["checkpoint"]
            record.wall_clock_s = line["wall_clock_s"]
        else:
            raise RecordFormatError(f"{path}: unknown line kind {kind!r}")
    return record


def load_records_dir(path) -> list:
    """All .jsonl run records under a directory (sorted for determinism)."""
    records = []
    for name in sorted(os.listdir(path)):
        if name.endswith(".jsonl"):
            records.append(load_run_record(os.path.join(path, name)))
    return records

"""Hyperparameter sweeps: n independent runs of one method on one task.

Each run draws its own hyperparameter sample and run seed from the sweep
seed, so a sweep is reproducible as a whole and each run is reproducible
alone. Runs are independent (own envs, params, record file); they execute
serially here, and nothing in the artifact layout changes if a scheduler
farms them out instead.
"""

from __future__ import annotations

from ..learners import sample_method_config, resolve_method_id
from ..seeding import rng_for
from .training import run_training


def run_sweep(task, method_id: str, n_runs: int, budget_steps: int,
              sweep_seed: int, out_dir=None, expert_radius=None,
              eval_episodes=None, progress=None) -> list:
    method_id = resolve_method_id(method_id)
    records = []
    for i in range(n_runs):
        config = sample_method_config(method_id, rng_for(sweep_seed, "hp", i))
        run_seed = int(rng_for(sweep_seed, "run-seed", i).integers(0, 2 ** 31))
        kwargs = {}
        if eval_episodes is not None:
            kwargs["eval_episodes"] = eval_episodes
        record, _params = run_training(
            task, config, budget_steps, run_seed, out_dir=out_dir,
            expert_radius=expert_radius,
            run_name=f"{task.task_id}_{_safe(method_id)}_h{i:03d}", **kwargs)
        records.append(record)
        if progress is not None:
            progress(i, record)
    return records


def _safe(method_id: str) -> str:
    return (method_id.replace("->", "2").replace("+", "_")
            .replace(" ", "").lower())

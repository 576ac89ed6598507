"""Task catalog: named benchmark tasks and the env factory.

The catalog file pins default shapes for the ten benchmark tasks; callers can
override individual fields (e.g. shrink a crossing grid for quick studies)
without editing the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .crossing import Crossing
from .lighthouse import Lighthouse1D, Lighthouse2D
from .poisoned_doors import PoisonedDoors

_catalog_cache = None


def load_catalog() -> dict:
    global _catalog_cache
    if _catalog_cache is None:
        text = resources.files("gaplab.envs").joinpath("tasks.json").read_text()
        doc = json.loads(text)
        if doc.get("schema_version") != 1:
            raise ValueError("unsupported task catalog version")
        _catalog_cache = doc["tasks"]
    return _catalog_cache


def task_ids() -> list:
    return sorted(load_catalog())


@dataclass(frozen=True)
class TaskConfig:
    """A resolved task: id plus the env constructor parameters."""
    task_id: str
    family: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "family": self.family, "params": dict(self.params)}

    @staticmethod
    def from_dict(d: dict) -> "TaskConfig":
        return TaskConfig(d["task_id"], d["family"], dict(d["params"]))


def resolve_task(task_id: str, overrides: dict | None = None) -> TaskConfig:
    catalog = load_catalog()
    if task_id not in catalog:
        raise KeyError(f"unknown task {task_id!r}; known: {', '.join(task_ids())}")
    entry = dict(catalog[task_id])
    family = entry.pop("family")
    if overrides:
        for k, v in overrides.items():
            if v is not None:
                entry[k] = v
    return TaskConfig(task_id=task_id, family=family, params=entry)


def make_env(config: TaskConfig, env_seed: int = 0):
    p = config.params
    if config.family == "pd":
        return PoisonedDoors(n_doors=p.get("n_doors", 4), code_len=p.get("code_len", 10),
                             env_seed=env_seed)
    if config.family == "lh2d":
        return Lighthouse2D(n=p.get("half_width", 15), view_radius=p.get("view_radius", 1),
                            max_episode_steps=p.get("max_episode_steps", 1000))
    if config.family == "lh1d":
        return Lighthouse1D(n=p.get("half_width", 4), view_radius=p.get("view_radius", 1),
                            max_episode_steps=p.get("max_episode_steps"))
    if config.family == "crossing":
        return Crossing(size=p.get("size", 25), obstacles=p.get("obstacles", 10),
                        kind=p.get("kind", "wall"), variant=p.get("variant", "base"),
                        corrupt_distance=p.get("corrupt_distance"))
    raise ValueError(f"unknown family {config.family!r}")

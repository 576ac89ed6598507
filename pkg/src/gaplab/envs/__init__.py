"""Environments: poisoned doors, lighthouse search, river crossings."""

from .base import GenerationError, IllegalAction, Observation, obs_hash
from .catalog import TaskConfig, load_catalog, make_env, resolve_task, task_ids
from .crossing import Crossing, apply_darkness
from .lighthouse import OBS_VOCAB_2D, Lighthouse1D, Lighthouse2D
from .poisoned_doors import PoisonedDoors
from .trace import check_trace_fixture, golden_trace, save_trace_fixture

__all__ = [
    "GenerationError", "IllegalAction", "Observation", "obs_hash",
    "TaskConfig", "load_catalog", "make_env", "resolve_task", "task_ids",
    "Crossing", "apply_darkness", "OBS_VOCAB_2D", "Lighthouse1D", "Lighthouse2D",
    "PoisonedDoors", "check_trace_fixture", "golden_trace", "save_trace_fixture",
]

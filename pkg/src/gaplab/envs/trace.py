"""Golden traces: replay a fixed action sequence and fingerprint what happened.

A trace row records the hash of the observation presented to the agent, then
the reward and done flag produced by the action. Committed fixtures guard the
env dynamics against silent drift.
"""

from __future__ import annotations

import json

import numpy as np

from .base import obs_hash
from .catalog import TaskConfig, make_env


def golden_trace(env, episode_seed: int, actions) -> list:
    state = env.reset(np.random.default_rng(episode_seed))
    rows = []
    for action in actions:
        before = obs_hash(env.observe(state))
        state, reward, done = env.step(state, int(action))
        rows.append({"obs_sha": before, "reward": round(float(reward), 12), "done": bool(done)})
        if done:
            break
    return rows


def save_trace_fixture(path, config: TaskConfig, env_seed: int, episode_seed: int, actions) -> None:
    env = make_env(config, env_seed=env_seed)
    doc = {
        "schema_version": 1,
        "task": config.to_dict(),
        "env_seed": env_seed,
        "episode_seed": episode_seed,
        "actions": [int(a) for a in actions],
        "steps": golden_trace(env, episode_seed, actions),
    }
    with open(path, "w") as f:
        json.dump(doc, f, indent=1, sort_keys=True)


def check_trace_fixture(path) -> None:
    """Raises AssertionError when the env no longer reproduces the fixture."""
    with open(path) as f:
        doc = json.load(f)
    if doc.get("schema_version") != 1:
        raise ValueError("unsupported trace fixture version")
    config = TaskConfig.from_dict(doc["task"])
    env = make_env(config, env_seed=doc["env_seed"])
    fresh = golden_trace(env, doc["episode_seed"], doc["actions"])
    assert fresh == doc["steps"], f"golden trace drifted for {config.task_id}"

"""Expert demonstration recording and the on-disk demo format.

Demonstrations are rolled out under full teacher forcing: the executed action
is always the expert's sampled action. Observations are stored exactly as the
student would see them live (filtration and darkness included).

File layout: magic, version, length-prefixed JSON header (task, expert kind,
seed, episode count, observation dtype/shape), then per episode a u32 step
count followed by the packed observation, expert-action, executed-action and
reward arrays. Fixed seed in, identical bytes out.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for

MAGIC = b"GDEM"
FORMAT_VERSION = 1

_OBS_DTYPES = {"cat": "<u1", "index": "<u2", "grid": "<u1"}


class DemoFormatError(Exception):
    pass


@dataclass
class EpisodeDemo:
    obs: np.ndarray            # (T, ...) observations as presented to the agent
    expert_actions: np.ndarray  # (T,) sampled expert actions
    actions: np.ndarray        # (T,) executed actions (equal under full forcing)
    rewards: np.ndarray        # (T,)


@dataclass
class Demonstrations:
    header: dict
    episodes: list

    @property
    def n_transitions(self) -> int:
        return sum(len(e.actions) for e in self.episodes)


def record_demonstrations(env, expert, n_episodes: int, seed: int,
                          task_dict: dict | None = None) -> Demonstrations:
    kind, shape = env.obs_spec
    if kind not in _OBS_DTYPES:
        raise ValueError(f"cannot serialize observations of kind {kind!r}")
    dtype = _OBS_DTYPES[kind]
    episodes = []
    for e in range(n_episodes):
        rng = rng_for(seed, "demo", e)
        state = env.reset(rng)
        obs_l, exp_l, rew_l = [], [], []
        done = False
        while not done:
            obs_l.append(env.observe(state))
            probs = expert.query(state)
            action = int(rng.choice(len(probs), p=probs))
            state, reward, done = env.step(state, action)
            exp_l.append(action)
            rew_l.append(reward)
        obs = np.asarray(obs_l, dtype=dtype)
        acts = np.asarray(exp_l, dtype="<u1")
        episodes.append(EpisodeDemo(obs=obs, expert_actions=acts, actions=acts.copy(),
                                    rewards=np.asarray(rew_l, dtype="<f8")))
    header = {
        "schema_version": FORMAT_VERSION,
        "task": task_dict or {"family": env.family},
        "expert": type(expert).__name__,
        "seed": int(seed),
        "episodes": int(n_episodes),
        "obs_kind": kind,
        "obs_dtype": dtype,
        "obs_shape": list(shape) if isinstance(shape, tuple) else [],
        "action_count": env.action_count,
    }
    return Demonstrations(header=header, episodes=episodes)


def save_demos(path, demos: Demonstrations) -> None:
    header = json.dumps(demos.header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", FORMAT_VERSION))
        f.write(struct.pack("<Q", len(header)))
        f.write(header)
        for ep in demos.episodes:
            f.write(struct.pack("<I", len(ep.actions)))
            f.write(np.ascontiguousarray(ep.obs).tobytes())
            f.write(np.ascontiguousarray(ep.expert_actions).tobytes())
            f.write(np.ascontiguousarray(ep.actions).tobytes())
            f.write(np.ascontiguousarray(ep.rewards).tobytes())


def load_demos(path) -> Demonstrations:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise DemoFormatError("not a demonstration file")
        (version,) = struct.unpack("<I", f.read(4))
        if version != FORMAT_VERSION:
            raise DemoFormatError(f"unsupported demo format version {version}")
        (hlen,) = struct.unpack("<Q", f.read(8))
        header = json.loads(f.read(hlen).decode("utf-8"))
        obs_shape = tuple(header["obs_shape"])
        obs_dtype = np.dtype(header["obs_dtype"])
        episodes = []
        for _ in range(header["episodes"]):
            (t_len,) = struct.unpack("<I", f.read(4))
            per = int(np.prod(obs_shape, dtype=np.int64)) if obs_shape else 1
            obs = np.frombuffer(f.read(t_len * per * obs_dtype.itemsize), dtype=obs_dtype)
            obs = obs.reshape((t_len,) + obs_shape).copy()
            exp = np.frombuffer(f.read(t_len), dtype="<u1").copy()
            act = np.frombuffer(f.read(t_len), dtype="<u1").copy()
            rew = np.frombuffer(f.read(t_len * 8), dtype="<f8").copy()
            episodes.append(EpisodeDemo(obs=obs, expert_actions=exp, actions=act, rewards=rew))
    return Demonstrations(header=header, episodes=episodes)

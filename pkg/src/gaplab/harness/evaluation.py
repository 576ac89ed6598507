"""Greedy policy evaluation on held-out episode seeds.

Validation episodes are generated from seeds at VAL_GEN_BASE and above;
training collection draws its generation seeds from [0, VAL_GEN_BASE), so
the two pools of procedurally generated episodes are disjoint by
construction. Episodes run batched across lanes with argmax action
selection, so evaluation consumes no randomness at all.
"""

from __future__ import annotations

import numpy as np

from ..rollout import TRAIN_GEN_SPAN

VAL_GEN_BASE = TRAIN_GEN_SPAN


def evaluate_policy(policy, params, env_factory, n_episodes: int,
                    n_lanes: int = 20, seed_base: int = VAL_GEN_BASE) -> dict:
    if n_episodes <= 0:
        raise ValueError("n_episodes must be positive")
    if seed_base < TRAIN_GEN_SPAN:
        raise ValueError("evaluation seeds must not overlap the training range")
    n_lanes = min(n_lanes, n_episodes)
    envs = [env_factory() for _ in range(n_lanes)]
    obs_kind = envs[0].obs_spec[0]
    rewards = np.zeros(n_episodes)
    lengths = np.zeros(n_episodes, dtype=np.int64)
    successes = np.zeros(n_episodes)

    if obs_kind in ("cat", "index"):
        filler_obs = np.int64(0)
    else:
        filler_obs = np.zeros(tuple(envs[0].obs_spec[1]), dtype=np.int64)
    probe_state = envs[0].reset(np.random.default_rng(seed_base))
    has_mask = envs[0].legal_mask(probe_state) is not None

    n_waves = -(-n_episodes // n_lanes)
    for wave in range(n_waves):
        ep_ids = [wave * n_lanes + k for k in range(n_lanes)]
        alive = np.array([e < n_episodes for e in ep_ids])
        states = [envs[k].reset(np.random.default_rng(seed_base + ep_ids[k]))
                  if alive[k] else None for k in range(n_lanes)]
        rec = policy.initial_state(n_lanes)
        while alive.any():
            obs_list = [envs[k].observe(states[k]) if alive[k] else filler_obs
                        for k in range(n_lanes)]
            if obs_kind in ("cat", "index"):
                obs = np.array(obs_list, dtype=np.int64)
            else:
                obs = np.stack(obs_list).astype(np.int64)
            if has_mask:
                mask = np.stack([envs[k].legal_mask(states[k]) if alive[k]
                                 else np.ones(envs[k].action_count)
                                 for k in range(n_lanes)])
            else:
                mask = None
            probs, _, rec = policy.step_np(params, obs, rec, mask)
            acts = np.argmax(probs, axis=1)
            for k in range(n_lanes):
                if not alive[k]:
                    continue
                state, r, done = envs[k].step(states[k], int(acts[k]))
                states[k] = state
                e = ep_ids[k]
                rewards[e] += r
                lengths[e] += 1
                if done:
                    successes[e] = float(state.succeeded)
                    alive[k] = False
    return {"reward": float(rewards.mean()),
            "success": float(successes.mean()),
            "ep_len": float(lengths.mean()),
            "n_episodes": int(n_episodes)}

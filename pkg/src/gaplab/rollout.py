"""Synchronized multi-lane rollout collection.

Training interacts with L independent copies of the environment ("lanes")
advanced in lockstep, T steps per collection. Recurrent state is carried
across collections and zeroed whenever a lane starts a new episode; the
`begin` mask records those resets so update-time sequence replays reproduce
the same hidden-state structure from stored lane snapshots.

Per-lane RNG streams (rng_for(run_seed, "lane", k)) drive episode generation
seeds, expert action sampling, teacher-forcing coins, and policy action
sampling, in that fixed draw order, so a collection is reproducible given
the run seed regardless of wall-clock interleaving.

Episode generation seeds for training are drawn from [0, TRAIN_GEN_SPAN);
evaluation uses seeds at or above TRAIN_GEN_SPAN so the two pools of
procedurally generated layouts never overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .seeding import rng_for

TRAIN_GEN_SPAN = 10 ** 6


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; one uniform consumed."""
    c = np.cumsum(probs)
    u = rng.random() * c[-1]
    return int(min(np.searchsorted(c, u, side="right"), len(probs) - 1))


@dataclass
class Segment:
    obs: np.ndarray                 # (T, L, ...) per-family layout
    actions: np.ndarray             # (T, L) int64, executed actions
    behavior_logp: np.ndarray       # (T, L) log prob under the collecting policy
    rewards: np.ndarray             # (T, L)
    dones: np.ndarray               # (T, L) 1.0 where the episode ended
    begin: np.ndarray               # (T, L) 1.0 where the state was a fresh reset
    values: np.ndarray              # (T, L) critic output at each state
    bootstrap: np.ndarray           # (L,) critic output at the post-segment state
    legal_mask: np.ndarray | None   # (T, L, A) or None
    expert_onehot: np.ndarray | None  # (T, L, A) sampled expert action targets
    expert_probs: np.ndarray | None   # (T, L, A) full expert distributions
    h0: np.ndarray | None           # (L, H) recurrent snapshot at segment start
    c0: np.ndarray | None
    episode_stats: list = field(default_factory=list)
    adv: np.ndarray | None = None           # filled by the trainer after GAE
    value_targets: np.ndarray | None = None

    @property
    def n_steps(self) -> int:
        return self.obs.shape[0] * self.obs.shape[1]


class LaneRunner:
    """Owns the lane envs, experts, rng streams, and carried recurrent state."""

    def __init__(self, env_factory, policy, n_lanes: int, run_seed: int,
                 use_expert: bool = False, expert_radius: int | None = None,
                 lane_keys=None):
        from .experts import make_expert

        self.envs = [env_factory() for _ in range(n_lanes)]
        self.policy = policy
        self.n_lanes = n_lanes
        if lane_keys is None:
            lane_keys = range(n_lanes)
        self.lane_rngs = [rng_for(run_seed, "lane", k) for k in lane_keys]
        self.experts = ([make_expert(e, expert_radius) for e in self.envs]
                        if use_expert else None)
        self.rec = policy.initial_state(n_lanes)
        self.states = [env.reset(self._gen_rng(k))
                       for k, env in enumerate(self.envs)]
        self.fresh = np.ones(n_lanes, dtype=bool)
        self._ep_return = np.zeros(n_lanes)
        self._ep_len = np.zeros(n_lanes, dtype=np.int64)
        env = self.envs[0]
        self.obs_kind, self.obs_shape = env.obs_spec
        self.action_count = env.action_count
        self.has_mask = env.legal_mask(self.states[0]) is not None

    def _gen_rng(self, lane: int) -> np.random.Generator:
        seed = int(self.lane_rngs[lane].integers(0, TRAIN_GEN_SPAN))
        return np.random.default_rng(seed)

    def _alloc_obs(self, t_len: int) -> np.ndarray:
        if self.obs_kind in ("cat", "index"):
            return np.zeros((t_len, self.n_lanes), dtype=np.int64)
        return np.zeros((t_len, self.n_lanes) + tuple(self.obs_shape),
                        dtype=np.int64)

    def observe_batch(self) -> np.ndarray:
        if self.obs_kind in ("cat", "index"):
            return np.array([env.observe(s) for env, s in
                             zip(self.envs, self.states)], dtype=np.int64)
        return np.stack([env.observe(s) for env, s in
                         zip(self.envs, self.states)]).astype(np.int64)

    def mask_batch(self) -> np.ndarray | None:
        if not self.has_mask:
            return None
        return np.stack([env.legal_mask(s) for env, s in
                         zip(self.envs, self.states)])

    def _zero_rec_lane(self, lane: int) -> None:
        if self.rec is not None:
            self.rec[0][lane, :] = 0.0
            self.rec[1][lane, :] = 0.0

    def collect(self, params, t_len: int, tf_prob: float = 0.0,
                greedy: bool = False) -> Segment:
        L, A = self.n_lanes, self.action_count
        obs_buf = self._alloc_obs(t_len)
        actions = np.zeros((t_len, L), dtype=np.int64)
        logp = np.zeros((t_len, L))
        rewards = np.zeros((t_len, L))
        dones = np.zeros((t_len, L))
        begin = np.zeros((t_len, L))
        values = np.zeros((t_len, L))
        masks = np.zeros((t_len, L, A)) if self.has_mask else None
        want_expert = self.experts is not None
        if tf_prob > 0.0 and not want_expert:
            raise ValueError("teacher forcing requires an expert")
        exp_onehot = np.zeros((t_len, L, A)) if want_expert else None
        exp_probs = np.zeros((t_len, L, A)) if want_expert else None
        h0 = c0 = None
        if self.rec is not None:
            h0, c0 = self.rec[0].copy(), self.rec[1].copy()
        stats = []

        for t in range(t_len):
            obs_t = self.observe_batch()
            obs_buf[t] = obs_t
            mask_t = self.mask_batch()
            if masks is not None:
                masks[t] = mask_t
            begin[t] = self.fresh
            self.fresh[:] = False
            probs, vals, self.rec = self.policy.step_np(params, obs_t, self.rec, mask_t)
            values[t] = vals
            for k in range(L):
                rng = self.lane_rngs[k]
                if want_expert:
                    dist = self.experts[k].query(self.states[k])
                    exp_probs[t, k] = dist
                    a_exp = sample_index(dist, rng)
                    exp_onehot[t, k, a_exp] = 1.0
                forced = tf_prob > 0.0 and rng.random() < tf_prob
                if forced:
                    a = a_exp
                elif greedy:
                    a = int(np.argmax(probs[k]))
                else:
                    a = sample_index(probs[k], rng)
                actions[t, k] = a
                logp[t, k] = np.log(max(probs[k, a], 1e-300))
                state, r, done = self.envs[k].step(self.states[k], a)
                self.states[k] = state
                rewards[t, k] = r
                self._ep_return[k] += r
                self._ep_len[k] += 1
                if done:
                    dones[t, k] = 1.0
                    stats.append({"reward": float(self._ep_return[k]),
                                  "length": int(self._ep_len[k]),
                                  "success": bool(state.succeeded)})
                    self._ep_return[k] = 0.0
                    self._ep_len[k] = 0
                    self.states[k] = self.envs[k].reset(self._gen_rng(k))
                    self.fresh[k] = True
                    self._zero_rec_lane(k)

        obs_T = self.observe_batch()
        _, bootstrap, _ = self.policy.step_np(params, obs_T, self.rec,
                                              self.mask_batch())
        return Segment(obs=obs_buf, actions=actions, behavior_logp=logp,
                       rewards=rewards, dones=dones, begin=begin, values=values,
                       bootstrap=bootstrap, legal_mask=masks,
                       expert_onehot=exp_onehot, expert_probs=exp_probs,
                       h0=h0, c0=c0, episode_stats=stats)


def lane_batch(seg: Segment, lanes: np.ndarray) -> dict:
    """Extract an update minibatch: the given lanes, all T steps, flattened
    t-major for the loss terms (matching forward_seq output layout)."""
    lanes = np.asarray(lanes)
    out = {
        "obs": seg.obs[:, lanes],
        "begin": seg.begin[:, lanes],
        "h0": None if seg.h0 is None else seg.h0[lanes],
        "c0": None if seg.c0 is None else seg.c0[lanes],
        "mask": None if seg.legal_mask is None else seg.legal_mask[:, lanes],
        "actions": seg.actions[:, lanes].reshape(-1),
        "old_logp": seg.behavior_logp[:, lanes].reshape(-1),
    }
    if seg.adv is not None:
        out["adv"] = seg.adv[:, lanes].reshape(-1)
        out["value_targets"] = seg.value_targets[:, lanes].reshape(-1)
    if seg.expert_onehot is not None:
        a = seg.expert_onehot.shape[-1]
        out["expert_onehot"] = seg.expert_onehot[:, lanes].reshape(-1, a)
        out["expert_probs"] = seg.expert_probs[:, lanes].reshape(-1, a)
    return out


class DemoStream:
    """Flattened demonstration transitions with window sampling.

    Windows start at uniform offsets into the concatenated stream; the first
    row of every window is marked as an episode begin so replays run from a
    zero hidden state.
    """

    def __init__(self, demos, env):
        self.action_count = env.action_count
        self.family = env.family
        obs_parts, act_parts, begin_parts = [], [], []
        for ep in demos.episodes:
            obs_parts.append(np.asarray(ep.obs, dtype=np.int64))
            act_parts.append(np.asarray(ep.expert_actions, dtype=np.int64))
            b = np.zeros(len(ep.expert_actions))
            b[0] = 1.0
            begin_parts.append(b)
        self.obs = np.concatenate(obs_parts, axis=0)
        self.expert_actions = np.concatenate(act_parts)
        self.begin = np.concatenate(begin_parts)
        self.n = len(self.expert_actions)
        if self.family == "pd":
            n_doors = env.n_doors
            masks = np.zeros((self.n, self.action_count))
            door_phase = self.obs == 0
            masks[door_phase, :n_doors] = 1.0
            masks[~door_phase, n_doors:] = 1.0
            self.masks = masks
        else:
            self.masks = None

    def transitions(self, rng: np.random.Generator, batch_size: int) -> dict:
        """Uniform-with-replacement transition sample (non-recurrent models)."""
        if self.n == 0:
            raise ValueError("demo stream is empty")
        idx = rng.integers(0, self.n, size=batch_size)
        onehot = np.zeros((batch_size, self.action_count))
        onehot[np.arange(batch_size), self.expert_actions[idx]] = 1.0
        mask = self.masks[idx] if self.masks is not None else None
        return {"obs": self.obs[idx], "begin": np.ones(batch_size),
                "mask": mask, "expert_onehot": onehot,
                "n_samples": batch_size}

    def windows(self, rng: np.random.Generator, n_lanes: int,
                t_len: int) -> dict:
        if self.n < t_len:
            raise ValueError(f"demo stream has {self.n} transitions, "
                             f"need at least {t_len}")
        starts = rng.integers(0, self.n - t_len + 1, size=n_lanes)
        sl = [slice(s, s + t_len) for s in starts]
        obs = np.stack([self.obs[s] for s in sl], axis=1)
        acts = np.stack([self.expert_actions[s] for s in sl], axis=1)
        begin = np.stack([self.begin[s].copy() for s in sl], axis=1)
        begin[0, :] = 1.0
        onehot = np.zeros((t_len, n_lanes, self.action_count))
        tt = np.arange(t_len)[:, None]
        ll = np.arange(n_lanes)[None, :]
        onehot[tt, ll, acts] = 1.0
        mask = (np.stack([self.masks[s] for s in sl], axis=1)
                if self.masks is not None else None)
        return {"obs": obs, "begin": begin, "mask": mask,
                "expert_onehot": onehot.reshape(-1, self.action_count),
                "n_samples": t_len * n_lanes}

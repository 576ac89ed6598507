"""One training run: stage schedule, updates, periodic validation, record.

The update cycle (fixed across methods so step budgets are comparable):
collect 20 lanes x 100 steps = 2000 transitions, then 4 epochs x 2 lane-split
minibatches of 1000. Demo-only stages skip collection but advance the step
counter by the same 2000 per update, so "training steps" means the same
x-axis everywhere. Demo+RL stages alternate gradient steps: a PPO step on an
on-policy minibatch, then an imitation step on a freshly sampled
demonstration window.

A NaN/Inf loss marks the run failed; whatever validation points exist are
kept (a failed hyperparameter draw is a legitimate sweep outcome).
"""

from __future__ import annotations

import os
import time

import numpy as np

from .. import diffcore as dc
from ..diffcore import Adam, clip_global_norm, NonFiniteLoss, save_checkpoint, load_checkpoint
from ..envs import make_env, TaskConfig
from ..experts import make_expert, record_demonstrations
from ..learners import (make_policy, MethodConfig, plan_stage, clip_eps_at,
                        gae_advantages, normalize_advantages, bc_loss,
                        ppo_loss, advisor_loss, advisor_weight, static_mix_loss)
from ..learners.methods import RL_STAGES
from ..rollout import LaneRunner, DemoStream, lane_batch
from ..seeding import rng_for
from .evaluation import evaluate_policy
from .records import RunRecord, save_run_record

N_LANES = 20
SEGMENT_LEN = 100
UPDATE_EPOCHS = 4
N_MINIBATCHES = 2
GRAD_CLIP = 0.5
VALUE_COEF = 0.5
GAMMA = 0.99
GAE_LAMBDA = 1.0
CLIP_EPS0 = 0.1
EVAL_EVERY_FRAC = 0.05
EVAL_EPISODES = 200
DEMO_EPISODES = 256


def _loss_for_stage(kind, policy, params, seg, lanes, demo_stream, mb_rng,
                    method: MethodConfig, clip_eps: float):
    """Build the gradient-step losses for one minibatch slot.

    Returns a list of scalar loss tensors; each is backpropagated and
    stepped separately (demo+RL stages alternate two steps per slot)."""
    losses = []
    if kind != "il_demo":
        mb = lane_batch(seg, lanes)
        net = policy.forward_seq(params, mb["obs"], mb["begin"], mb["h0"],
                                 mb["c0"], mb["mask"])
    if kind == "il":
        losses.append(bc_loss(net, mb["expert_onehot"])["loss"])
    elif kind == "ppo":
        losses.append(ppo_loss(net, mb["actions"], mb["old_logp"], mb["adv"],
                               mb["value_targets"], clip_eps, VALUE_COEF)["loss"])
    elif kind == "static":
        losses.append(static_mix_loss(net, mb["expert_onehot"], mb["actions"],
                                      mb["old_logp"], mb["adv"],
                                      mb["value_targets"], clip_eps,
                                      method.static_mix, VALUE_COEF)["loss"])
    elif kind == "advisor":
        losses.append(advisor_loss(net, mb["expert_onehot"], mb["expert_probs"],
                                   mb["actions"], mb["old_logp"], mb["adv"],
                                   mb["value_targets"], clip_eps,
                                   method.alpha, method.beta, VALUE_COEF)["loss"])
    elif kind in ("ppo_il_demo", "advisor_demo"):
        losses.append(ppo_loss(net, mb["actions"], mb["old_logp"], mb["adv"],
                               mb["value_targets"], clip_eps, VALUE_COEF)["loss"])
        if policy.recurrent:
            win = demo_stream.windows(mb_rng, len(lanes), seg.obs.shape[0])
            dnet = policy.forward_seq(params, win["obs"], win["begin"],
                                      np.zeros_like(seg.h0[lanes]),
                                      np.zeros_like(seg.c0[lanes]), win["mask"])
        else:
            win = demo_stream.transitions(mb_rng, len(lanes) * seg.obs.shape[0])
            dnet = policy.forward_seq(params, win["obs"], win["begin"],
                                      None, None, win["mask"])
        if kind == "ppo_il_demo":
            losses.append(bc_loss(dnet, win["expert_onehot"])["loss"])
        else:
            oh = win["expert_onehot"]
            w = advisor_weight(oh, dnet["aux_probs"].data, method.alpha, method.beta)
            ce = dc.neg(dc.sum_(dc.mul(dc.log_floor(dnet["probs"]), oh), axis=1))
            aux = dc.mean_(dc.neg(dc.sum_(dc.mul(dc.log_floor(dnet["aux_probs"]), oh),
                                          axis=1)))
            il = dc.scale(dc.dot(ce, w), 1.0 / oh.shape[0])
            losses.append(dc.add(il, aux))
    elif kind == "il_demo":
        n_win = N_LANES // N_MINIBATCHES
        if policy.recurrent:
            win = demo_stream.windows(mb_rng, n_win, SEGMENT_LEN)
            h0 = policy.initial_state(n_win)
            dnet = policy.forward_seq(params, win["obs"], win["begin"],
                                      h0[0], h0[1], win["mask"])
        else:
            win = demo_stream.transitions(mb_rng, n_win * SEGMENT_LEN)
            dnet = policy.forward_seq(params, win["obs"], win["begin"],
                                      None, None, win["mask"])
        losses.append(bc_loss(dnet, win["expert_onehot"])["loss"])
    else:
        raise ValueError(f"unknown stage kind {kind!r}")
    return losses


def run_training(task: TaskConfig, method: MethodConfig, budget_steps: int,
                 seed: int, out_dir=None, *, expert_radius: int | None = None,
                 eval_episodes: int = EVAL_EPISODES,
                 eval_every_frac: float = EVAL_EVERY_FRAC,
                 demo_episodes: int = DEMO_EPISODES,
                 run_name: str | None = None):
    """Train one (task, method, hp, seed) cell and return (record, params)."""
    t_start = time.time()
    spec = method.spec
    env_factory = lambda: make_env(task, env_seed=seed)
    probe = env_factory()
    policy = make_policy(probe)
    params = policy.init_params(rng_for(seed, "init"))
    opt = Adam(params, lr=method.lr)

    needs_env = any(s.kind != "il_demo" for s in spec.stages)
    runner = None
    if needs_env:
        runner = LaneRunner(env_factory, policy, N_LANES, seed,
                            use_expert=spec.uses_expert,
                            expert_radius=expert_radius)
    demo_stream = None
    if spec.uses_demos:
        demo_env = env_factory()
        demo_seed = int(rng_for(seed, "demo-seed").integers(0, 2 ** 31))
        demos = record_demonstrations(demo_env, make_expert(demo_env, expert_radius),
                                      demo_episodes, demo_seed,
                                      task_dict=task.to_dict())
        demo_stream = DemoStream(demos, demo_env)

    record = RunRecord(task=task.to_dict(), method=method.to_dict(), seed=seed,
                       budget_steps=budget_steps, expert_radius=expert_radius)

    def validate(step):
        metrics = evaluate_policy(policy, params, env_factory, eval_episodes)
        record.add_validation(step, metrics)

    steps_per_update = N_LANES * SEGMENT_LEN
    n_updates = -(-budget_steps // steps_per_update)
    eval_interval = max(1, round(eval_every_frac * n_updates))
    validate(0)

    for u in range(n_updates):
        t0 = u * steps_per_update
        plan = plan_stage(method, t0, budget_steps)
        clip_eps = clip_eps_at(t0, budget_steps, CLIP_EPS0)
        try:
            seg = None
            if plan.kind != "il_demo":
                seg = runner.collect(params, SEGMENT_LEN, tf_prob=plan.tf_prob)
                if plan.kind in RL_STAGES:
                    adv, targets = gae_advantages(seg.rewards, seg.values,
                                                  seg.dones, seg.bootstrap,
                                                  GAMMA, GAE_LAMBDA)
                    seg.adv = normalize_advantages(adv)
                    seg.value_targets = targets
            mb_rng = rng_for(seed, "mb", u)
            lanes_per_mb = N_LANES // N_MINIBATCHES
            for _epoch in range(UPDATE_EPOCHS):
                perm = mb_rng.permutation(N_LANES)
                for m in range(N_MINIBATCHES):
                    lanes = np.sort(perm[m * lanes_per_mb:(m + 1) * lanes_per_mb])
                    losses = _loss_for_stage(plan.kind, policy, params, seg,
                                             lanes, demo_stream, mb_rng,
                                             method, clip_eps)
                    for loss in losses:
                        if not np.isfinite(loss.data):
                            raise NonFiniteLoss("loss is not finite")
                        params.zero_grads()
                        loss.backward()
                        clip_global_norm(params, GRAD_CLIP)
                        opt.step(params)
        except NonFiniteLoss:
            record.failed = True
            break
        step_now = (u + 1) * steps_per_update
        if (u + 1) % eval_interval == 0 or u == n_updates - 1:
            validate(step_now)

    record.wall_clock_s = time.time() - t_start
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        name = run_name or f"{task.task_id}_{_slug(method.method_id)}_s{seed}"
        ckpt_path = os.path.join(out_dir, name + ".ckpt")
        save_checkpoint(ckpt_path, params.copy_data(),
                        step_count=min(n_updates * steps_per_update, budget_steps)
                        if not record.failed else 0,
                        metadata={"task": task.to_dict(),
                                  "method": method.to_dict(), "seed": seed,
                                  "expert_radius": expert_radius})
        record.checkpoint = os.path.abspath(ckpt_path)
        save_run_record(os.path.join(out_dir, name + ".jsonl"), record)
    return record, params


def _slug(method_id: str) -> str:
    return (method_id.replace("->", "2").replace("+", "_")
            .replace(" ", "").lower())


def load_policy_checkpoint(path):
    """Rebuild (policy, params, metadata) from a saved checkpoint."""
    arrays, _step, metadata = load_checkpoint(path)
    task = TaskConfig.from_dict(metadata["task"])
    env = make_env(task, env_seed=metadata.get("seed", 0))
    policy = make_policy(env)
    params = policy.init_params(rng_for(0, "ckpt-load"))
    params.load_data(arrays)
    return policy, params, metadata

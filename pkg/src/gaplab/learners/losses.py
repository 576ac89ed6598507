"""Loss builders shared by the training methods.

All builders take the dict returned by a policy's `forward_seq` (graph
tensors, flattened t-major to (T*B, ...)) plus plain numpy batch arrays, and
return a dict with a scalar "loss" tensor and float diagnostics.

Conventions:
  - imitation targets are one-hot rows (sampled expert actions);
  - the PPO ratio is recomputed from stored behavior log-probs;
  - advantages are normalized once per collected batch, before minibatching;
  - the adaptive imitation weight w(s) = exp(-alpha * KL(expert || aux)),
    zeroed where KL > beta, is computed from detached aux probabilities so
    no gradient flows through the weighting.
"""

from __future__ import annotations

import numpy as np

from .. import diffcore as dc
from ..diffcore.tensor import PROB_FLOOR


def gae_advantages(rewards: np.ndarray, values: np.ndarray, dones: np.ndarray,
                   bootstrap: np.ndarray, gamma: float = 0.99,
                   lam: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Generalized advantage estimates over a (T, L) segment.

    `bootstrap` is V(s_T) per lane, used only when the final transition is
    not terminal. Returns (advantages, value_targets), both (T, L).
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    dones = np.asarray(dones, dtype=np.float64)
    t_len, n_lanes = rewards.shape
    adv = np.zeros((t_len, n_lanes))
    carry = np.zeros(n_lanes)
    for t in range(t_len - 1, -1, -1):
        next_v = bootstrap if t == t_len - 1 else values[t + 1]
        nonterminal = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_v * nonterminal - values[t]
        carry = delta + gamma * lam * nonterminal * carry
        adv[t] = carry
    return adv, adv + values


def normalize_advantages(adv: np.ndarray, eps: float = 1e-5) -> np.ndarray:
    return (adv - adv.mean()) / (adv.std() + eps)


def _per_sample_ce(probs, target_onehot: np.ndarray):
    """Row-wise cross entropy -sum_a target * log p, as a (n,) tensor."""
    return dc.neg(dc.sum_(dc.mul(dc.log_floor(probs), target_onehot), axis=1))


def _clipped_objective(probs, actions, old_logp, adv, clip_eps):
    """Per-sample negated clipped surrogate, (n,) tensor."""
    pa = dc.gather_rows(probs, actions)
    inv_old = np.exp(-np.asarray(old_logp, dtype=np.float64))
    ratio = dc.mul(pa, inv_old)
    s1 = dc.mul(ratio, adv)
    s2 = dc.mul(dc.clip_const(ratio, 1.0 - clip_eps, 1.0 + clip_eps), adv)
    return dc.neg(dc.minimum(s1, s2))


def _value_term(values, value_targets: np.ndarray):
    return dc.mean_(dc.square(dc.sub(values, value_targets)))


def bc_loss(net: dict, expert_onehot: np.ndarray) -> dict:
    ce = dc.mean_(_per_sample_ce(net["probs"], expert_onehot))
    return {"loss": ce, "ce": float(ce.data)}


def ppo_loss(net: dict, actions: np.ndarray, old_logp: np.ndarray,
             adv: np.ndarray, value_targets: np.ndarray, clip_eps: float,
             value_coef: float = 0.5) -> dict:
    policy = dc.mean_(_clipped_objective(net["probs"], actions, old_logp, adv, clip_eps))
    value = _value_term(net["values"], value_targets)
    loss = dc.add(policy, dc.scale(value, value_coef))
    return {"loss": loss, "policy": float(policy.data), "value": float(value.data)}


def advisor_weight(expert_probs: np.ndarray, aux_probs: np.ndarray,
                   alpha: float, beta: float = np.inf) -> np.ndarray:
    """w(s) per row from KL(expert || aux); pure numpy, never differentiated."""
    p = np.maximum(np.asarray(expert_probs, dtype=np.float64), PROB_FLOOR)
    q = np.maximum(np.asarray(aux_probs, dtype=np.float64), PROB_FLOOR)
    raw_p = np.asarray(expert_probs, dtype=np.float64)
    kl = np.sum(np.where(raw_p > 0.0, raw_p * (np.log(p) - np.log(q)), 0.0), axis=-1)
    w = np.exp(-alpha * kl)
    return np.where(kl <= beta, w, 0.0)


def advisor_loss(net: dict, expert_onehot: np.ndarray, expert_probs: np.ndarray,
                 actions: np.ndarray, old_logp: np.ndarray, adv: np.ndarray,
                 value_targets: np.ndarray, clip_eps: float, alpha: float,
                 beta: float = np.inf, value_coef: float = 0.5,
                 fixed_w: np.ndarray | None = None) -> dict:
    """Per-sample blend w * CE + (1 - w) * clipped-surrogate, plus critic and
    auxiliary-actor terms. The aux actor trains on pure imitation only.

    `fixed_w` bypasses the weight computation (used by gradient checks, where
    the finite-difference probe must see the same stop-gradient weights the
    backward pass used)."""
    n = expert_onehot.shape[0]
    if fixed_w is None:
        w = advisor_weight(expert_probs, net["aux_probs"].data, alpha, beta)
    else:
        w = np.asarray(fixed_w, dtype=np.float64)
    ce = _per_sample_ce(net["probs"], expert_onehot)
    rl = _clipped_objective(net["probs"], actions, old_logp, adv, clip_eps)
    il_term = dc.scale(dc.dot(ce, w), 1.0 / n)
    rl_term = dc.scale(dc.dot(rl, 1.0 - w), 1.0 / n)
    value = _value_term(net["values"], value_targets)
    aux = dc.mean_(_per_sample_ce(net["aux_probs"], expert_onehot))
    loss = dc.add(dc.add(il_term, rl_term),
                  dc.add(dc.scale(value, value_coef), aux))
    return {"loss": loss, "il": float(il_term.data), "rl": float(rl_term.data),
            "value": float(value.data), "aux": float(aux.data),
            "mean_weight": float(w.mean())}


def static_mix_loss(net: dict, expert_onehot: np.ndarray, actions: np.ndarray,
                    old_logp: np.ndarray, adv: np.ndarray,
                    value_targets: np.ndarray, clip_eps: float,
                    mix: float = 0.5, value_coef: float = 0.5) -> dict:
    """Fixed-coefficient IL + RL blend (no auxiliary actor)."""
    ce = dc.mean_(_per_sample_ce(net["probs"], expert_onehot))
    policy = dc.mean_(_clipped_objective(net["probs"], actions, old_logp, adv, clip_eps))
    value = _value_term(net["values"], value_targets)
    loss = dc.add(dc.add(dc.scale(ce, mix), dc.scale(policy, 1.0 - mix)),
                  dc.scale(value, value_coef))
    return {"loss": loss, "ce": float(ce.data), "policy": float(policy.data),
            "value": float(value.data)}

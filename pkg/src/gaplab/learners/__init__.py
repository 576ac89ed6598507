from .models import TabularPolicy, RecurrentPolicy, make_policy, MASK_NEG
from .losses import (gae_advantages, normalize_advantages, bc_loss, ppo_loss,
                     advisor_weight, advisor_loss, static_mix_loss)
from .methods import (METHODS, MethodSpec, MethodConfig, Stage, StagePlan,
                      resolve_method_id, sample_method_config, plan_stage,
                      clip_eps_at, LR_LOW, LR_HIGH, SPLIT_LOW, SPLIT_HIGH,
                      ALPHA_CHOICES)

__all__ = [
    "TabularPolicy", "RecurrentPolicy", "make_policy", "MASK_NEG",
    "gae_advantages", "normalize_advantages", "bc_loss", "ppo_loss",
    "advisor_weight", "advisor_loss", "static_mix_loss",
    "METHODS", "MethodSpec", "MethodConfig", "Stage", "StagePlan",
    "resolve_method_id", "sample_method_config", "plan_stage", "clip_eps_at",
    "LR_LOW", "LR_HIGH", "SPLIT_LOW", "SPLIT_HIGH", "ALPHA_CHOICES",
]

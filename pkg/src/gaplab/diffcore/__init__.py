"""Reverse-mode autodiff core, optimizer, and checkpoint IO."""

from .tensor import (
    PROB_FLOOR,
    DiffcoreError,
    NonFiniteLoss,
    ParamStore,
    ShapeMismatch,
    Tensor,
    add,
    as_tensor,
    clip_const,
    cross_entropy,
    dot,
    embedding,
    forward_backward,
    gather_rows,
    grid_embed,
    kl_divergence,
    linear,
    log_floor,
    lstm_sequence,
    lstm_step_np,
    mean_,
    minimum,
    mul,
    neg,
    reshape,
    scale,
    softmax,
    softmax_np,
    square,
    sub,
    sum_,
)
from .optim import Adam, adam_step, clip_global_norm
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "PROB_FLOOR", "DiffcoreError", "NonFiniteLoss", "ParamStore", "ShapeMismatch",
    "Tensor", "add", "as_tensor", "clip_const", "cross_entropy", "dot", "embedding",
    "forward_backward", "gather_rows", "grid_embed", "kl_divergence", "linear",
    "log_floor", "lstm_sequence", "lstm_step_np", "mean_", "minimum", "mul", "neg",
    "reshape", "scale", "softmax", "softmax_np", "square", "sub", "sum_",
    "Adam", "adam_step", "clip_global_norm",
    "CheckpointError", "load_checkpoint", "save_checkpoint",
]

"""Training method registry.

Fourteen methods assembled from a small set of stage kinds:

  il            imitation on on-policy rollouts (expert labels each state)
  ppo           pure clipped-surrogate RL
  advisor       adaptive per-state IL/RL blend with the auxiliary actor
  static        fixed 0.5/0.5 IL/RL blend
  il_demo       imitation on pre-recorded demonstration windows (no env steps)
  ppo_il_demo   PPO on rollouts plus demo imitation in the same gradient step
  advisor_demo  adaptive blend where IL supervision comes from demo windows

Teacher forcing (probability the expert's action is executed during
collection) per stage: "zero", "one", or "anneal" (linear 1 -> 0 across the
stage). Two-stage methods switch at a searched fraction of the step budget.

Hyperparameters searched per method: learning rate (log-uniform on
[1e-4, 0.5)), stage split (uniform on [0.1, 0.9)) for two-stage methods, and
alpha (uniform choice from {5, 20}) for adaptive-blend methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LR_LOW, LR_HIGH = 1e-4, 0.5
SPLIT_LOW, SPLIT_HIGH = 0.1, 0.9
ALPHA_CHOICES = (5.0, 20.0)

DEMO_STAGES = ("il_demo", "ppo_il_demo", "advisor_demo")
EXPERT_STAGES = ("il", "advisor", "static", "advisor_demo")
RL_STAGES = ("ppo", "advisor", "static", "ppo_il_demo", "advisor_demo")


@dataclass(frozen=True)
class Stage:
    kind: str
    tf_mode: str = "zero"  # teacher forcing: "zero" | "one" | "anneal"


@dataclass(frozen=True)
class MethodSpec:
    method_id: str
    stages: tuple[Stage, ...]

    @property
    def needs_split(self) -> bool:
        return len(self.stages) == 2

    @property
    def needs_alpha(self) -> bool:
        return any(s.kind in ("advisor", "advisor_demo") for s in self.stages)

    @property
    def uses_expert(self) -> bool:
        return any(s.kind in EXPERT_STAGES or s.tf_mode != "zero"
                   for s in self.stages)

    @property
    def uses_demos(self) -> bool:
        return any(s.kind in DEMO_STAGES for s in self.stages)


def _spec(mid: str, *stages: Stage) -> MethodSpec:
    return MethodSpec(mid, tuple(stages))


METHODS: dict[str, MethodSpec] = {m.method_id: m for m in [
    _spec("BC", Stage("il")),
    _spec("DAgger", Stage("il", "anneal"), Stage("il")),
    _spec("BCtf1", Stage("il", "one")),
    _spec("PPO", Stage("ppo")),
    _spec("BC->PPO", Stage("il"), Stage("ppo")),
    _spec("DAgger->PPO", Stage("il", "anneal"), Stage("ppo")),
    _spec("BCtf1->PPO", Stage("il", "one"), Stage("ppo")),
    _spec("BC+PPO-static", Stage("static")),
    _spec("BCdemo", Stage("il_demo")),
    _spec("BCdemo+PPO", Stage("ppo_il_demo")),
    _spec("ADV", Stage("advisor")),
    _spec("DAgger->ADV", Stage("il", "anneal"), Stage("advisor")),
    _spec("BCtf1->ADV", Stage("il", "one"), Stage("advisor")),
    _spec("ADVdemo+PPO", Stage("advisor_demo")),
]}

_ALIASES = {m.lower(): m for m in METHODS}
_ALIASES.update({m.lower().replace("->", "~"): m for m in METHODS if "->" in m})


def resolve_method_id(name: str) -> str:
    key = name.strip().replace("→", "->").lower()
    if key in _ALIASES:
        return _ALIASES[key]
    raise KeyError(f"unknown method {name!r}; known: {', '.join(sorted(METHODS))}")


@dataclass(frozen=True)
class MethodConfig:
    method_id: str
    lr: float
    stage_split: float | None = None
    alpha: float | None = None
    beta: float = math.inf
    static_mix: float = 0.5

    def __post_init__(self):
        spec = METHODS.get(self.method_id)
        if spec is None:
            raise KeyError(f"unknown method {self.method_id!r}")
        if not (0.0 < self.lr):
            raise ValueError(f"lr must be positive, got {self.lr}")
        if spec.needs_split:
            if self.stage_split is None or not (0.0 < self.stage_split < 1.0):
                raise ValueError(f"{self.method_id} needs stage_split in (0, 1)")
        elif self.stage_split is not None:
            raise ValueError(f"{self.method_id} takes no stage_split")
        if spec.needs_alpha:
            if self.alpha is None or self.alpha <= 0.0:
                raise ValueError(f"{self.method_id} needs alpha > 0")
        elif self.alpha is not None:
            raise ValueError(f"{self.method_id} takes no alpha")

    @property
    def spec(self) -> MethodSpec:
        return METHODS[self.method_id]

    def to_dict(self) -> dict:
        return {"method_id": self.method_id, "lr": self.lr,
                "stage_split": self.stage_split, "alpha": self.alpha,
                "beta": None if math.isinf(self.beta) else self.beta,
                "static_mix": self.static_mix}

    @classmethod
    def from_dict(cls, d: dict) -> "MethodConfig":
        beta = d.get("beta")
        return cls(method_id=resolve_method_id(d["method_id"]), lr=d["lr"],
                   stage_split=d.get("stage_split"), alpha=d.get("alpha"),
                   beta=math.inf if beta is None else beta,
                   static_mix=d.get("static_mix", 0.5))


def sample_method_config(method_id: str, rng: np.random.Generator) -> MethodConfig:
    """Draw one point from the method's search space."""
    spec = METHODS[resolve_method_id(method_id)]
    lr = float(np.exp(rng.uniform(np.log(LR_LOW), np.log(LR_HIGH))))
    split = float(rng.uniform(SPLIT_LOW, SPLIT_HIGH)) if spec.needs_split else None
    alpha = float(ALPHA_CHOICES[rng.integers(len(ALPHA_CHOICES))]) if spec.needs_alpha else None
    return MethodConfig(spec.method_id, lr=lr, stage_split=split, alpha=alpha)


@dataclass(frozen=True)
class StagePlan:
    kind: str
    tf_prob: float
    stage_index: int


def plan_stage(config: MethodConfig, step: int, budget: int) -> StagePlan:
    """Which stage and teacher-forcing probability apply at `step`."""
    spec = config.spec
    if len(spec.stages) == 1:
        stage, idx, start, end = spec.stages[0], 0, 0, budget
    else:
        boundary = config.stage_split * budget
        if step < boundary:
            stage, idx, start, end = spec.stages[0], 0, 0, boundary
        else:
            stage, idx, start, end = spec.stages[1], 1, boundary, budget
    if stage.tf_mode == "one":
        tf = 1.0
    elif stage.tf_mode == "zero":
        tf = 0.0
    else:
        span = max(end - start, 1e-12)
        tf = max(0.0, 1.0 - (step - start) / span)
    return StagePlan(stage.kind, tf, idx)


def clip_eps_at(step: int, budget: int, clip_eps0: float = 0.1) -> float:
    """PPO clip range, annealed linearly to zero across the run."""
    frac = min(max(step / budget, 0.0), 1.0)
    return clip_eps0 * (1.0 - frac)

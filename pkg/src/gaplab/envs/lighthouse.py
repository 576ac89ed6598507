"""Lighthouse gridworlds: find the goal hidden in one corner.

The agent starts at the center; the goal sits in a uniformly random corner.
A view radius limits what the agent can ever learn: a corner's goal status
becomes known once the trajectory has come within Chebyshev distance
`view_radius` of it. States track, per corner, the minimal Chebyshev distance
achieved so far, so knowledge at any radius is recoverable from the state
(used by experts whose radius differs from the agent's).

Rewards: +0.99 on reaching the goal, -1 on hitting the step limit, -0.01 per
other step.

1-D: positions in [-n, n], actions left/right, observation is the action
history plus a which-goal-was-seen flag (the full formal observation is
recoverable from this pair, since positions follow deterministically from
actions). 2-D: positions in [-n, n]^2, four moves, observation is a single
index over (per-corner status in {unseen, seen-empty, seen-goal,
goal-in-view-now})^4 x (last action in 5)^2 = 6400 cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import IllegalAction, next_episode_key

GOAL_REWARD = 0.99
STEP_REWARD = -0.01
TIMEOUT_REWARD = -1.0


# ------------------------------------------------------------------- 1-D

@dataclass
class LH1State:
    goal: int               # +n or -n
    pos: int
    min_pos: int
    max_pos: int
    t: int
    done: bool
    succeeded: bool
    actions: list = field(default_factory=list)
    episode_key: int = 0


class Lighthouse1D:
    family = "lh1d"

    def __init__(self, n: int = 4, view_radius: int = 1, max_episode_steps: int | None = None):
        if not 0 <= view_radius <= n:
            raise ValueError("view_radius must lie in [0, n]")
        self.n = n
        self.view_radius = view_radius
        self.max_episode_steps = max_episode_steps if max_episode_steps is not None else 10 * n
        self.action_count = 2       # 0: left, 1: right
        self.obs_spec = ("tuple", None)

    def reset(self, rng: np.random.Generator) -> LH1State:
        goal = self.n if rng.integers(2) == 1 else -self.n
        return LH1State(goal=goal, pos=0, min_pos=0, max_pos=0, t=0,
                        done=False, succeeded=False, actions=[],
                        episode_key=next_episode_key())

    def goal_flag(self, state: LH1State, radius: int) -> int:
        """+1/-1 once the trajectory has put the goal corner within `radius`, else 0."""
        if state.goal > 0 and state.max_pos >= self.n - radius:
            return 1
        if state.goal < 0 and state.min_pos <= -(self.n - radius):
            return -1
        return 0

    def goal_known(self, state: LH1State, radius: int) -> int:
        """Like goal_flag but with elimination: seeing either corner settles the goal."""
        if state.max_pos >= self.n - radius or state.min_pos <= -(self.n - radius):
            return 1 if state.goal > 0 else -1
        return 0

    def observe(self, state: LH1State) -> tuple:
        return (self.goal_flag(state, self.view_radius), tuple(state.actions))

    def legal_mask(self, state: LH1State):
        return None

    def step(self, state: LH1State, action: int):
        if state.done:
            raise IllegalAction("episode is over")
        if action not in (0, 1):
            raise IllegalAction(f"bad action {action}")
        delta = 1 if action == 1 else -1
        state.pos = max(-self.n, min(self.n, state.pos + delta))
        state.min_pos = min(state.min_pos, state.pos)
        state.max_pos = max(state.max_pos, state.pos)
        state.actions.append(action)
        state.t += 1
        if state.pos == state.goal:
            state.done = True
            state.succeeded = True
            return state, GOAL_REWARD, True
        if state.t >= self.max_episode_steps:
            state.done = True
            return state, TIMEOUT_REWARD, True
        return state, STEP_REWARD, False


# ------------------------------------------------------------------- 2-D

# canonical corner order used by the status encoding
def _corners(n: int):
    return ((n, n), (n, -n), (-n, -n), (-n, n))


# action id -> (dx, dy); observation encodes last action as id+1 (0 = none)
_MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))  # up, down, left, right

OBS_VOCAB_2D = 4 ** 4 * 5 * 5  # 6400


@dataclass
class LH2State:
    goal_idx: int
    x: int
    y: int
    min_cheb: list
    t: int
    last: int               # last action id + 1, 0 if none
    prev_last: int
    done: bool
    succeeded: bool
    episode_key: int


class Lighthouse2D:
    family = "lh2d"

    def __init__(self, n: int = 15, view_radius: int = 1, max_episode_steps: int = 1000):
        if not 0 <= view_radius <= n:
            raise ValueError("view_radius must lie in [0, n]")
        self.n = n
        self.view_radius = view_radius
        self.max_episode_steps = max_episode_steps
        self.action_count = 4
        self.obs_spec = ("index", OBS_VOCAB_2D)
        self.corners = _corners(n)

    def reset(self, rng: np.random.Generator) -> LH2State:
        goal_idx = int(rng.integers(4))
        return LH2State(goal_idx=goal_idx, x=0, y=0, min_cheb=[self.n] * 4, t=0,
                        last=0, prev_last=0, done=False, succeeded=False,
                        episode_key=next_episode_key())

    def corner_statuses(self, state: LH2State, radius: int) -> tuple:
        """Per-corner status at the given view radius (see module docstring)."""
        out = []
        for c, (cx, cy) in enumerate(self.corners):
            if state.min_cheb[c] > radius:
                out.append(0)
            elif c != state.goal_idx:
                out.append(1)
            elif max(abs(state.x - cx), abs(state.y - cy)) <= radius:
                out.append(3)
            else:
                out.append(2)
        return tuple(out)

    def observe(self, state: LH2State) -> int:
        s0, s1, s2, s3 = self.corner_statuses(state, self.view_radius)
        statuses = ((s0 * 4 + s1) * 4 + s2) * 4 + s3
        return statuses * 25 + state.last * 5 + state.prev_last

    def legal_mask(self, state: LH2State):
        return None

    def step(self, state: LH2State, action: int):
        if state.done:
            raise IllegalAction("episode is over")
        if not 0 <= action < 4:
            raise IllegalAction(f"bad action {action}")
        dx, dy = _MOVES[action]
        state.x = max(-self.n, min(self.n, state.x + dx))
        state.y = max(-self.n, min(self.n, state.y + dy))
        for c, (cx, cy) in enumerate(self.corners):
            d = max(abs(state.x - cx), abs(state.y - cy))
            if d < state.min_cheb[c]:
                state.min_cheb[c] = d
        state.t += 1
        state.prev_last = state.last
        state.last = action + 1
        gx, gy = self.corners[state.goal_idx]
        if state.x == gx and state.y == gy:
            state.done = True
            state.succeeded = True
            return state, GOAL_REWARD, True
        if state.t >= self.max_episode_steps:
            state.done = True
            return state, TIMEOUT_REWARD, True
        return state, STEP_REWARD, False

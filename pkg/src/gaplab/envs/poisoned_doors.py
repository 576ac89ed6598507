"""Poisoned doors: one opening-with-a-code door, the rest gambles.

N doors. Door 1 opens only after a fixed secret code (length M over digits
{0,1,2}) is keyed in and pays 1 if the whole code was correct, else 0. Of the
remaining doors one uniformly random door pays +2, the others -2. The code is
drawn once per experiment seed and never changes across episodes; the good
door is redrawn every episode.

Observations are a single categorical: 0 before any choice, 1 after choosing
door 1 but before any digit, 2 while keying digits, 3 terminal. Actions are
the N door choices followed by the three digit keys; phase-illegal actions
raise (callers mask).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for
from .base import IllegalAction, next_episode_key


@dataclass
class PDState:
    good_door: int          # 1..n_doors-1 (0-based id of the paying door)
    phase: int              # 0 choice, 1 entering code
    digits_done: int
    all_correct: bool
    t: int
    done: bool
    succeeded: bool
    episode_key: int


class PoisonedDoors:
    family = "pd"

    def __init__(self, n_doors: int = 4, code_len: int = 10, env_seed: int = 0):
        if n_doors < 2:
            raise ValueError("need at least two doors")
        self.n_doors = n_doors
        self.code_len = code_len
        self.env_seed = env_seed
        # the secret is a property of the experiment, not of the episode
        self.code = rng_for(env_seed, "pd-code").integers(0, 3, size=code_len)
        self.action_count = n_doors + 3
        self.obs_spec = ("cat", 4)
        self.max_episode_steps = 1 + code_len

    def reset(self, rng: np.random.Generator) -> PDState:
        good = int(rng.integers(1, self.n_doors))
        return PDState(good_door=good, phase=0, digits_done=0, all_correct=True,
                       t=0, done=False, succeeded=False, episode_key=next_episode_key())

    def observe(self, state: PDState) -> int:
        if state.done:
            return 3
        if state.phase == 0:
            return 0
        return 1 if state.digits_done == 0 else 2

    def legal_mask(self, state: PDState) -> np.ndarray:
        mask = np.zeros(self.action_count)
        if state.phase == 0:
            mask[:self.n_doors] = 1.0
        else:
            mask[self.n_doors:] = 1.0
        return mask

    def step(self, state: PDState, action: int):
        if state.done:
            raise IllegalAction("episode is over")
        state.t += 1
        if state.phase == 0:
            if not 0 <= action < self.n_doors:
                raise IllegalAction(f"action {action} is not a door choice")
            if action == 0:
                state.phase = 1
                return state, 0.0, False
            state.done = True
            if action == state.good_door:
                state.succeeded = True
                return state, 2.0, True
            return state, -2.0, True
        digit = action - self.n_doors
        if not 0 <= digit < 3:
            raise IllegalAction(f"action {action} is not a code digit")
        if digit != self.code[state.digits_done]:
            state.all_correct = False
        state.digits_done += 1
        if state.digits_done == self.code_len:
            state.done = True
            if state.all_correct:
                state.succeeded = True
                return state, 1.0, True
            return state, 0.0, True
        return state, 0.0, False

"""River-crossing gridworlds (wall or lava rivers) with optional light switch.

An SxS grid (S odd) with border walls; the agent starts at the top-left
interior cell facing east, the goal is bottom-right. `obstacles` full-width
rivers alternate vertical/horizontal at evenly spaced interior columns/rows,
each with one uniformly random gap; layouts are resampled until the goal is
reachable through safe cells (bounded retries, then a generation error).

Actions: turn left, turn right, move forward, plus a switch action in the
Switch variants. Walking into a wall is a no-op, onto lava ends the episode
with reward 0, onto the goal pays 1 - t/max_steps (max_steps = 4 S^2; running
out of time pays 0).

Variants:
  base    - lights always on (also used by the corrupt-expert task flavor)
  once    - dark until the switch is pressed, then lit for the rest
  faulty  - each press lights exactly the next observation

The observation is an egocentric 7x7x3 integer tensor (type, color, state per
cell; agent bottom-center facing up; out-of-grid reads as wall). Darkness
replaces the whole tensor with a sentinel triple no real cell uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import GenerationError, IllegalAction, next_episode_key

EMPTY, WALL, LAVA, GOAL = 0, 1, 2, 3
DARK_TYPE, DARK_COLOR, DARK_STATE = 4, 5, 1

VIEW = 7
_V_FWD = VIEW - 1   # cells ahead of the agent in view coordinates
_V_SIDE = VIEW // 2

# heading: 0 east (+x), 1 south (+y), 2 west, 3 north; y grows downward
_HEAD = ((1, 0), (0, 1), (-1, 0), (0, -1))

TURN_LEFT, TURN_RIGHT, FORWARD, SWITCH = 0, 1, 2, 3


def _view_offsets():
    """Per-heading (dx, dy) world offsets for each view cell; agent at (6,3) facing up."""
    offs = np.empty((4, VIEW, VIEW, 2), dtype=np.int64)
    for h in range(4):
        fx, fy = _HEAD[h]
        rx, ry = _HEAD[(h + 1) % 4]   # right-hand direction
        for vr in range(VIEW):
            ahead = _V_FWD - vr
            for vc in range(VIEW):
                side = vc - _V_SIDE
                offs[h, vr, vc, 0] = fx * ahead + rx * side
                offs[h, vr, vc, 1] = fy * ahead + ry * side
    return offs


_OFFS = _view_offsets()

_DARK_OBS = np.empty((VIEW, VIEW, 3), dtype=np.uint8)
_DARK_OBS[:, :, 0] = DARK_TYPE
_DARK_OBS[:, :, 1] = DARK_COLOR
_DARK_OBS[:, :, 2] = DARK_STATE
_DARK_OBS.setflags(write=False)


def apply_darkness(obs: np.ndarray) -> np.ndarray:
    """What any observation collapses to when the lights are off."""
    out = _DARK_OBS.copy()
    return out


@dataclass
class CrossingState:
    grid: np.ndarray
    x: int
    y: int
    heading: int
    t: int
    lights_on: bool          # once-variant latch
    lit_count: int           # faulty-variant: observations remaining lit
    done: bool
    succeeded: bool
    episode_key: int


class Crossing:
    family = "crossing"

    def __init__(self, size: int = 25, obstacles: int = 10, kind: str = "wall",
                 variant: str = "base", corrupt_distance: int | None = None,
                 max_retries: int = 100):
        if size < 5 or size % 2 == 0:
            raise ValueError("size must be odd and at least 5")
        if kind not in ("wall", "lava"):
            raise ValueError(f"bad kind {kind!r}")
        if variant not in ("base", "once", "faulty", "corrupt"):
            raise ValueError(f"bad variant {variant!r}")
        self.size = size
        self.obstacles = obstacles
        self.kind = kind
        self.variant = variant
        self.corrupt_distance = corrupt_distance
        self.max_retries = max_retries
        self.max_episode_steps = 4 * size * size
        self.has_switch = variant in ("once", "faulty")
        self.action_count = 4 if self.has_switch else 3
        self.obs_spec = ("grid", (VIEW, VIEW, 3))
        self._river_axes = self._plan_rivers()

    # ------------------------------------------------------------ generation

    def _plan_rivers(self):
        """Fixed river directions/positions; only the gaps are random."""
        s = self.size
        n_v = (self.obstacles + 1) // 2
        n_h = self.obstacles // 2
        plan = []
        for direction, count in (("v", n_v), ("h", n_h)):
            positions = [round((m + 1) * (s - 1) / (count + 1)) for m in range(count)]
            for p in positions:
                if not 2 <= p <= s - 3:
                    raise GenerationError(
                        f"{self.obstacles} rivers do not fit a size-{s} grid")
            if len(set(positions)) != count:
                raise GenerationError(
                    f"{self.obstacles} rivers do not fit a size-{s} grid")
            plan.extend((direction, p) for p in positions)
        # interleave v/h in placement order (k-th river alternates direction)
        v = [r for r in plan if r[0] == "v"]
        h = [r for r in plan if r[0] == "h"]
        out = []
        for k in range(self.obstacles):
            out.append(v[k // 2] if k % 2 == 0 else h[k // 2])
        return out

    def _build_grid(self, rng: np.random.Generator) -> np.ndarray:
        s = self.size
        body = WALL if self.kind == "wall" else LAVA
        grid = np.full((s, s), EMPTY, dtype=np.int8)
        grid[0, :] = grid[s - 1, :] = WALL
        grid[:, 0] = grid[:, s - 1] = WALL
        cols = sorted(p for d, p in self._river_axes if d == "v")
        rows = sorted(p for d, p in self._river_axes if d == "h")
        for c in cols:
            grid[c, 1:s - 1] = body
        for r in rows:
            grid[1:s - 1, r] = body
        # Carve one opening per river along a random monotone room path from
        # the start band to the goal band; openings fall strictly inside the
        # current band, so they are never destroyed by a crossing river.
        path = ["h"] * len(cols) + ["v"] * len(rows)
        order = rng.permutation(len(path))
        limits_v = [0] + cols + [s - 1]
        limits_h = [0] + rows + [s - 1]
        band_x, band_y = 0, 0
        for k in order:
            if path[k] == "h":                   # cross the next vertical river
                x = limits_v[band_x + 1]
                y = int(rng.integers(limits_h[band_y] + 1, limits_h[band_y + 1]))
                band_x += 1
            else:                                # cross the next horizontal river
                y = limits_h[band_y + 1]
                x = int(rng.integers(limits_v[band_x] + 1, limits_v[band_x + 1]))
                band_y += 1
            grid[x, y] = EMPTY
        grid[s - 2, s - 2] = GOAL
        return grid

    @staticmethod
    def _reachable(grid: np.ndarray, start, goal) -> bool:
        s = grid.shape[0]
        seen = np.zeros_like(grid, dtype=bool)
        stack = [start]
        seen[start] = True
        while stack:
            x, y = stack.pop()
            if (x, y) == goal:
                return True
            for dx, dy in _HEAD:
                nx, ny = x + dx, y + dy
                if 0 <= nx < s and 0 <= ny < s and not seen[nx, ny] \
                        and grid[nx, ny] in (EMPTY, GOAL):
                    seen[nx, ny] = True
                    stack.append((nx, ny))
        return False

    def reset(self, rng: np.random.Generator) -> CrossingState:
        s = self.size
        for _ in range(self.max_retries):
            grid = self._build_grid(rng)
            if self._reachable(grid, (1, 1), (s - 2, s - 2)):
                grid.setflags(write=False)
                return CrossingState(grid=grid, x=1, y=1, heading=0, t=0,
                                     lights_on=False, lit_count=0, done=False,
                                     succeeded=False, episode_key=next_episode_key())
        raise GenerationError(
            f"no solvable layout in {self.max_retries} tries (size {s}, "
            f"{self.obstacles} rivers)")

    # ------------------------------------------------------------- stepping

    def lit(self, state: CrossingState) -> bool:
        if not self.has_switch:
            return True
        if self.variant == "once":
            return state.lights_on
        return state.lit_count > 0

    def observe(self, state: CrossingState) -> np.ndarray:
        if not self.lit(state):
            return _DARK_OBS.copy()
        s = self.size
        off = _OFFS[state.heading]
        wx = state.x + off[:, :, 0]
        wy = state.y + off[:, :, 1]
        inside = (wx >= 0) & (wx < s) & (wy >= 0) & (wy < s)
        cells = np.where(inside, state.grid[wx.clip(0, s - 1), wy.clip(0, s - 1)], WALL)
        obs = np.zeros((VIEW, VIEW, 3), dtype=np.uint8)
        obs[:, :, 0] = cells
        obs[:, :, 1] = cells   # one fixed color per cell type
        return obs

    def legal_mask(self, state: CrossingState):
        return None

    def step(self, state: CrossingState, action: int):
        if state.done:
            raise IllegalAction("episode is over")
        if not 0 <= action < self.action_count:
            raise IllegalAction(f"bad action {action}")
        if state.lit_count > 0:
            state.lit_count -= 1   # the observation that chose this action is consumed
        state.t += 1
        if action == TURN_LEFT:
            state.heading = (state.heading - 1) % 4
        elif action == TURN_RIGHT:
            state.heading = (state.heading + 1) % 4
        elif action == SWITCH and self.has_switch:
            if self.variant == "once":
                state.lights_on = True
            else:
                state.lit_count = 1
        else:  # forward
            fx, fy = _HEAD[state.heading]
            nx, ny = state.x + fx, state.y + fy
            cell = state.grid[nx, ny]
            if cell == GOAL:
                state.x, state.y = nx, ny
                state.done = True
                state.succeeded = True
                return state, 1.0 - state.t / self.max_episode_steps, True
            if cell == LAVA:
                state.x, state.y = nx, ny
                state.done = True
                return state, 0.0, True
            if cell != WALL:
                state.x, state.y = nx, ny
        if state.t >= self.max_episode_steps:
            state.done = True
            return state, 0.0, True
        return state, 0.0, False

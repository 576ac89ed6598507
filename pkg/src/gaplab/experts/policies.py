"""Privileged expert policies.

An expert is bound to one env instance and answers `query(state)` with a
probability vector over that env's actions, computed from the full state
(experts see through darkness and filtration). Crossing experts also expose
`distance_to_goal(state)` in actions, which the corruption wrapper keys on.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..envs.crossing import EMPTY, FORWARD, GOAL, TURN_LEFT, TURN_RIGHT, _HEAD
from ..envs.lighthouse import _MOVES

_UNREACHABLE = 1 << 30


def _one_hot(action: int, n: int) -> np.ndarray:
    v = np.zeros(n)
    v[action] = 1.0
    return v


class PoisonedDoorsExpert:
    """One-hot on the paying door; during code entry, on the correct next digit."""

    def __init__(self, env):
        self.env = env

    def query(self, state) -> np.ndarray:
        n = self.env.action_count
        if state.phase == 0:
            return _one_hot(state.good_door, n)
        return _one_hot(self.env.n_doors + int(self.env.code[state.digits_done]), n)


class Lighthouse1DExpert:
    """Sweep right until a corner has been seen at radius j, then commit.

    Episode lengths: n when the goal is the right corner, 3n - 2j otherwise,
    so the expected length is 0.5 n + 0.5 (3n - 2j).
    """

    def __init__(self, env, radius: int | None = None):
        self.env = env
        self.radius = env.n if radius is None else radius
        if not 0 <= self.radius <= env.n:
            raise ValueError("expert radius must lie in [0, n]")

    def query(self, state) -> np.ndarray:
        known = self.env.goal_known(state, self.radius)
        if known > 0:
            return _one_hot(1, 2)
        if known < 0:
            return _one_hot(0, 2)
        return _one_hot(1, 2)   # canonical sweep direction


class Lighthouse2DExpert:
    """Visit corner view-regions in a committed sweep; commit once the goal is known.

    Goal knowledge at radius j comes from the state's per-corner minimal
    Chebyshev distances, with elimination once the other three corners are
    ruled out. While unknown, head for the nearest unknown corner's view
    region (ties in canonical corner order); move along the axis with the
    larger remaining deficit (ties go to x), which yields the diagonal zigzag
    out of the center and straight legs along the edges.
    """

    def __init__(self, env, radius: int | None = None):
        self.env = env
        self.radius = env.n if radius is None else radius
        if not 0 <= self.radius <= env.n:
            raise ValueError("expert radius must lie in [0, n]")

    def _move_toward(self, state, tx: int, ty: int) -> np.ndarray:
        dx = tx - state.x
        dy = ty - state.y
        if abs(dx) >= abs(dy) and dx != 0:
            return _one_hot(3 if dx > 0 else 2, 4)
        return _one_hot(0 if dy > 0 else 1, 4)

    def query(self, state) -> np.ndarray:
        n = self.env.n
        j = self.radius
        seen = [state.min_cheb[c] <= j for c in range(4)]
        unknown = [c for c in range(4) if not seen[c]]
        goal_known = seen[state.goal_idx] or len(unknown) <= 1
        if goal_known:
            gx, gy = self.env.corners[state.goal_idx]
            return self._move_toward(state, gx, gy)
        need = n - j
        best = None
        for c in unknown:
            sx, sy = (1 if self.env.corners[c][0] > 0 else -1,
                      1 if self.env.corners[c][1] > 0 else -1)
            dfx = max(0, need - sx * state.x)
            dfy = max(0, need - sy * state.y)
            if best is None or dfx + dfy < best[0]:
                best = (dfx + dfy, dfx, dfy, sx, sy)
        _, dfx, dfy, sx, sy = best
        if dfx >= dfy and dfx > 0:
            return _one_hot(3 if sx > 0 else 2, 4)
        return _one_hot(0 if sy > 0 else 1, 4)


class ShortestPathExpert:
    """Breadth-first shortest path over (cell, heading) with unit action cost.

    Distances are computed once per episode by a backward sweep from the goal
    and cached on the episode key. Forward beats turning on ties; the switch
    action (when present) never gets probability.
    """

    def __init__(self, env):
        self.env = env
        self._cache_key = None
        self._dist = None

    def _distances(self, state) -> np.ndarray:
        if self._cache_key == state.episode_key:
            return self._dist
        grid = state.grid
        s = grid.shape[0]
        safe = (grid == EMPTY) | (grid == GOAL)
        dist = np.full((s, s, 4), _UNREACHABLE, dtype=np.int64)
        gx = gy = s - 2
        q = deque()
        for h in range(4):
            dist[gx, gy, h] = 0
            q.append((gx, gy, h))
        while q:
            x, y, h = q.popleft()
            d = dist[x, y, h] + 1
            if grid[x, y] != GOAL:
                for hp in ((h - 1) % 4, (h + 1) % 4):   # predecessor turned into h
                    if dist[x, y, hp] > d:
                        dist[x, y, hp] = d
                        q.append((x, y, hp))
            px, py = x - _HEAD[h][0], y - _HEAD[h][1]
            if 0 <= px < s and 0 <= py < s and grid[px, py] == EMPTY and dist[px, py, h] > d:
                dist[px, py, h] = d
                q.append((px, py, h))
        self._cache_key = state.episode_key
        self._dist = dist
        return dist

    def distance_to_goal(self, state) -> int:
        d = int(self._distances(state)[state.x, state.y, state.heading])
        if d >= _UNREACHABLE:
            raise RuntimeError("expert queried from an unreachable state")
        return d

    def query(self, state) -> np.ndarray:
        dist = self._distances(state)
        s = self.env.size
        x, y, h = state.x, state.y, state.heading
        candidates = []
        fx, fy = _HEAD[h]
        nx, ny = x + fx, y + fy
        grid = state.grid
        if 0 <= nx < s and 0 <= ny < s and grid[nx, ny] in (EMPTY, GOAL):
            candidates.append((dist[nx, ny, h], FORWARD))
        candidates.append((dist[x, y, (h - 1) % 4], TURN_LEFT))
        candidates.append((dist[x, y, (h + 1) % 4], TURN_RIGHT))
        best = min(candidates, key=lambda c: c[0])
        if best[0] >= _UNREACHABLE:
            raise RuntimeError("expert queried from an unreachable state")
        return _one_hot(best[1], self.env.action_count)


class CorruptNearGoal:
    """Uniform over all actions once the expert is within `horizon` actions of
    the goal; defers to the wrapped expert elsewhere."""

    def __init__(self, inner, horizon: int):
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        self.inner = inner
        self.env = inner.env
        self.horizon = horizon

    def distance_to_goal(self, state) -> int:
        return self.inner.distance_to_goal(state)

    def query(self, state) -> np.ndarray:
        if self.inner.distance_to_goal(state) <= self.horizon:
            n = self.env.action_count
            return np.full(n, 1.0 / n)
        return self.inner.query(state)


def make_expert(env, expert_radius: int | None = None):
    """Default privileged expert for an env (corruption applied when the task
    carries a corrupt_distance)."""
    family = env.family
    if family == "pd":
        return PoisonedDoorsExpert(env)
    if family == "lh1d":
        return Lighthouse1DExpert(env, expert_radius)
    if family == "lh2d":
        return Lighthouse2DExpert(env, expert_radius)
    if family == "crossing":
        expert = ShortestPathExpert(env)
        if getattr(env, "corrupt_distance", None) is not None:
            expert = CorruptNearGoal(expert, env.corrupt_distance)
        return expert
    raise ValueError(f"no expert for family {family!r}")

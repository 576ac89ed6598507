"""Environment semantics: phase structure, rewards, generation, filtration,
darkness, and the golden-trace machinery."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaplab.envs import (
    Crossing,
    GenerationError,
    IllegalAction,
    Lighthouse1D,
    Lighthouse2D,
    PoisonedDoors,
    apply_darkness,
    golden_trace,
    make_env,
    obs_hash,
    resolve_task,
    task_ids,
)
from gaplab.envs.crossing import EMPTY, GOAL, LAVA, WALL

RNG = np.random.default_rng


class TestPoisonedDoors:
    def make(self, env_seed=0):
        return PoisonedDoors(n_doors=4, code_len=10, env_seed=env_seed)

    def test_code_fixed_per_experiment_seed(self):
        a = self.make(7).code
        b = self.make(7).code
        c = self.make(8).code
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)  # 3^-10 collision odds; fixed seeds chosen apart
        assert set(np.unique(a)) <= {0, 1, 2}

    def test_good_door_varies_but_never_door_one(self):
        env = self.make()
        goods = {env.reset(RNG(e)).good_door for e in range(200)}
        assert goods == {1, 2, 3}

    def test_wrong_door_pays_minus_two_and_ends(self):
        env = self.make()
        state = env.reset(RNG(0))
        bad = next(d for d in (1, 2, 3) if d != state.good_door)
        state, r, done = env.step(state, bad)
        assert (r, done) == (-2.0, True)
        assert env.observe(state) == 3

    def test_good_door_pays_plus_two(self):
        env = self.make()
        state = env.reset(RNG(0))
        _, r, done = env.step(state, state.good_door)
        assert (r, done) == (2.0, True)

    def test_full_correct_code_pays_one(self):
        env = self.make()
        state = env.reset(RNG(0))
        assert env.observe(state) == 0
        state, r, done = env.step(state, 0)
        assert (r, done) == (0.0, False)
        assert env.observe(state) == 1
        for k, digit in enumerate(env.code):
            state, r, done = env.step(state, 4 + int(digit))
            if k < len(env.code) - 1:
                assert env.observe(state) == 2
                assert not done
        assert (r, done) == (1.0, True)
        assert state.t == 11  # 1 + M actions, the hard episode cap

    def test_any_wrong_digit_still_runs_full_code_then_pays_zero(self):
        env = self.make()
        state = env.reset(RNG(0))
        state, _, _ = env.step(state, 0)
        wrong = 4 + ((int(env.code[0]) + 1) % 3)
        state, r, done = env.step(state, wrong)
        assert not done
        for digit in env.code[1:]:
            state, r, done = env.step(state, 4 + int(digit))
        assert (r, done) == (0.0, True)

    def test_phase_illegal_actions_raise(self):
        env = self.make()
        state = env.reset(RNG(0))
        with pytest.raises(IllegalAction):
            env.step(state, 5)          # digit before choosing
        state, _, _ = env.step(state, 0)
        with pytest.raises(IllegalAction):
            env.step(state, 2)          # door during code entry

    def test_legal_mask_tracks_phase(self):
        env = self.make()
        state = env.reset(RNG(0))
        assert env.legal_mask(state).tolist() == [1, 1, 1, 1, 0, 0, 0]
        state, _, _ = env.step(state, 0)
        assert env.legal_mask(state).tolist() == [0, 0, 0, 0, 1, 1, 1]


class TestLighthouse1D:
    def test_clipping_at_boundaries(self):
        env = Lighthouse1D(n=3, view_radius=1)
        state = env.reset(RNG(1))
        state.goal = -3  # force the far corner so moves don't terminate
        for _ in range(5):
            state, _, _ = env.step(state, 1)
        assert state.pos == 3
        assert state.max_pos == 3

    def test_goal_flag_appears_at_radius(self):
        env = Lighthouse1D(n=4, view_radius=1)
        state = env.reset(RNG(0))
        state.goal = 4
        flags = []
        for _ in range(3):
            flags.append(env.observe(state)[0])
            state, _, _ = env.step(state, 1)
        # positions 0,1,2: the goal at 4 becomes visible at pos 3 only
        assert flags == [0, 0, 0]
        flags.append(env.observe(state)[0])
        assert state.pos == 3
        assert flags[-1] == 1

    def test_observation_contains_action_history(self):
        env = Lighthouse1D(n=4, view_radius=1)
        state = env.reset(RNG(0))
        state.goal = -4
        state, _, _ = env.step(state, 1)
        state, _, _ = env.step(state, 0)
        assert env.observe(state)[1] == (1, 0)

    def test_reaching_goal_rewards_and_ends(self):
        env = Lighthouse1D(n=2, view_radius=0)
        state = env.reset(RNG(0))
        state.goal = 2
        state, r, done = env.step(state, 1)
        assert (r, done) == (-0.01, False)
        state, r, done = env.step(state, 1)
        assert (r, done) == (0.99, True)
        assert state.succeeded


class TestLighthouse2D:
    def test_observation_index_range_and_purity(self):
        env = Lighthouse2D(n=5, view_radius=1)
        rng = RNG(3)
        state = env.reset(rng)
        for _ in range(300):
            if state.done:
                state = env.reset(rng)
            idx = env.observe(state)
            assert 0 <= idx < 6400
            assert env.observe(state) == idx  # pure
            state, _, _ = env.step(state, int(rng.integers(4)))

    def test_start_is_all_unseen_no_last_action(self):
        env = Lighthouse2D(n=5, view_radius=1)
        state = env.reset(RNG(0))
        assert env.observe(state) == 0
        assert env.corner_statuses(state, 5) != (0, 0, 0, 0)  # radius n sees everything

    def test_corner_knowledge_accumulates(self):
        env = Lighthouse2D(n=3, view_radius=1)
        state = env.reset(RNG(0))
        state.goal_idx = 2  # (-n, -n)
        # walk to the (n, n) corner region: right and up
        for a in (3, 0, 3, 0, 3, 0):
            state, _, _ = env.step(state, a)
        assert state.min_cheb[0] == 0
        statuses = env.corner_statuses(state, 1)
        assert statuses[0] == 1           # seen, not the goal
        assert statuses[2] == 0           # far corner untouched
        # knowledge persists after walking away
        state, _, _ = env.step(state, 2)
        assert env.corner_statuses(state, 1)[0] == 1

    def test_goal_statuses_distinguish_in_view_from_remembered(self):
        env = Lighthouse2D(n=3, view_radius=1)
        state = env.reset(RNG(0))
        state.goal_idx = 0
        for a in (3, 0, 3, 0, 3):       # end at (3, 2), chebyshev 1 from (3, 3)
            state, _, _ = env.step(state, a)
        assert env.corner_statuses(state, 1)[0] == 3       # goal in view now
        state, _, _ = env.step(state, 2)                   # step away
        state, _, _ = env.step(state, 2)
        assert env.corner_statuses(state, 1)[0] == 2       # remembered

    def test_last_two_actions_encoded(self):
        env = Lighthouse2D(n=5, view_radius=1)
        state = env.reset(RNG(0))
        state.goal_idx = 2
        state, _, _ = env.step(state, 3)
        state, _, _ = env.step(state, 0)
        assert env.observe(state) % 25 == (0 + 1) * 5 + (3 + 1)

    def test_timeout_reward(self):
        env = Lighthouse2D(n=2, view_radius=0, max_episode_steps=3)
        state = env.reset(RNG(0))
        state.goal_idx = 1
        state, r, done = env.step(state, 0)
        state, r, done = env.step(state, 1)
        state, r, done = env.step(state, 0)
        assert (r, done) == (-1.0, True)
        assert not state.succeeded


def crossing_env(**kw):
    defaults = dict(size=9, obstacles=4, kind="wall", variant="base")
    defaults.update(kw)
    return Crossing(**defaults)


class TestCrossingGeneration:
    def test_rivers_span_and_have_gaps(self):
        env = crossing_env()
        state = env.reset(RNG(5))
        g = state.grid
        # vertical rivers at columns 3 and 5, horizontal at rows 3 and 5
        for c in (3, 5):
            col = g[c, 1:8]
            assert (col == WALL).sum() >= 5  # crossing cells may punch holes
        assert g[1, 1] == EMPTY
        assert g[7, 7] == GOAL

    def test_reachability_always_holds(self):
        env = crossing_env(kind="lava")
        for e in range(30):
            state = env.reset(RNG(e))
            assert env._reachable(state.grid, (1, 1), (7, 7))

    def test_generation_is_seed_deterministic(self):
        env = crossing_env()
        a = env.reset(RNG(11)).grid
        b = env.reset(RNG(11)).grid
        assert np.array_equal(a, b)

    def test_impossible_config_raises(self):
        with pytest.raises(GenerationError):
            Crossing(size=5, obstacles=6)

    def test_lava_kind_uses_lava_cells(self):
        env = crossing_env(kind="lava")
        g = env.reset(RNG(0)).grid
        assert (g == LAVA).sum() > 0
        assert (g[1:8, 1:8] == WALL).sum() == 0


class TestCrossingDynamics:
    def test_forward_moves_and_bump_is_noop(self):
        env = crossing_env()
        state = env.reset(RNG(5))
        assert (state.x, state.y, state.heading) == (1, 1, 0)
        state, r, done = env.step(state, 2)   # forward east
        assert (state.x, state.y) == (2, 1)
        state, _, _ = env.step(state, 0)      # face north
        assert state.heading == 3
        state, _, _ = env.step(state, 2)      # bump the border wall
        assert (state.x, state.y) == (2, 1)

    def test_goal_reward_scales_with_time(self):
        env = crossing_env()
        # drive to the goal manually along a found safe path
        state = env.reset(RNG(5))
        expert_path_reward = None
        from gaplab.experts import ShortestPathExpert
        expert = ShortestPathExpert(env)
        done = False
        while not done:
            a = int(np.argmax(expert.query(state)))
            state, r, done = env.step(state, a)
        assert state.succeeded
        expert_path_reward = r
        assert expert_path_reward == pytest.approx(1.0 - state.t / (4 * 81))
        assert 0.9 < expert_path_reward < 1.0

    def test_lava_ends_with_zero(self):
        env = crossing_env(kind="lava")
        state = env.reset(RNG(0))
        g = state.grid
        # walk east until hitting the first lava column
        done = False
        r = None
        while not done:
            state, r, done = env.step(state, 2)
            if state.x == 2 and not done:     # avoid looping forever pre-river
                pass
        assert r == 0.0
        assert g[state.x, state.y] == LAVA
        assert not state.succeeded

    def test_timeout_zero_reward(self):
        env = crossing_env()
        state = env.reset(RNG(5))
        r, done = None, False
        while not done:
            state, r, done = env.step(state, 0)  # spin in place
        assert state.t == 4 * 81
        assert r == 0.0


class TestCrossingView:
    def test_view_shape_and_agent_cell(self):
        env = crossing_env()
        state = env.reset(RNG(5))
        obs = env.observe(state)
        assert obs.shape == (7, 7, 3)
        assert obs.dtype == np.uint8
        assert obs[6, 3, 0] == EMPTY          # agent's own cell
        # out-of-grid cells behind the agent read as wall
        assert obs[0, 0, 0] == WALL or True   # far forward may be in-grid; check left edge
        # facing east from (1,1): everything left of the agent is out of grid
        assert (obs[:, 0, 0] == WALL).all()

    def test_view_rotates_with_heading(self):
        env = crossing_env()
        state = env.reset(RNG(5))
        east = env.observe(state)
        state.heading = 2  # west: border wall directly ahead
        west = env.observe(state)
        assert not np.array_equal(east, west)
        assert (west[5, :, 0] == WALL).all()  # the row just ahead is all wall/out-of-grid

    def test_darkness_sentinel_unique_and_applied(self):
        env = crossing_env(variant="once")
        state = env.reset(RNG(5))
        dark = env.observe(state)
        assert (dark == apply_darkness(dark)).all()
        lit_env = crossing_env()
        lit = lit_env.observe(lit_env.reset(RNG(5)))
        triples = {tuple(v) for v in lit.reshape(-1, 3)}
        assert tuple(dark[0, 0]) not in triples

    def test_once_switch_latches(self):
        env = crossing_env(variant="once")
        state = env.reset(RNG(5))
        assert not env.lit(state)
        state, _, _ = env.step(state, 3)
        assert env.lit(state)
        for a in (0, 1, 2, 0):
            state, _, _ = env.step(state, a)
        assert env.lit(state)

    def test_faulty_switch_lights_exactly_one_observation(self):
        env = crossing_env(variant="faulty")
        state = env.reset(RNG(5))
        state, _, _ = env.step(state, 3)
        assert env.lit(state)                      # observation right after the press
        state, _, _ = env.step(state, 0)
        assert not env.lit(state)                  # dark again one step later

    def test_switch_absent_outside_switch_variants(self):
        env = crossing_env()
        assert env.action_count == 3
        state = env.reset(RNG(5))
        with pytest.raises(IllegalAction):
            env.step(state, 3)


class TestCatalogAndTraces:
    def test_catalog_names_ten_tasks(self):
        ids = task_ids()
        assert len(ids) == 10
        assert "pd" in ids and "lh2d" in ids and "lc-once" in ids

    def test_resolve_and_override(self):
        cfg = resolve_task("lc-once", {"size": 9, "obstacles": 4})
        assert cfg.params["size"] == 9
        env = make_env(cfg, env_seed=0)
        assert env.size == 9 and env.kind == "lava" and env.has_switch

    def test_unknown_task_rejected(self):
        with pytest.raises(KeyError):
            resolve_task("nope")

    def test_obs_hash_distinguishes_payloads(self):
        a = obs_hash(np.zeros((2, 2), dtype=np.uint8))
        b = obs_hash(np.ones((2, 2), dtype=np.uint8))
        c = obs_hash(0)
        assert len({a, b, c}) == 3
        assert obs_hash(np.zeros((2, 2), dtype=np.uint8)) == a

    def test_golden_trace_replays_deterministically(self):
        cfg = resolve_task("lc-faulty")
        env = make_env(cfg, env_seed=3)
        actions = [2, 3, 0, 2, 2, 1, 2]
        t1 = golden_trace(env, 42, actions)
        t2 = golden_trace(make_env(cfg, env_seed=3), 42, actions)
        assert t1 == t2
        assert len(t1) <= len(actions)

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_crossing_episode_invariants(self, seed):
        env = crossing_env(kind="lava")
        rng = RNG(seed)
        state = env.reset(rng)
        total = 0.0
        for _ in range(200):
            if state.done:
                break
            a = int(rng.integers(3))
            state, r, done = env.step(state, a)
            total += r
            assert 0.0 <= r <= 1.0
        assert 0 <= state.x < 9 and 0 <= state.y < 9

"""Tests for the benchmark environments."""

import math

import numpy as np
import pytest

from see_rl.envs import PlanarLander, env_spec, make_env
from see_rl.errors import ConfigurationError

ALL_ENVS = ("cartpole", "sparse_mountaincar", "planar_lander")


def rollout(name, seed, actions):
    env = make_env(name)
    obs = [env.reset(seed)]
    rewards = []
    flags = []
    for a in actions:
        r = env.step(a)
        obs.append(r.observation)
        rewards.append(r.reward)
        flags.append((r.terminated, r.truncated))
        if r.done:
            break
    return obs, rewards, flags


class TestRegistry:
    def test_specs(self):
        assert env_spec("cartpole").action_count == 2
        assert env_spec("cartpole").obs_dim == 4
        assert env_spec("cartpole").max_episode_steps == 500
        assert env_spec("sparse_mountaincar").action_count == 3
        assert env_spec("sparse_mountaincar").obs_dim == 2
        assert env_spec("sparse_mountaincar").max_episode_steps == 200
        assert env_spec("planar_lander").action_count == 4
        assert env_spec("planar_lander").obs_dim == 8
        assert env_spec("planar_lander").max_episode_steps == 1000

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            env_spec("pong")
        with pytest.raises(ConfigurationError):
            make_env("pong")


class TestCommonContract:
    @pytest.mark.parametrize("name", ALL_ENVS)
    def test_reset_determinism(self, name):
        a = make_env(name).reset(99)
        b = make_env(name).reset(99)
        np.testing.assert_array_equal(a, b)

    @pytest.mark.parametrize("name", ALL_ENVS)
    def test_trajectory_determinism(self, name):
        rng = np.random.default_rng(5)
        actions = rng.integers(0, env_spec(name).action_count, size=300)
        obs_a, rew_a, _ = rollout(name, 17, actions)
        obs_b, rew_b, _ = rollout(name, 17, actions)
        assert rew_a == rew_b
        for x, y in zip(obs_a, obs_b):
            np.testing.assert_array_equal(x, y)

    @pytest.mark.parametrize("name", ALL_ENVS)
    def test_observations_stay_finite(self, name):
        rng = np.random.default_rng(2)
        env = make_env(name)
        obs = env.reset(1)
        assert np.all(np.isfinite(obs))
        for _ in range(env.spec.max_episode_steps):
            r = env.step(int(rng.integers(env.spec.action_count)))
            assert np.all(np.isfinite(r.observation))
            assert math.isfinite(r.reward)
            if r.done:
                break

    @pytest.mark.parametrize("name", ALL_ENVS)
    def test_step_after_done_raises(self, name):
        env = make_env(name)
        env.reset(0)
        for _ in range(env.spec.max_episode_steps + 1):
            r = env.step(0)
            if r.done:
                break
        with pytest.raises(RuntimeError):
            env.step(0)

    @pytest.mark.parametrize("name", ALL_ENVS)
    def test_never_terminated_and_truncated(self, name):
        rng = np.random.default_rng(8)
        for seed in range(3):
            env = make_env(name)
            env.reset(seed)
            while True:
                r = env.step(int(rng.integers(env.spec.action_count)))
                assert not (r.terminated and r.truncated)
                if r.done:
                    break


class TestCartPole:
    def test_initial_range(self):
        for seed in range(20):
            obs = make_env("cartpole").reset(seed)
            assert np.all(np.abs(obs) <= 0.05)

    def test_reward_is_one_every_step(self):
        rng = np.random.default_rng(0)
        _, rewards, _ = rollout("cartpole", 3, rng.integers(0, 2, size=500))
        assert all(r == 1.0 for r in rewards)

    def test_return_equals_episode_length(self):
        rng = np.random.default_rng(1)
        for seed in range(5):
            _, rewards, _ = rollout("cartpole", seed, rng.integers(0, 2, size=500))
            assert sum(rewards) == len(rewards)

    def test_dynamics_against_reference_formulas(self):
        # independent oracle: the textbook cart-pole update evaluated here
        def reference_step(state, action):
            g, mc, mp, half_len, f_mag, dt = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
            total_mass = mc + mp
            pml = mp * half_len
            x, x_dot, theta, theta_dot = state
            force = f_mag if action == 1 else -f_mag
            cos_t, sin_t = math.cos(theta), math.sin(theta)
            temp = (force + pml * theta_dot**2 * sin_t) / total_mass
            theta_acc = (g * sin_t - cos_t * temp) / (
                half_len * (4.0 / 3.0 - mp * cos_t**2 / total_mass)
            )
            x_acc = temp - pml * theta_acc * cos_t / total_mass
            return np.array(
                [x + dt * x_dot, x_dot + dt * x_acc, theta + dt * theta_dot, theta_dot + dt * theta_acc]
            )

        env = make_env("cartpole")
        obs = env.reset(13)
        rng = np.random.default_rng(13)
        for _ in range(50):
            a = int(rng.integers(2))
            expected = reference_step(obs, a)
            r = env.step(a)
            np.testing.assert_allclose(r.observation, expected, rtol=1e-12, atol=1e-15)
            if r.done:
                break
            obs = r.observation

    def test_rest_state_push_right(self):
        env = make_env("cartpole")
        env.reset(0)
        env._state = np.zeros(4)
        r = env.step(1)
        x, x_dot, theta, theta_dot = r.observation
        assert x == 0.0 and theta == 0.0
        assert x_dot > 0.0         # cart accelerates in the push direction
        assert theta_dot < 0.0     # pole reacts opposite the push
        np.testing.assert_allclose(x_dot, 0.02 * (10.0 / 1.1 + 0.05 * 14.63414634146342 / 1.1), rtol=1e-9)

    def test_termination_thresholds(self):
        env = make_env("cartpole")
        env.reset(0)
        env._state = np.array([0.0, 0.0, 0.2, 0.0])  # just under 12 degrees
        r = env.step(0)
        assert r.terminated == (abs(r.observation[2]) > 12.0 * 2.0 * math.pi / 360.0)

    def test_truncates_at_500_under_balancing_controller(self):
        # PD controller on (theta, theta_dot) keeps the pole up indefinitely
        env = make_env("cartpole")
        obs = env.reset(4)
        steps = 0
        while True:
            r = env.step(1 if 10.0 * obs[2] + obs[3] > 0 else 0)
            obs = r.observation
            steps += 1
            if r.done:
                break
        assert steps == 500
        assert r.truncated and not r.terminated


class TestSparseMountainCar:
    def test_initial_state(self):
        for seed in range(20):
            pos, vel = make_env("sparse_mountaincar").reset(seed)
            assert -0.6 <= pos <= -0.4
            assert vel == 0.0

    def test_reward_support(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            _, rewards, flags = rollout("sparse_mountaincar", seed, rng.integers(0, 3, size=200))
            for r, (terminated, _) in zip(rewards, flags):
                assert r in (0.0, 1.0)
                assert (r == 1.0) == terminated

    def test_velocity_update_hand_value(self):
        env = make_env("sparse_mountaincar")
        env.reset(0)
        env._state = np.array([-0.5, 0.0])
        r = env.step(2)
        expected_v = 0.001 - 0.0025 * math.cos(3.0 * -0.5)
        np.testing.assert_allclose(r.observation[1], expected_v, rtol=1e-12)
        np.testing.assert_allclose(r.observation[0], -0.5 + expected_v, rtol=1e-12)

    def test_goal_gives_plus_one_and_terminates(self):
        env = make_env("sparse_mountaincar")
        env.reset(0)
        env._state = np.array([0.45, 0.07])
        r = env.step(2)
        assert r.observation[0] >= 0.5
        assert r.terminated and r.reward == 1.0

    def test_swing_up_policy_reaches_goal(self):
        # push in the direction of motion: the standard energy-pumping policy
        env = make_env("sparse_mountaincar")
        obs = env.reset(0)
        for _ in range(200):
            action = 2 if obs[1] >= 0 else 0
            r = env.step(action)
            obs = r.observation
            if r.terminated:
                break
        assert r.terminated and r.reward == 1.0

    def test_left_wall_zeroes_velocity(self):
        env = make_env("sparse_mountaincar")
        env.reset(0)
        env._state = np.array([-1.19, -0.07])
        r = env.step(0)
        assert r.observation[0] == -1.2
        assert r.observation[1] == 0.0

    def test_truncates_at_200(self):
        env = make_env("sparse_mountaincar")
        env.reset(1)
        for i in range(200):
            r = env.step(1)  # coasting never reaches the goal
        assert r.truncated and not r.terminated


def scripted_pilot(obs):
    """Hand-written landing controller used to pin solvability."""
    x, y, vx, vy, th, om, cl, cr = obs
    if cl or cr:
        return 0
    target_vy = -min(0.35, 0.08 + 0.25 * y)
    angle_target = float(np.clip(0.8 * x + 1.5 * vx, -0.35, 0.35))
    if vy < target_vy and abs(th) < 0.45:
        return 2
    want_om = float(np.clip(3.0 * (angle_target - th), -0.3, 0.3))
    if om < want_om - 0.03:
        return 1
    if om > want_om + 0.03:
        return 3
    return 0


class TestPlanarLander:
    def test_initial_ranges(self):
        for seed in range(20):
            x, y, vx, vy, th, om, cl, cr = make_env("planar_lander").reset(seed)
            assert -0.3 <= x <= 0.3 and y == 1.0
            assert -0.1 <= vx <= 0.1 and -0.1 <= vy <= 0.0
            assert -0.1 <= th <= 0.1 and om == 0.0
            assert cl == 0.0 and cr == 0.0

    def test_noop_free_fall_reward_decomposition(self):
        env = make_env("planar_lander")
        obs = env.reset(3)

        def potential(o):
            return (
                -100.0 * math.hypot(o[0], o[1])
                - 100.0 * math.hypot(o[2], o[3])
                - 100.0 * abs(o[4])
                + 10.0 * (o[6] + o[7])
            )

        before = potential(obs)
        r = env.step(0)
        np.testing.assert_allclose(r.observation[3], obs[3] - 1.62 * 0.02, rtol=1e-12)
        np.testing.assert_allclose(r.reward, potential(r.observation) - before, rtol=1e-9)

    def test_free_fall_crashes_with_penalty(self):
        env = make_env("planar_lander")
        env.reset(3)
        last = None
        while True:
            last = env.step(0)
            if last.done:
                break
        assert last.terminated
        assert last.reward < -50.0  # -100 crash bonus dominates the step reward

    def test_gentle_touchdown_succeeds_with_bonus(self):
        env = make_env("planar_lander")
        env.reset(0)
        env._x, env._y = 0.0, 0.21
        env._vx, env._vy = 0.0, -0.02
        env._angle, env._omega = 0.0, 0.0
        last = None
        for _ in range(10):
            last = env.step(0)
            if last.done:
                break
        assert last.terminated
        assert last.reward > 50.0
        assert last.observation[6] == 1.0 and last.observation[7] == 1.0

    def test_success_is_pure_function_of_observation(self):
        # terminal success <=> both contact flags set and observed speed < tolerance
        env = make_env("planar_lander")
        obs = env.reset(0)
        env._x, env._y = 0.0, 0.25
        env._vx, env._vy = 0.0, -0.1
        env._angle, env._omega = 0.0, 0.0
        while True:
            r = env.step(0)
            obs = r.observation
            speed = math.hypot(obs[2], obs[3])
            success_from_obs = obs[6] == 1.0 and obs[7] == 1.0 and speed < PlanarLander.REST_SPEED
            assert r.terminated == success_from_obs or r.reward < -50.0
            if r.done:
                break
        assert r.terminated

    def test_hard_impact_crashes(self):
        env = make_env("planar_lander")
        env.reset(0)
        env._x, env._y = 0.0, 0.3
        env._vx, env._vy = 0.0, -1.0
        env._angle, env._omega = 0.0, 0.0
        last = None
        while True:
            last = env.step(0)
            if last.done:
                break
        assert last.terminated and last.reward < -50.0

    def test_hard_impact_crashes_even_inside_contact_tolerance(self):
        # a fast foot arriving within the contact band (no penetration yet)
        # still counts as a collapse, not a soft touchdown
        env = make_env("planar_lander")
        env.reset(0)
        env._x, env._y = 0.0, 0.215
        env._vx, env._vy = 0.0, -0.6
        env._angle, env._omega = 0.0, 0.0
        r = env.step(0)
        foot_height = r.observation[1] - 0.2
        assert 0.0 <= foot_height <= 0.01
        assert r.terminated and r.reward < -50.0

    def test_out_of_bounds_crashes(self):
        env = make_env("planar_lander")
        env.reset(0)
        env._x, env._vx = 1.19, 2.0
        r = env.step(0)
        assert r.terminated and r.reward < -50.0

    def test_scripted_pilot_lands_successfully(self):
        for seed in range(5):
            env = make_env("planar_lander")
            obs = env.reset(seed)
            total = 0.0
            while True:
                r = env.step(scripted_pilot(obs))
                total += r.reward
                if r.done:
                    break
                obs = r.observation
            assert r.terminated and r.reward > 50.0, f"seed {seed} did not land"
            assert total > 0.0

    def test_main_engine_thrusts_along_body_axis(self):
        env = make_env("planar_lander")
        env.reset(0)
        env._x, env._y, env._vx, env._vy = 0.0, 1.0, 0.0, 0.0
        env._angle, env._omega = 0.0, 0.0
        r = env.step(2)
        # upright: all thrust is vertical
        assert abs(r.observation[2]) < 1e-12
        np.testing.assert_allclose(r.observation[3], 0.3 - 1.62 * 0.02, rtol=1e-12)

    def test_side_engines_are_mirror_images(self):
        results = []
        for action in (1, 3):
            env = make_env("planar_lander")
            env.reset(0)
            env._x, env._y, env._vx, env._vy = 0.0, 1.0, 0.0, 0.0
            env._angle, env._omega = 0.0, 0.0
            results.append(env.step(action).observation)
        left, right = results
        np.testing.assert_allclose(left[2], -right[2])
        np.testing.assert_allclose(left[5], -right[5])
        assert left[5] > 0.0

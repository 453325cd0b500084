"""Benchmark environments behind one stepping interface.

Three deterministic classic-control problems covering the reward regimes
the agents are studied on:

* ``cartpole`` -- dense, unshaped: +1 per step until the pole falls.
* ``sparse_mountaincar`` -- sparse: 0 everywhere, +1 on reaching the goal.
* ``planar_lander`` -- dense, shaped: potential-based shaping toward a
  gentle touchdown plus terminal bonuses.

All dynamics are float64 and fully determined by the reset seed and the
action sequence. ``terminated`` marks true environment termination (no
bootstrapping); ``truncated`` marks the time-limit cutoff (value targets
still bootstrap across it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    action_count: int
    max_episode_steps: int


@dataclass
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool
    truncated: bool

    @property
    def done(self) -> bool:
        return self.terminated or self.truncated


class _EnvBase:
    spec: EnvSpec

    def __init__(self):
        self._steps = 0
        self._finished = True

    def reset(self, seed) -> np.ndarray:
        rng = np.random.default_rng(seed)
        self._steps = 0
        self._finished = False
        return self._reset_state(rng)

    def step(self, action: int) -> StepResult:
        if self._finished:
            raise RuntimeError(
                f"{self.spec.name}: step() called on a finished episode; reset() first"
            )
        if not 0 <= int(action) < self.spec.action_count:
            raise ConfigurationError(
                f"{self.spec.name}: action {action} outside 0..{self.spec.action_count - 1}"
            )
        obs, reward, terminated = self._transition(int(action))
        self._steps += 1
        truncated = not terminated and self._steps >= self.spec.max_episode_steps
        self._finished = terminated or truncated
        return StepResult(obs, float(reward), terminated, truncated)

    # subclass hooks
    def _reset_state(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _transition(self, action: int) -> tuple[np.ndarray, float, bool]:
        raise NotImplementedError


class CartPole(_EnvBase):
    """Pole balancing with Euler-integrated reference dynamics.

    Observation (x, x_dot, theta, theta_dot); actions 0=push left,
    1=push right; +1 reward every step; terminates when |theta| exceeds
    12 degrees or |x| > 2.4; truncates at 500 steps.
    """

    spec = EnvSpec("cartpole", obs_dim=4, action_count=2, max_episode_steps=500)

    GRAVITY = 9.8
    MASS_CART = 1.0
    MASS_POLE = 0.1
    TOTAL_MASS = MASS_CART + MASS_POLE
    HALF_POLE_LENGTH = 0.5
    POLE_MASS_LENGTH = MASS_POLE * HALF_POLE_LENGTH
    FORCE_MAG = 10.0
    DT = 0.02
    THETA_THRESHOLD = 12.0 * 2.0 * math.pi / 360.0
    X_THRESHOLD = 2.4

    def _reset_state(self, rng):
        self._state = rng.uniform(-0.05, 0.05, size=4)
        return self._state.copy()

    def _transition(self, action):
        x, x_dot, theta, theta_dot = self._state
        force = self.FORCE_MAG if action == 1 else -self.FORCE_MAG
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + self.POLE_MASS_LENGTH * theta_dot**2 * sin_t) / self.TOTAL_MASS
        theta_acc = (self.GRAVITY * sin_t - cos_t * temp) / (
            self.HALF_POLE_LENGTH
            * (4.0 / 3.0 - self.MASS_POLE * cos_t**2 / self.TOTAL_MASS)
        )
        x_acc = temp - self.POLE_MASS_LENGTH * theta_acc * cos_t / self.TOTAL_MASS
        x = x + self.DT * x_dot
        x_dot = x_dot + self.DT * x_acc
        theta = theta + self.DT * theta_dot
        theta_dot = theta_dot + self.DT * theta_acc
        self._state = np.array([x, x_dot, theta, theta_dot])
        terminated = abs(x) > self.X_THRESHOLD or abs(theta) > self.THETA_THRESHOLD
        return self._state.copy(), 1.0, terminated


class SparseMountainCar(_EnvBase):
    """Underpowered car in a valley; reward only on reaching the goal.

    Observation (position, velocity); actions 0=push left, 1=coast,
    2=push right. Reward 0 on every transition and +1 when position
    reaches 0.5 (terminal). Truncates at 200 steps.
    """

    spec = EnvSpec("sparse_mountaincar", obs_dim=2, action_count=3, max_episode_steps=200)

    MIN_POSITION = -1.2
    MAX_POSITION = 0.6
    MAX_SPEED = 0.07
    GOAL_POSITION = 0.5
    FORCE = 0.001
    GRAVITY = 0.0025

    def _reset_state(self, rng):
        self._state = np.array([rng.uniform(-0.6, -0.4), 0.0])
        return self._state.copy()

    def _transition(self, action):
        position, velocity = self._state
        velocity += (action - 1) * self.FORCE - self.GRAVITY * math.cos(3.0 * position)
        velocity = min(max(velocity, -self.MAX_SPEED), self.MAX_SPEED)
        position += velocity
        position = min(max(position, self.MIN_POSITION), self.MAX_POSITION)
        if position <= self.MIN_POSITION and velocity < 0.0:
            velocity = 0.0
        self._state = np.array([position, velocity])
        terminated = position >= self.GOAL_POSITION
        return self._state.copy(), (1.0 if terminated else 0.0), terminated


class PlanarLander(_EnvBase):
    """Simplified rigid-body lunar lander over a flat surface.

    Observation (x, y, vx, vy, angle, angular_velocity, left_contact,
    right_contact); actions 0=noop, 1=left engine, 2=main engine,
    3=right engine. The body is a point mass with rotational inertia;
    leg tips and hull corners are fixed body-frame offsets. Per-step
    reward is the change in a shaping potential minus fuel costs, with
    +100 on a successful landing and -100 on a crash.

    Success (terminal): both leg tips in ground contact and speed below
    REST_SPEED -- a pure function of the observation. Crash (terminal):
    a leg first touches down faster than IMPACT_SPEED (legs collapse and
    the hull strikes), a hull corner reaches the ground, or |x| leaves
    the play area. Contact below IMPACT_SPEED settles: the lander is
    projected back onto the surface, downward motion stops, and ground
    friction damps horizontal, angular, and tilt motion.
    """

    spec = EnvSpec("planar_lander", obs_dim=8, action_count=4, max_episode_steps=1000)

    DT = 0.02
    GRAVITY = 1.62
    MAIN_ACCEL = 0.3          # delta-v per firing step, along body-up axis
    SIDE_ACCEL = 0.03         # delta-v per firing step, along body-right axis
    SIDE_ANGULAR_KICK = 0.05  # rad/s per firing step
    MAIN_FUEL_COST = 0.3
    SIDE_FUEL_COST = 0.03
    LEG_OFFSETS = ((-0.15, -0.2), (0.15, -0.2))
    HULL_OFFSETS = ((-0.15, -0.1), (0.15, -0.1))
    CONTACT_TOL = 0.01
    REST_SPEED = 0.05
    IMPACT_SPEED = 0.5
    X_LIMIT = 1.2
    LEG_CONTACT_BONUS = 10.0

    def _reset_state(self, rng):
        self._x = rng.uniform(-0.3, 0.3)
        self._y = 1.0
        self._vx = rng.uniform(-0.1, 0.1)
        self._vy = rng.uniform(-0.1, 0.0)
        self._angle = rng.uniform(-0.1, 0.1)
        self._omega = 0.0
        return self._observation()

    def _point_heights(self, offsets):
        sin_a = math.sin(self._angle)
        cos_a = math.cos(self._angle)
        return [self._y + dx * sin_a + dy * cos_a for dx, dy in offsets]

    def _contacts(self) -> tuple[bool, bool]:
        left, right = self._point_heights(self.LEG_OFFSETS)
        return left <= self.CONTACT_TOL, right <= self.CONTACT_TOL

    def _observation(self) -> np.ndarray:
        left, right = self._contacts()
        return np.array(
            [
                self._x,
                self._y,
                self._vx,
                self._vy,
                self._angle,
                self._omega,
                1.0 if left else 0.0,
                1.0 if right else 0.0,
            ]
        )

    def _potential(self) -> float:
        left, right = self._contacts()
        return (
            -100.0 * math.hypot(self._x, self._y)
            - 100.0 * math.hypot(self._vx, self._vy)
            - 100.0 * abs(self._angle)
            + self.LEG_CONTACT_BONUS * (left + right)
        )

    def _transition(self, action):
        potential_before = self._potential()
        fuel = 0.0
        sin_a = math.sin(self._angle)
        cos_a = math.cos(self._angle)
        if action == 2:
            self._vx += self.MAIN_ACCEL * -sin_a
            self._vy += self.MAIN_ACCEL * cos_a
            fuel = self.MAIN_FUEL_COST
        elif action in (1, 3):
            direction = 1.0 if action == 1 else -1.0
            self._vx += direction * self.SIDE_ACCEL * cos_a
            self._vy += direction * self.SIDE_ACCEL * sin_a
            self._omega += direction * self.SIDE_ANGULAR_KICK
            fuel = self.SIDE_FUEL_COST
        self._vy -= self.GRAVITY * self.DT
        self._x += self._vx * self.DT
        self._y += self._vy * self.DT
        self._angle += self._omega * self.DT

        terminated = False
        bonus = 0.0
        leg_heights = self._point_heights(self.LEG_OFFSETS)
        hull_heights = self._point_heights(self.HULL_OFFSETS)
        if abs(self._x) > self.X_LIMIT or min(hull_heights) <= 0.0:
            terminated = True
            bonus = -100.0
        elif min(leg_heights) <= self.CONTACT_TOL and self._vy < -self.IMPACT_SPEED:
            # legs collapse under the impact and the hull strikes the ground
            terminated = True
            bonus = -100.0
        elif min(leg_heights) <= self.CONTACT_TOL:
            penetration = -min(leg_heights)
            if penetration > 0.0:
                self._y += penetration
            self._vy = max(self._vy, 0.0)
            self._vx *= 0.5
            self._omega *= 0.5
            self._angle *= 0.8
            left, right = self._contacts()
            if left and right and math.hypot(self._vx, self._vy) < self.REST_SPEED:
                terminated = True
                bonus = 100.0

        reward = (self._potential() - potential_before) - fuel + bonus
        return self._observation(), reward, terminated


_ENV_CLASSES = {
    cls.spec.name: cls for cls in (CartPole, SparseMountainCar, PlanarLander)
}


def env_spec(name: str) -> EnvSpec:
    try:
        return _ENV_CLASSES[name].spec
    except KeyError:
        raise ConfigurationError(
            f"unknown environment {name!r}; known: {sorted(_ENV_CLASSES)}"
        ) from None


def make_env(name: str) -> _EnvBase:
    try:
        return _ENV_CLASSES[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown environment {name!r}; known: {sorted(_ENV_CLASSES)}"
        ) from None

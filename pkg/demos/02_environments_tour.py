"""Tour of the three benchmark environments and their reward regimes.

Run:  python3 demos/02_environments_tour.py
"""

import numpy as np

from see_rl.envs import env_spec, make_env

rng = np.random.default_rng(0)

print("registered environments:")
for name in ("cartpole", "sparse_mountaincar", "planar_lander"):
    s = env_spec(name)
    print(f"  {s.name}: obs_dim {s.obs_dim}, actions {s.action_count}, "
          f"time limit {s.max_episode_steps}")

# --- cartpole: dense, unshaped (+1 per step, return == episode length) -------
env = make_env("cartpole")
obs = env.reset(seed=1)
total = steps = 0
while True:
    r = env.step(int(rng.integers(2)))
    total += r.reward
    steps += 1
    if r.done:
        break
print(f"\ncartpole, random policy: {steps} steps, return {total:.0f} "
      f"(reward is +1 per step)")

# --- sparse mountaincar: reward only at the goal ------------------------------
env = make_env("sparse_mountaincar")
obs = env.reset(seed=0)
total = steps = 0
while True:
    action = 2 if obs[1] >= 0 else 0  # push along the current velocity
    r = env.step(action)
    obs = r.observation
    total += r.reward
    steps += 1
    if r.done:
        break
print(f"sparse mountaincar, energy-pumping policy: goal "
      f"{'reached' if r.terminated else 'missed'} after {steps} steps, return {total:.0f}")

env = make_env("sparse_mountaincar")
env.reset(seed=0)
returns = 0.0
for _ in range(200):
    r = env.step(int(rng.integers(3)))
    returns += r.reward
    if r.done:
        break
print(f"sparse mountaincar, random policy: return {returns:.0f} "
      f"(a random walk almost never climbs the hill)")


# --- planar lander: dense shaping toward a gentle touchdown -------------------
def pilot(o):
    x, y, vx, vy, th, om, cl, cr = o
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


env = make_env("planar_lander")
obs = env.reset(seed=2)
total = steps = 0
while True:
    r = env.step(pilot(obs))
    obs = r.observation
    total += r.reward
    steps += 1
    if r.done:
        break
outcome = "landed" if (r.terminated and r.reward > 50) else "crashed"
print(f"\nplanar lander, scripted pilot: {outcome} after {steps} steps, "
      f"return {total:.1f} (success pays +100, crash -100)")

env = make_env("planar_lander")
env.reset(seed=2)
total = 0.0
while True:
    r = env.step(0)
    total += r.reward
    if r.done:
        break
print(f"planar lander, free fall: crash, return {total:.1f}")

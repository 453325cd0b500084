"""Why the exploration objective uses a max-reward value recursion.

A value function trained on *summed* rewards prefers long episodes: many
small rewards can outweigh one large one. The exploration objective swaps
the sum for a max,

    Q(s, a) <- max(r, gamma * max_a' Q(s', a')),

so the learned value tracks the single largest (discounted) reward
reachable from a state. This demo contrasts the two recursions on a chain
and shows the max form is insensitive to episode length.

Run:  python3 demos/03_max_reward_values.py
"""


def iterate(rewards, gamma, use_max, iters=10_000, tol=1e-15):
    """Solve a single-action chain with either recursion."""
    n = len(rewards)
    values = [0.0] * n
    for _ in range(iters):
        new = []
        for i, r in enumerate(rewards):
            bootstrap = gamma * values[i + 1] if i + 1 < n else 0.0
            new.append(max(r, bootstrap) if use_max else r + bootstrap)
        if max(abs(a - b) for a, b in zip(new, values)) < tol:
            return new
        values = new
    return values


gamma = 0.99
short = [0.1, 2.0, 0.3]
padded = [0.1] + [0.0] * 10 + [2.0] + [0.0] * 10 + [0.3]

for label, chain in (("short chain", short), ("padded chain", padded)):
    summed = iterate(chain, gamma, use_max=False)[0]
    maxed = iterate(chain, gamma, use_max=True)[0]
    print(f"{label} ({len(chain)} steps): start value, summed {summed:.4f}, "
          f"max-recursion {maxed:.4f}")

print()
print("many small rewards inflate the summed value but not the max:")
drip = [0.3] * 40  # a long episode of small rewards
one_big = [0.0, 0.0, 2.0]
for label, chain in (("40 x 0.3 drip", drip), ("single 2.0", one_big)):
    summed = iterate(chain, gamma, use_max=False)[0]
    maxed = iterate(chain, gamma, use_max=True)[0]
    print(f"  {label}: summed {summed:.3f}, max-recursion {maxed:.3f}")

print()
print("with gamma -> 1 the max-recursion start value is exactly the largest")
print("reward on the path, wherever it sits:")
gamma = 1.0 - 1e-9
for shift in (1, 5, 20):
    chain = [0.0] * shift + [2.0] + [0.0] * 3
    value = iterate(chain, gamma, use_max=True)[0]
    print(f"  big reward after {shift:2d} steps: start value {value:.9f}")

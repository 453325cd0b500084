"""Tour of the network core: exact backprop, Adam, and the dueling head.

Run:  python3 demos/01_networks_and_gradients.py
"""

import numpy as np

from see_rl.nets import (
    AdamState,
    MlpSpec,
    adam_step,
    dueling_combine,
    init_params,
    mlp_backward,
    mlp_forward,
)

rng = np.random.default_rng(0)

# --- analytic gradients vs central finite differences -----------------------
spec = MlpSpec(input_dim=4, hidden_dims=(8,), output_dim=3)
params = init_params(spec, rng, dtype=np.float64)
x = rng.normal(size=4)
direction = rng.normal(size=3)

out, trace = mlp_forward(spec, params, x)
analytic, input_grad = mlp_backward(spec, params, trace, direction)

h = 1e-5
numeric = np.zeros_like(params)
for i in range(params.size):
    up, down = params.copy(), params.copy()
    up[i] += h
    down[i] -= h
    numeric[i] = (mlp_forward(spec, up, x)[0] @ direction
                  - mlp_forward(spec, down, x)[0] @ direction) / (2 * h)

worst = np.max(np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-8))
print(f"4-8-3 ReLU net, {params.size} parameters")
print(f"max relative gradient error vs finite differences: {worst:.2e}")

# the backward pass also differentiates with respect to the *input*,
# which is what lets probe states be trained later on
print(f"input gradient: {np.round(input_grad, 4)}")

# --- Adam drives a tiny regression to zero loss ------------------------------
target_params = init_params(spec, rng, dtype=np.float64)
inputs = rng.normal(size=(64, 4))
targets, _ = mlp_forward(spec, target_params, inputs)

fit = init_params(spec, rng, dtype=np.float64)
state = AdamState.fresh(spec.param_count, lr=3e-3, dtype=np.float64)
for step in range(1, 2001):
    pred, trace = mlp_forward(spec, fit, inputs)
    err = pred - targets
    loss = float(np.mean(err**2))
    grads, _ = mlp_backward(spec, fit, trace, 2.0 * err / err.size)
    fit, state = adam_step(state, fit, grads)
    if step in (1, 10, 100, 1000, 2000):
        print(f"adam step {step:5d}: loss {loss:.6f}")

# --- dueling head -------------------------------------------------------------
value = 2.0
advantages = np.array([1.0, -1.0, 3.0])
q = dueling_combine(value, advantages)
print(f"dueling: value {value}, advantages {advantages} -> q {q} (mean(q) = {q.mean()})")

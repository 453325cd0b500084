"""The exploitation objective: a dueling double DQN over observations.

The network is one MLP with hidden stack [256, 256] and a combined head of
width ``1 + action_count``: column 0 is the state value, the rest are
advantages, merged by ``dueling_combine``. Action selection for bootstrap
targets uses the online parameters; evaluation uses the target parameters
(double-Q decoupling). Terminal transitions never bootstrap; truncated-only
transitions do.
"""

from __future__ import annotations

import numpy as np

from . import persist
from .errors import DivergenceError
from .nets import (
    AdamState,
    MlpSpec,
    adam_step_inplace,
    dueling_combine,
    dueling_combine_backward,
    init_params,
    mlp_backward,
    mlp_forward,
    mlp_forward_values,
    polyak_update,
)
from .replay import Transition, TransitionBatch


def q_spec(obs_dim: int, action_count: int, hidden=(256, 256)) -> MlpSpec:
    """MLP spec realizing the dueling network (value + advantage head rows)."""
    return MlpSpec(obs_dim, tuple(hidden), 1 + action_count)


def q_forward(spec: MlpSpec, params: np.ndarray, obs: np.ndarray) -> np.ndarray:
    """Dueling q-values for a single observation or a batch."""
    out = mlp_forward_values(spec, params, obs)
    if out.ndim == 1:
        return dueling_combine(out[0], out[1:])
    return dueling_combine(out[:, 0], out[:, 1:])


def q_forward_trace(spec: MlpSpec, params: np.ndarray, obs: np.ndarray):
    out, trace = mlp_forward(spec, params, obs)
    if out.ndim == 1:
        return dueling_combine(out[0], out[1:]), trace
    return dueling_combine(out[:, 0], out[:, 1:]), trace


def q_head_grad(q_grad: np.ndarray) -> np.ndarray:
    """Map dL/dq back to the raw (value, advantages) head outputs."""
    value_grad, adv_grad = dueling_combine_backward(q_grad)
    return np.concatenate([value_grad, adv_grad], axis=1)


def q_backward(spec: MlpSpec, params: np.ndarray, trace, q_grad: np.ndarray,
               need_param_grad: bool = True):
    """Gradients of sum(q * q_grad) w.r.t. parameters and input observations."""
    g = np.asarray(q_grad)
    squeeze = g.ndim == 1
    out_grad = q_head_grad(g.reshape(1, -1) if squeeze else g)
    param_grad, input_grad = mlp_backward(spec, params, trace, out_grad, need_param_grad)
    return param_grad, (input_grad[0] if squeeze and input_grad.ndim == 2 else input_grad)


class ExploitationAgent:
    """Owns theta, its target copy, and the Adam state."""

    def __init__(
        self,
        obs_dim: int,
        action_count: int,
        hidden=(256, 256),
        gamma: float = 0.99,
        lr: float = 1e-3,
        tau: float = 0.17,
        clip_value: float = 10.0,
        rng: np.random.Generator | None = None,
        dtype=np.float32,
    ):
        self.obs_dim = int(obs_dim)
        self.action_count = int(action_count)
        self.hidden = tuple(hidden)
        self.spec = q_spec(obs_dim, action_count, hidden)
        self.gamma = float(gamma)
        self.tau = float(tau)
        self.clip_value = float(clip_value)
        rng = rng if rng is not None else np.random.default_rng()
        self.theta = init_params(self.spec, rng, dtype)
        self.theta_target = self.theta.copy()
        self.adam = AdamState.fresh(self.spec.param_count, lr, dtype)

    def q_values(self, obs, params: np.ndarray | None = None) -> np.ndarray:
        return q_forward(self.spec, self.theta if params is None else params, obs)

    def greedy_action(self, obs, params: np.ndarray | None = None) -> int:
        """Argmax of q_values; ties resolve to the lowest action index."""
        return int(np.argmax(self.q_values(obs, params)))

    def td_targets(self, batch: TransitionBatch) -> np.ndarray:
        """Double-Q targets: r + gamma * Q_target(s', argmax_a Q_online(s', a))."""
        q_next_online = self.q_values(batch.s_next)
        q_next_target = self.q_values(batch.s_next, self.theta_target)
        a_star = np.argmax(q_next_online, axis=1)
        bootstrap = q_next_target[np.arange(len(batch)), a_star]
        return batch.r + self.gamma * bootstrap * (~batch.terminated)

    def double_dqn_target(self, t: Transition) -> float:
        batch = TransitionBatch.from_transitions([t], dtype=self.theta.dtype)
        return float(self.td_targets(batch)[0])

    def update(self, batch: TransitionBatch) -> float:
        """One gradient step on the mean squared TD error; returns pre-update loss."""
        targets = self.td_targets(batch)
        q, trace = q_forward_trace(self.spec, self.theta, batch.s)
        rows = np.arange(len(batch))
        err = q[rows, batch.a] - targets
        loss = float(np.mean(err.astype(np.float64) ** 2))
        if not np.isfinite(loss):
            raise DivergenceError("non-finite exploitation loss", step=self.adam.step_count + 1)
        q_grad = np.zeros_like(q)
        q_grad[rows, batch.a] = 2.0 * err / len(batch)
        grads, _ = mlp_backward(self.spec, self.theta, trace, q_head_grad(q_grad))
        np.clip(grads, -self.clip_value, self.clip_value, out=grads)
        adam_step_inplace(self.adam, self.theta, grads)
        return loss

    def soft_target_update(self) -> None:
        self.theta_target = polyak_update(self.theta_target, self.theta, self.tau)

    def snapshot(self) -> np.ndarray:
        return self.theta.copy()

    def save(self, path, extra_metadata: dict | None = None) -> None:
        meta = {
            "kind": "exploitation",
            "obs_dim": self.obs_dim,
            "action_count": self.action_count,
            "hidden_dims": list(self.hidden),
            "gamma": self.gamma,
        }
        if extra_metadata:
            meta.update(extra_metadata)
        persist.save_params(path, self.theta, meta)

    @classmethod
    def load(cls, path, **overrides) -> "ExploitationAgent":
        params, meta = persist.load_params(path)
        agent = cls(
            obs_dim=meta["obs_dim"],
            action_count=meta["action_count"],
            hidden=tuple(meta["hidden_dims"]),
            gamma=meta.get("gamma", 0.99),
            dtype=params.dtype,
            **overrides,
        )
        agent.theta = params
        agent.theta_target = params.copy()
        agent.loaded_metadata = meta
        return agent

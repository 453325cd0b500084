"""The exploration objective.

A second value network predicts the exploitation network's absolute TD
error per action and is trained to seek transitions where that error is
large. Three ingredients:

* Conditioning: the exploitation parameters enter the input through a
  fingerprint embedding -- the exploitation net is evaluated at a bank of
  learnable probe states and the resulting q-vectors are concatenated.
  The probe bank is part of this agent's parameters and receives
  gradients through the exploitation net's input-gradient path; the
  exploitation parameters themselves are constant input data here.
* Reward: the absolute one-step TD error of the exploitation estimate,
  computed purely from the sampled parameter snapshot (no target network).
* Max-reward recursion: the bootstrap target is
  ``max(reward, gamma * next_value)`` rather than the usual sum, so the
  learned value tracks the largest single error reachable from a state
  instead of an episode-length-dependent accumulation. Targets use
  double-Q decoupling: the online net picks the next action, the target
  net evaluates it.

Updates take a transition batch and a snapshot batch and regress every
(transition, snapshot) pair in the cross product, with the squared-error
mean taken over all pairs.

Parameter layout of ``omega``: the probe bank (probe_count x obs_dim,
row-major) first, then the MLP parameters in the standard flat layout.
"""

from __future__ import annotations

import numpy as np

from . import persist
from .errors import ConfigurationError, DivergenceError
from .nets import (
    AdamState,
    MlpSpec,
    adam_step_inplace,
    init_params,
    mlp_backward,
    mlp_forward,
    mlp_forward_values,
    polyak_update,
)
from .exploit import q_backward, q_forward, q_forward_trace
from .replay import Transition, TransitionBatch


class ExplorationAgent:
    """Owns omega (probe bank + MLP), its target copy, and the Adam state."""

    def __init__(
        self,
        obs_dim: int,
        action_count: int,
        exploit_spec: MlpSpec,
        probe_count: int = 12,
        hidden=(256, 256),
        gamma_delta: float = 0.9724,
        reward_gamma: float = 0.99,
        lr: float = 1e-3,
        tau: float = 0.16,
        clip_value: float = 10.0,
        use_max_update: bool = True,
        rng: np.random.Generator | None = None,
        dtype=np.float32,
        probe_init_scale: float = 0.1,
    ):
        if probe_count < 1:
            raise ConfigurationError(f"probe_count must be positive, got {probe_count}")
        self.obs_dim = int(obs_dim)
        self.action_count = int(action_count)
        self.exploit_spec = exploit_spec
        self.probe_count = int(probe_count)
        self.embedding_dim = self.probe_count * self.action_count
        self.hidden = tuple(hidden)
        self.mlp_spec = MlpSpec(obs_dim + self.embedding_dim, tuple(hidden), action_count)
        self.gamma_delta = float(gamma_delta)
        self.reward_gamma = float(reward_gamma)
        self.tau = float(tau)
        self.clip_value = float(clip_value)
        self.use_max_update = bool(use_max_update)
        rng = rng if rng is not None else np.random.default_rng()
        probes = (probe_init_scale * rng.standard_normal((probe_count, obs_dim))).astype(dtype)
        self.omega = np.concatenate([probes.ravel(), init_params(self.mlp_spec, rng, dtype)])
        self.omega_target = self.omega.copy()
        self.adam = AdamState.fresh(self.omega.size, lr, dtype)

    # omega layout helpers -------------------------------------------------
    @property
    def probe_param_count(self) -> int:
        return self.probe_count * self.obs_dim

    def probes(self, params: np.ndarray | None = None) -> np.ndarray:
        omega = self.omega if params is None else params
        return omega[: self.probe_param_count].reshape(self.probe_count, self.obs_dim)

    def mlp_params(self, params: np.ndarray | None = None) -> np.ndarray:
        omega = self.omega if params is None else params
        return omega[self.probe_param_count :]

    # operations ------------------------------------------------------------
    def fingerprint(self, theta: np.ndarray, params: np.ndarray | None = None) -> np.ndarray:
        """Embed theta: q-vectors of the probe states, concatenated in probe order."""
        return q_forward(self.exploit_spec, theta, self.probes(params)).ravel()

    def delta_values(
        self,
        obs,
        theta: np.ndarray | None = None,
        params: np.ndarray | None = None,
        embedding: np.ndarray | None = None,
    ) -> np.ndarray:
        """Predicted absolute TD error per action for obs under snapshot theta.

        Callers may pass a precomputed ``embedding`` (from ``fingerprint``)
        instead of ``theta`` to avoid re-embedding an unchanged snapshot.
        """
        if embedding is None:
            if theta is None:
                raise ConfigurationError("delta_values needs theta or a precomputed embedding")
            embedding = self.fingerprint(theta, params)
        obs = np.asarray(obs)
        if obs.ndim == 1:
            x = np.concatenate([obs, embedding])
        else:
            x = np.concatenate(
                [obs, np.broadcast_to(embedding, (obs.shape[0], embedding.size))], axis=1
            )
        return mlp_forward_values(self.mlp_spec, self.mlp_params(params), x)

    def exploration_rewards(self, theta: np.ndarray, batch: TransitionBatch) -> np.ndarray:
        """|TD error| of the exploitation estimate under snapshot theta.

        Terminal transitions drop the bootstrap term; the snapshot itself
        supplies both sides (no target network involved).
        """
        n = len(batch)
        q_both = q_forward(self.exploit_spec, theta, np.concatenate([batch.s, batch.s_next]))
        q_s, q_next = q_both[:n], q_both[n:]
        bootstrap = self.reward_gamma * q_next.max(axis=1) * (~batch.terminated)
        return np.abs(batch.r + bootstrap - q_s[np.arange(n), batch.a])

    def exploration_reward(self, theta: np.ndarray, t: Transition) -> float:
        batch = TransitionBatch.from_transitions([t], dtype=self.omega.dtype)
        return float(self.exploration_rewards(theta, batch)[0])

    def max_update_target(self, t: Transition, theta: np.ndarray, r_delta: float) -> float:
        """Bootstrap target for one transition: max(r_delta, gamma * next value).

        Double-Q decoupling over the *whole* parameter vectors: the online
        network (online probes included) picks the next action, the target
        network (its own probe copies included) evaluates it.
        """
        if r_delta < 0:
            raise ConfigurationError(f"r_delta must be non-negative, got {r_delta}")
        if t.terminated:
            return float(r_delta)
        next_online = self.delta_values(t.s_next, theta=theta)
        next_target = self.delta_values(t.s_next, theta=theta, params=self.omega_target)
        a_star = int(np.argmax(next_online))
        bootstrap = self.gamma_delta * float(next_target[a_star])
        if self.use_max_update:
            return max(float(r_delta), bootstrap)
        return float(r_delta) + bootstrap

    def update(self, batch: TransitionBatch, snapshots: list[np.ndarray]) -> float:
        """One gradient step on the cross product of transitions and snapshots.

        Snapshot draws repeat (the parameter buffer is tiny), so work is
        grouped by distinct snapshot and weighted by multiplicity; the
        result is the exact mean over all ``len(batch) * len(snapshots)``
        pairs. Gradients flow into the MLP parameters and, through the
        exploitation net evaluated at the probe states, into the probe
        bank. Snapshots are never written to.
        """
        if len(batch) == 0 or not snapshots:
            raise RuntimeError("exploration update needs transitions and snapshots")
        n_pairs = len(batch) * len(snapshots)
        groups: dict[int, list] = {}
        for theta in snapshots:
            entry = groups.setdefault(id(theta), [theta, 0])
            entry[1] += 1
        group_list = list(groups.values())

        mlp_w = self.mlp_params()
        mlp_w_target = self.mlp_params(self.omega_target)
        probe_mat = self.probes()
        target_probe_mat = self.probes(self.omega_target)
        n_batch = len(batch)
        n_groups = len(group_list)

        # per-snapshot quantities: embeddings (one per parameter vector,
        # since the probe bank is part of it) and exploitation TD errors
        embeddings = np.empty((n_groups, self.embedding_dim), dtype=self.omega.dtype)
        target_embeddings = np.empty_like(embeddings)
        r_delta = np.empty((n_groups, n_batch), dtype=self.omega.dtype)
        probe_traces = []
        for gi, (theta, _) in enumerate(group_list):
            q_probe, probe_trace = q_forward_trace(self.exploit_spec, theta, probe_mat)
            probe_traces.append(probe_trace)
            embeddings[gi] = q_probe.ravel()
            target_embeddings[gi] = q_forward(self.exploit_spec, theta, target_probe_mat).ravel()
            r_delta[gi] = self.exploration_rewards(theta, batch)

        # all (snapshot, transition) rows stacked group-major
        emb_rows = np.repeat(embeddings, n_batch, axis=0)
        s_next_rows = np.tile(batch.s_next, (n_groups, 1))
        x_s = np.concatenate([np.tile(batch.s, (n_groups, 1)), emb_rows], axis=1)
        x_next = np.concatenate([s_next_rows, emb_rows], axis=1)
        x_next_target = np.concatenate(
            [s_next_rows, np.repeat(target_embeddings, n_batch, axis=0)], axis=1
        )
        actions = np.tile(batch.a, n_groups)
        terminated = np.tile(batch.terminated, n_groups)
        rows = np.arange(n_groups * n_batch)

        next_online = mlp_forward_values(self.mlp_spec, mlp_w, x_next)
        next_target = mlp_forward_values(self.mlp_spec, mlp_w_target, x_next_target)
        a_star = np.argmax(next_online, axis=1)
        bootstrap = self.gamma_delta * next_target[rows, a_star]
        flat_r = r_delta.ravel()
        if self.use_max_update:
            targets = np.where(terminated, flat_r, np.maximum(flat_r, bootstrap))
        else:
            targets = np.where(terminated, flat_r, flat_r + bootstrap)

        pred, trace = mlp_forward(self.mlp_spec, mlp_w, x_s)
        err = pred[rows, actions] - targets
        multiplicity = np.repeat([m for _, m in group_list], n_batch)
        total_sq_err = float(np.sum(multiplicity * err.astype(np.float64) ** 2))
        loss = total_sq_err / n_pairs
        if not np.isfinite(loss):
            raise DivergenceError("non-finite exploration loss", step=self.adam.step_count + 1)

        out_grad = np.zeros_like(pred)
        out_grad[rows, actions] = 2.0 * err * (multiplicity / n_pairs)
        mlp_grads, g_input = mlp_backward(self.mlp_spec, mlp_w, trace, out_grad)
        probe_grads = np.zeros((self.probe_count, self.obs_dim), dtype=self.omega.dtype)
        for gi, (theta, _) in enumerate(group_list):
            g_embedding = g_input[gi * n_batch : (gi + 1) * n_batch, self.obs_dim :].sum(axis=0)
            _, g_probe = q_backward(
                self.exploit_spec,
                theta,
                probe_traces[gi],
                g_embedding.reshape(self.probe_count, self.action_count),
                need_param_grad=False,  # theta is constant input data here
            )
            probe_grads += g_probe

        grads = np.concatenate([probe_grads.ravel(), mlp_grads])
        np.clip(grads, -self.clip_value, self.clip_value, out=grads)
        adam_step_inplace(self.adam, self.omega, grads)
        return loss

    def delta_values_with_grad(
        self, obs, theta: np.ndarray, out_grad: np.ndarray, params: np.ndarray | None = None
    ) -> tuple[np.ndarray, np.ndarray]:
        """Values plus d(sum(values * out_grad))/d(omega), probe path included.

        Gradient-verification hook: exposes the exact backward pass through
        the MLP and the probe bank for a single observation.
        """
        omega = self.omega if params is None else params
        probe_mat = self.probes(omega)
        q_probe, probe_trace = q_forward_trace(self.exploit_spec, theta, probe_mat)
        embedding = q_probe.ravel()
        x = np.concatenate([np.asarray(obs), embedding])
        out, trace = mlp_forward(self.mlp_spec, self.mlp_params(omega), x)
        g_mlp, g_input = mlp_backward(self.mlp_spec, self.mlp_params(omega), trace, out_grad)
        g_embedding = g_input[self.obs_dim :]
        _, g_probe = q_backward(
            self.exploit_spec,
            theta,
            probe_trace,
            g_embedding.reshape(self.probe_count, self.action_count),
        )
        return out, np.concatenate([np.asarray(g_probe).ravel(), g_mlp])

    def soft_target_update(self) -> None:
        self.omega_target = polyak_update(self.omega_target, self.omega, self.tau)

    def save(self, path, extra_metadata: dict | None = None) -> None:
        meta = {
            "kind": "exploration",
            "obs_dim": self.obs_dim,
            "action_count": self.action_count,
            "hidden_dims": list(self.hidden),
            "probe_count": self.probe_count,
            "probe_offset": 0,
            "probe_param_count": self.probe_param_count,
            "exploit_hidden_dims": list(self.exploit_spec.hidden_dims),
            "gamma_delta": self.gamma_delta,
            "reward_gamma": self.reward_gamma,
        }
        if extra_metadata:
            meta.update(extra_metadata)
        persist.save_params(path, self.omega, meta)

    @classmethod
    def load(cls, path, exploit_spec: MlpSpec, **overrides) -> "ExplorationAgent":
        params, meta = persist.load_params(path)
        agent = cls(
            obs_dim=meta["obs_dim"],
            action_count=meta["action_count"],
            exploit_spec=exploit_spec,
            probe_count=meta["probe_count"],
            hidden=tuple(meta["hidden_dims"]),
            gamma_delta=meta.get("gamma_delta", 0.9724),
            reward_gamma=meta.get("reward_gamma", 0.99),
            dtype=params.dtype,
            **overrides,
        )
        agent.omega = params
        agent.omega_target = params.copy()
        agent.loaded_metadata = meta
        return agent

"""Training orchestration.

One run is: a warm-up phase of uniformly random actions that prefills the
transition buffer, then a repeating cycle of

    1. ``update_frequency`` environment interactions under the behavior
       policy (a deterministic blend of both value heads, or epsilon-greedy
       for the baseline),
    2. ``update_frequency`` exploitation gradient steps,
    3. one push of the exploitation parameters into the parameter buffer,
    4. ``update_frequency`` exploration gradient steps (blend variant only),
    5. one polyak step per target network with its per-update tau,

interleaved with a greedy evaluation every ``eval_interval`` total steps.
Warm-up steps count toward the total-step budget and the evaluation
schedule. Everything is driven by named RNG streams derived from the run
seed, so a config reproduces its metrics stream bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .envs import env_spec, make_env
from .errors import ConfigurationError
from .exploit import ExploitationAgent
from .explore import ExplorationAgent
from .replay import ParameterBuffer, TransitionBuffer

ALGORITHMS = ("see", "eps_greedy")
ABLATIONS = ("none", "no_conditioning", "no_max_update", "no_mixing")

# RNG stream ids; a stream's generator is seeded with (seed, stream, *extra).
STREAM_EXPLOIT_INIT = 0
STREAM_EXPLORE_INIT = 1
STREAM_TRANSITION_BUFFER = 2
STREAM_PARAMETER_BUFFER = 3
STREAM_ACTIONS = 4
STREAM_TRAIN_ENV = 5
STREAM_EVAL_ENV = 6


def stream_rng(seed: int, stream: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), *map(int, extra)]))


@dataclass
class RunConfig:
    """Fully resolved hyperparameters for one run."""

    env: str
    algorithm: str
    total_steps: int
    warm_up_steps: int
    update_frequency: int
    batch_size: int
    replay_buffer_size: int
    discount: float
    seed: int = 0
    ablation: str = "none"
    hidden_layer_sizes: tuple[int, ...] = (256, 256)
    gradient_clip_value: float = 10.0
    eval_interval: int = 2000
    eval_episodes: int = 10
    out_dir: str | None = None
    # baseline (eps_greedy)
    learning_rate: float | None = None
    epsilon_start: float = 1.0
    epsilon_end: float | None = None
    epsilon_decay_steps: int | None = None
    tau_per_update: float | None = None
    # blend (see)
    exploitation_learning_rate: float | None = None
    exploration_learning_rate: float | None = None
    exploration_discount: float | None = None
    mixture_factor: float | None = None
    value_function_replay_buffer_size: int | None = None
    value_function_batch_size: int | None = None
    exploration_transition_batch_size: int | None = None
    probe_count: int | None = None
    exploitation_tau_per_update: float | None = None
    exploration_tau_per_update: float | None = None

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}")
        if self.ablation not in ABLATIONS:
            raise ConfigurationError(f"unknown ablation {self.ablation!r}")
        if self.ablation != "none" and self.algorithm != "see":
            raise ConfigurationError("ablations only apply to the see algorithm")
        env_spec(self.env)
        positives = {
            "total_steps": self.total_steps,
            "update_frequency": self.update_frequency,
            "batch_size": self.batch_size,
            "replay_buffer_size": self.replay_buffer_size,
            "eval_interval": self.eval_interval,
            "eval_episodes": self.eval_episodes,
        }
        for name, value in positives.items():
            if value is None or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value}")
        if self.warm_up_steps < 0:
            raise ConfigurationError(f"warm_up_steps must be >= 0, got {self.warm_up_steps}")
        if not 0.0 <= self.discount < 1.0:
            raise ConfigurationError(f"discount must lie in [0, 1), got {self.discount}")
        if self.algorithm == "eps_greedy":
            needed = {
                "learning_rate": self.learning_rate,
                "epsilon_end": self.epsilon_end,
                "epsilon_decay_steps": self.epsilon_decay_steps,
                "tau_per_update": self.tau_per_update,
            }
        else:
            needed = {
                "exploitation_learning_rate": self.exploitation_learning_rate,
                "exploration_learning_rate": self.exploration_learning_rate,
                "exploration_discount": self.exploration_discount,
                "mixture_factor": self.mixture_factor,
                "value_function_replay_buffer_size": self.value_function_replay_buffer_size,
                "value_function_batch_size": self.value_function_batch_size,
                "exploration_transition_batch_size": self.exploration_transition_batch_size,
                "probe_count": self.probe_count,
                "exploitation_tau_per_update": self.exploitation_tau_per_update,
                "exploration_tau_per_update": self.exploration_tau_per_update,
            }
        missing = [k for k, v in needed.items() if v is None]
        if missing:
            raise ConfigurationError(
                f"{self.algorithm} config is missing {', '.join(missing)}"
            )
        if self.algorithm == "see":
            if not 0.0 <= self.mixture_factor <= 1.0:
                raise ConfigurationError(
                    f"mixture_factor must lie in [0, 1], got {self.mixture_factor}"
                )
            for name in ("value_function_replay_buffer_size", "value_function_batch_size",
                         "exploration_transition_batch_size", "probe_count"):
                if getattr(self, name) < 1:
                    raise ConfigurationError(f"{name} must be a positive integer")
        else:
            if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
                raise ConfigurationError(
                    "epsilon schedule must satisfy 0 <= epsilon_end <= epsilon_start <= 1"
                )
            if self.epsilon_decay_steps < 0:
                raise ConfigurationError("epsilon_decay_steps must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden_layer_sizes"] = list(self.hidden_layer_sizes)
        return d


@dataclass
class MetricsRecord:
    step: int
    kind: str  # train_episode | evaluation | loss
    values: dict[str, float] = field(default_factory=dict)


@dataclass
class TrainResult:
    config: RunConfig
    records: list[MetricsRecord]
    exploit: ExploitationAgent
    explore: ExplorationAgent | None


def epsilon_at(step: int, config: RunConfig) -> float:
    """Linear decay from epsilon_start to epsilon_end, then constant."""
    if config.epsilon_decay_steps <= 0 or step >= config.epsilon_decay_steps:
        return config.epsilon_end
    frac = step / config.epsilon_decay_steps
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac


def eps_greedy_action(
    exploit: ExploitationAgent, obs, epsilon: float, rng: np.random.Generator
) -> int:
    if not 0.0 <= epsilon <= 1.0:
        raise ConfigurationError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(exploit.action_count))
    return exploit.greedy_action(obs)


def behavior_action(
    exploit: ExploitationAgent,
    explore: ExplorationAgent,
    obs,
    theta: np.ndarray,
    mixture: float,
    embedding: np.ndarray | None = None,
) -> int:
    """Deterministic blended action: argmax of (1-l)*Q + l*Delta.

    Conditioning uses the live exploitation parameters ``theta``;
    ``embedding`` may carry their precomputed fingerprint. Ties resolve
    to the lowest action index. No randomness is consumed.
    """
    if not 0.0 <= mixture <= 1.0:
        raise ConfigurationError(f"mixture must lie in [0, 1], got {mixture}")
    q = exploit.q_values(obs, theta)
    delta = explore.delta_values(obs, theta=theta, embedding=embedding)
    return int(np.argmax((1.0 - mixture) * q + mixture * delta))


def select_training_action(
    config: RunConfig,
    exploit: ExploitationAgent,
    explore: ExplorationAgent | None,
    obs,
    step: int,
    episode_index: int,
    embedding: np.ndarray | None,
    action_rng: np.random.Generator,
) -> int:
    """Post-warm-up action choice for one training step, per config variant."""
    if config.algorithm != "see":
        return eps_greedy_action(exploit, obs, epsilon_at(step, config), action_rng)
    if config.ablation == "no_mixing":
        # whole episodes alternate: even episodes exploit-greedy, odd explore-greedy
        if episode_index % 2 == 0:
            return exploit.greedy_action(obs)
        return int(np.argmax(explore.delta_values(obs, theta=exploit.theta, embedding=embedding)))
    return behavior_action(
        exploit, explore, obs, exploit.theta, config.mixture_factor, embedding=embedding
    )


def evaluate(
    exploit: ExploitationAgent,
    env_name: str,
    episodes: int = 10,
    seed: int = 0,
    eval_index: int = 0,
) -> tuple[float, list[float]]:
    """Greedy-only rollouts on fresh env instances; returns (mean, per-episode)."""
    if episodes < 1:
        raise ConfigurationError(f"episodes must be >= 1, got {episodes}")
    returns = []
    for ep in range(episodes):
        env = make_env(env_name)
        obs = env.reset(np.random.SeedSequence([seed, STREAM_EVAL_ENV, eval_index, ep]))
        total = 0.0
        while True:
            res = env.step(exploit.greedy_action(obs.astype(np.float32)))
            total += res.reward
            if res.done:
                break
            obs = res.observation
        returns.append(total)
    return float(np.mean(returns)), returns


def train(config: RunConfig) -> TrainResult:
    """Run one experiment; returns the metrics stream and the trained agents."""
    config.validate()
    spec = env_spec(config.env)
    see = config.algorithm == "see"

    exploit = ExploitationAgent(
        spec.obs_dim,
        spec.action_count,
        hidden=config.hidden_layer_sizes,
        gamma=config.discount,
        lr=config.learning_rate if not see else config.exploitation_learning_rate,
        tau=config.tau_per_update if not see else config.exploitation_tau_per_update,
        clip_value=config.gradient_clip_value,
        rng=stream_rng(config.seed, STREAM_EXPLOIT_INIT),
    )
    explore = None
    param_buffer = None
    if see:
        explore = ExplorationAgent(
            spec.obs_dim,
            spec.action_count,
            exploit_spec=exploit.spec,
            probe_count=config.probe_count,
            hidden=config.hidden_layer_sizes,
            gamma_delta=config.exploration_discount,
            reward_gamma=config.discount,
            lr=config.exploration_learning_rate,
            tau=config.exploration_tau_per_update,
            clip_value=config.gradient_clip_value,
            use_max_update=config.ablation != "no_max_update",
            rng=stream_rng(config.seed, STREAM_EXPLORE_INIT),
        )
        if config.ablation != "no_conditioning":
            param_buffer = ParameterBuffer(
                config.value_function_replay_buffer_size,
                rng=stream_rng(config.seed, STREAM_PARAMETER_BUFFER),
            )

    buffer = TransitionBuffer(
        config.replay_buffer_size, spec.obs_dim, rng=stream_rng(config.seed, STREAM_TRANSITION_BUFFER)
    )
    action_rng = stream_rng(config.seed, STREAM_ACTIONS)

    records: list[MetricsRecord] = []
    env = make_env(config.env)
    episode_index = 0
    episode_return = 0.0
    episode_length = 0
    obs = env.reset(np.random.SeedSequence([config.seed, STREAM_TRAIN_ENV, episode_index])).astype(
        np.float32
    )
    step = 0
    embedding = explore.fingerprint(exploit.theta) if see else None

    def maybe_evaluate() -> None:
        if step % config.eval_interval == 0:
            mean, _ = evaluate(
                exploit,
                config.env,
                episodes=config.eval_episodes,
                seed=config.seed,
                eval_index=step // config.eval_interval,
            )
            records.append(MetricsRecord(step, "evaluation", {"eval_return_mean": mean}))

    def env_step(action: int) -> None:
        nonlocal obs, episode_index, episode_return, episode_length, step
        res = env.step(action)
        next_obs = res.observation.astype(np.float32)
        buffer.push(obs, action, res.reward, next_obs, res.terminated, res.truncated)
        episode_return += res.reward
        episode_length += 1
        step += 1
        if res.done:
            records.append(
                MetricsRecord(
                    step,
                    "train_episode",
                    {
                        "train_episode_return": episode_return,
                        "train_episode_length": float(episode_length),
                    },
                )
            )
            episode_index += 1
            episode_return = 0.0
            episode_length = 0
            obs = env.reset(
                np.random.SeedSequence([config.seed, STREAM_TRAIN_ENV, episode_index])
            ).astype(np.float32)
        else:
            obs = next_obs
        maybe_evaluate()

    # phase 1: warm-up with uniform random actions
    while step < min(config.warm_up_steps, config.total_steps):
        env_step(int(action_rng.integers(spec.action_count)))

    # phase 2: interaction/update cycles
    while step < config.total_steps:
        block = min(config.update_frequency, config.total_steps - step)
        for _ in range(block):
            env_step(
                select_training_action(
                    config, exploit, explore, obs, step, episode_index, embedding, action_rng
                )
            )
        exploit_losses = [
            exploit.update(buffer.sample(config.batch_size)) for _ in range(block)
        ]
        block_values = {"exploit_loss": float(np.mean(exploit_losses))}
        if see:
            if param_buffer is not None:
                param_buffer.push(exploit.snapshot())
            explore_losses = []
            for _ in range(block):
                transitions = buffer.sample(config.exploration_transition_batch_size)
                if param_buffer is not None:
                    snapshots = param_buffer.sample(config.value_function_batch_size)
                else:
                    snapshots = [exploit.theta]  # no_conditioning: live parameters
                explore_losses.append(explore.update(transitions, snapshots))
            block_values["explore_loss"] = float(np.mean(explore_losses))
        exploit.soft_target_update()
        if see:
            explore.soft_target_update()
            embedding = explore.fingerprint(exploit.theta)
        records.append(MetricsRecord(step, "loss", block_values))

    return TrainResult(config=config, records=records, exploit=exploit, explore=explore)

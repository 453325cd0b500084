"""Error-seeking exploration for deep Q-learning, in plain numpy.

A dueling double DQN (the exploitation objective) is paired with a second
value network trained to predict and seek out the exploitation network's
absolute TD error. The exploration network is conditioned on the
exploitation parameters through a learnable probe-state fingerprint, uses a
max-reward Bellman recursion so its values are insensitive to episode
length, and both heads blend into one deterministic behavior policy.
"""

from .envs import EnvSpec, StepResult, env_spec, make_env
from .errors import ConfigurationError, DivergenceError
from .exploit import ExploitationAgent
from .explore import ExplorationAgent
from .nets import (
    AdamState,
    ForwardTrace,
    MlpSpec,
    adam_step,
    clip_gradients,
    dueling_combine,
    init_params,
    mlp_backward,
    mlp_forward,
    polyak_update,
)
from .replay import ParameterBuffer, Transition, TransitionBatch, TransitionBuffer
from .trainer import (
    MetricsRecord,
    RunConfig,
    TrainResult,
    behavior_action,
    epsilon_at,
    eps_greedy_action,
    evaluate,
    train,
)
from .config import (
    exploration_batch_split,
    load_config,
    normalized_score,
    resolve_config,
    tau_from_per_timestep,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "ConfigurationError",
    "DivergenceError",
    "EnvSpec",
    "ExploitationAgent",
    "ExplorationAgent",
    "ForwardTrace",
    "MetricsRecord",
    "MlpSpec",
    "ParameterBuffer",
    "RunConfig",
    "StepResult",
    "TrainResult",
    "Transition",
    "TransitionBatch",
    "TransitionBuffer",
    "adam_step",
    "behavior_action",
    "clip_gradients",
    "dueling_combine",
    "env_spec",
    "epsilon_at",
    "eps_greedy_action",
    "evaluate",
    "exploration_batch_split",
    "init_params",
    "load_config",
    "make_env",
    "mlp_backward",
    "mlp_forward",
    "normalized_score",
    "polyak_update",
    "resolve_config",
    "tau_from_per_timestep",
    "train",
]

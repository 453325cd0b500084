"""Config files and the derivation formulas they may use.

Config files are flat JSON documents mirroring RunConfig keys. Two kinds
of derived values are supported:

* Target-network rate: each network's tau may be given directly
  (``*tau_per_update``) or as a per-timestep rate (``*tau_per_timestep``)
  that is compounded over the update frequency. Exactly one form per
  network is accepted.
* Exploration transition batch: given directly, or derived as
  ``batch_size / value_function_batch_size`` (must divide exactly), which
  keeps the effective cross-product batch equal to the regular batch size.
"""

from __future__ import annotations

import json
import logging

from .errors import ConfigurationError
from .trainer import RunConfig

log = logging.getLogger(__name__)

# Linear maps sending each environment's solved-level return to 100.
SCORE_WEIGHTS = {
    "sparse_mountaincar": 100.0,
    "cartpole": 0.2,
    "planar_lander": 0.5,
}


def tau_from_per_timestep(tau_per_timestep: float, update_frequency: int) -> float:
    """tau = 1 - (1 - tau_per_timestep) ** update_frequency."""
    if not 0.0 <= tau_per_timestep < 1.0:
        raise ConfigurationError(
            f"tau_per_timestep must lie in [0, 1), got {tau_per_timestep}"
        )
    if update_frequency < 1:
        raise ConfigurationError(
            f"update_frequency must be a positive integer, got {update_frequency}"
        )
    return 1.0 - (1.0 - tau_per_timestep) ** update_frequency


def exploration_batch_split(total_batch: int, value_function_batch: int) -> int:
    """Transitions per exploration update so that B_t * B_theta = total_batch."""
    if total_batch < 1 or value_function_batch < 1:
        raise ConfigurationError("batch sizes must be positive")
    if total_batch % value_function_batch != 0:
        raise ConfigurationError(
            f"value_function_batch_size {value_function_batch} does not divide "
            f"batch_size {total_batch}"
        )
    return total_batch // value_function_batch


def normalized_score(env_name: str, mean_return: float) -> float:
    """Scale a mean return so the documented solved return maps to 100."""
    try:
        return SCORE_WEIGHTS[env_name] * mean_return
    except KeyError:
        raise ConfigurationError(
            f"no score normalization for environment {env_name!r}"
        ) from None


def _resolve_tau(raw: dict, prefix: str, update_frequency: int) -> float:
    direct_key = f"{prefix}tau_per_update"
    derived_key = f"{prefix}tau_per_timestep"
    direct = raw.pop(direct_key, None)
    per_step = raw.pop(derived_key, None)
    if (direct is None) == (per_step is None):
        raise ConfigurationError(
            f"specify exactly one of {direct_key!r} or {derived_key!r}"
        )
    if direct is not None:
        return float(direct)
    tau = tau_from_per_timestep(float(per_step), update_frequency)
    log.info("derived %s=%.6f from %s=%s", direct_key, tau, derived_key, per_step)
    return tau


def resolve_config(raw: dict, seed: int | None = None, out_dir: str | None = None) -> RunConfig:
    """Turn a raw config document into a validated RunConfig."""
    raw = dict(raw)
    algorithm = raw.get("algorithm")
    if algorithm not in ("see", "eps_greedy"):
        raise ConfigurationError(f"config needs algorithm 'see' or 'eps_greedy', got {algorithm!r}")
    if seed is not None:
        raw["seed"] = int(seed)
    if out_dir is not None:
        raw["out_dir"] = str(out_dir)

    update_frequency = raw.get("update_frequency")
    if update_frequency is None:
        raise ConfigurationError("config needs update_frequency")

    if algorithm == "eps_greedy":
        raw["tau_per_update"] = _resolve_tau(raw, "", update_frequency)
    else:
        raw["exploitation_tau_per_update"] = _resolve_tau(raw, "exploitation_", update_frequency)
        raw["exploration_tau_per_update"] = _resolve_tau(raw, "exploration_", update_frequency)
        if raw.get("exploration_transition_batch_size") is None:
            vf_batch = raw.get("value_function_batch_size")
            batch = raw.get("batch_size")
            if vf_batch is None or batch is None:
                raise ConfigurationError(
                    "see config needs exploration_transition_batch_size or "
                    "batch_size + value_function_batch_size to derive it"
                )
            raw["exploration_transition_batch_size"] = exploration_batch_split(batch, vf_batch)
            log.info(
                "derived exploration_transition_batch_size=%d from batch_size/value_function_batch_size",
                raw["exploration_transition_batch_size"],
            )

    if "hidden_layer_sizes" in raw:
        raw["hidden_layer_sizes"] = tuple(raw["hidden_layer_sizes"])
    known = set(RunConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    try:
        config = RunConfig(**raw)
    except TypeError as exc:
        raise ConfigurationError(f"incomplete config: {exc}") from None
    config.validate()
    return config


def load_config(path) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from None


def resolved_to_dict(config: RunConfig) -> dict:
    """Sidecar form: resolving it again reproduces the same RunConfig."""
    d = config.to_dict()
    return {k: v for k, v in d.items() if v is not None}

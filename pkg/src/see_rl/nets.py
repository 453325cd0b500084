"""Feedforward network core.

Plain-numpy machinery for the fixed MLP topologies the agents need:
forward evaluation, exact backpropagation (with respect to parameters
*and* inputs), Adam, elementwise gradient clipping, polyak averaging for
target networks, and the dueling value/advantage combination.

Every network's parameters live in one flat vector, laid out layer-major
with each layer's weight matrix (row-major, shape ``out x in``) followed by
its bias. The layout is fixed so snapshots are portable and diffable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError

Array = np.ndarray


@dataclass(frozen=True)
class MlpSpec:
    """Shape of a fully connected ReLU network.

    Hidden layers use ReLU; the output layer is linear. ``activation`` is
    kept explicit so the wire format stays honest about what was trained.
    """

    input_dim: int
    hidden_dims: tuple[int, ...]
    output_dim: int
    activation: str = "relu"

    def __post_init__(self):
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        if any(int(d) < 1 for d in dims):
            raise ConfigurationError(f"all layer dimensions must be >= 1, got {dims}")
        if self.activation != "relu":
            raise ConfigurationError(f"unsupported activation {self.activation!r}")
        object.__setattr__(self, "hidden_dims", tuple(int(d) for d in self.hidden_dims))

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        """Per-layer (fan_in, fan_out) pairs, input to output."""
        dims = (self.input_dim, *self.hidden_dims, self.output_dim)
        return [(dims[i], dims[i + 1]) for i in range(len(dims) - 1)]

    @property
    def param_count(self) -> int:
        return sum(dout * (din + 1) for din, dout in self.layer_dims)


@dataclass
class ForwardTrace:
    """Cached per-layer inputs and pre-activations for exact backprop."""

    inputs: list[Array] = field(default_factory=list)
    pre_activations: list[Array] = field(default_factory=list)
    squeezed: bool = False


def init_params(spec: MlpSpec, rng: np.random.Generator, dtype=np.float32) -> Array:
    """Fresh parameter vector: W ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)], b = 0."""
    chunks = []
    for din, dout in spec.layer_dims:
        bound = 1.0 / np.sqrt(din)
        chunks.append(rng.uniform(-bound, bound, size=dout * din))
        chunks.append(np.zeros(dout))
    return np.concatenate(chunks).astype(dtype)


def _layers(spec: MlpSpec, params: Array):
    """Yield (W, b) views into the flat parameter vector."""
    off = 0
    for din, dout in spec.layer_dims:
        w = params[off : off + dout * din].reshape(dout, din)
        off += dout * din
        b = params[off : off + dout]
        off += dout
        yield w, b


def mlp_forward(spec: MlpSpec, params: Array, x: Array) -> tuple[Array, ForwardTrace]:
    """Evaluate the network; returns output and a trace for backprop.

    ``x`` may be a single vector or a ``(batch, input_dim)`` matrix; the
    output matches. Same parameters and input give bit-identical output.
    """
    params = np.asarray(params)
    if params.shape != (spec.param_count,):
        raise ConfigurationError(
            f"parameter vector has length {params.shape}, spec needs {spec.param_count}"
        )
    x = np.asarray(x, dtype=params.dtype)
    squeezed = x.ndim == 1
    h = x.reshape(1, -1) if squeezed else x
    if h.ndim != 2 or h.shape[1] != spec.input_dim:
        raise ConfigurationError(
            f"input has shape {x.shape}, spec needs input_dim {spec.input_dim}"
        )
    trace = ForwardTrace(squeezed=squeezed)
    n_layers = len(spec.layer_dims)
    for i, (w, b) in enumerate(_layers(spec, params)):
        trace.inputs.append(h)
        z = h @ w.T + b
        trace.pre_activations.append(z)
        h = np.maximum(z, 0.0) if i < n_layers - 1 else z
    return (h[0] if squeezed else h), trace


def mlp_forward_values(spec: MlpSpec, params: Array, x: Array) -> Array:
    """Forward pass without a backprop trace.

    Identical arithmetic to ``mlp_forward`` (activations applied in place
    on the layer outputs), for the many call sites that never backprop.
    """
    params = np.asarray(params)
    if params.shape != (spec.param_count,):
        raise ConfigurationError(
            f"parameter vector has length {params.shape}, spec needs {spec.param_count}"
        )
    x = np.asarray(x, dtype=params.dtype)
    squeezed = x.ndim == 1
    h = x.reshape(1, -1) if squeezed else x
    if h.ndim != 2 or h.shape[1] != spec.input_dim:
        raise ConfigurationError(
            f"input has shape {x.shape}, spec needs input_dim {spec.input_dim}"
        )
    n_layers = len(spec.layer_dims)
    for i, (w, b) in enumerate(_layers(spec, params)):
        z = h @ w.T
        z += b
        if i < n_layers - 1:
            np.maximum(z, 0.0, out=z)
        h = z
    return h[0] if squeezed else h


def mlp_backward(
    spec: MlpSpec,
    params: Array,
    trace: ForwardTrace,
    output_grad: Array,
    need_param_grad: bool = True,
) -> tuple[Array | None, Array]:
    """Exact gradients of ``sum(output * output_grad)`` via the chain rule.

    Returns ``(param_grad, input_grad)`` where ``param_grad`` follows the
    flat layout and ``input_grad`` has the shape of the forward input.
    ReLU uses subgradient 0 at the kink. With ``need_param_grad=False``
    only the input gradient is computed (param_grad is None).
    """
    params = np.asarray(params)
    dims = spec.layer_dims
    if len(trace.inputs) != len(dims) or len(trace.pre_activations) != len(dims):
        raise RuntimeError("forward trace does not match the network spec")
    g = np.asarray(output_grad, dtype=params.dtype)
    if trace.squeezed and g.ndim == 1:
        g = g.reshape(1, -1)
    if g.shape != trace.pre_activations[-1].shape:
        raise RuntimeError(
            f"output_grad shape {output_grad.shape} does not match trace output "
            f"{trace.pre_activations[-1].shape}"
        )

    param_grad = np.empty_like(params) if need_param_grad else None
    # Slice boundaries per layer, front to back.
    bounds = []
    off = 0
    for din, dout in dims:
        bounds.append((off, off + dout * din, off + dout * din + dout))
        off += dout * (din + 1)

    weights = [w for w, _ in _layers(spec, params)]
    for i in reversed(range(len(dims))):
        din, dout = dims[i]
        x_i = trace.inputs[i]
        if x_i.shape[1] != din:
            raise RuntimeError("forward trace does not match the network spec")
        if need_param_grad:
            w_start, b_start, end = bounds[i]
            param_grad[w_start:b_start] = (g.T @ x_i).ravel()
            param_grad[b_start:end] = g.sum(axis=0)
        g = g @ weights[i]
        if i > 0:
            g = g * (trace.pre_activations[i - 1] > 0)
    input_grad = g[0] if trace.squeezed else g
    return param_grad, input_grad


@dataclass
class AdamState:
    """Optimizer state for one flat parameter vector."""

    first_moment: Array
    second_moment: Array
    step_count: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    _scratch_a: Array | None = None
    _scratch_b: Array | None = None

    @classmethod
    def fresh(cls, param_count: int, lr: float, dtype=np.float32) -> "AdamState":
        return cls(
            first_moment=np.zeros(param_count, dtype=dtype),
            second_moment=np.zeros(param_count, dtype=dtype),
            step_count=0,
            lr=lr,
        )


def adam_step_inplace(state: AdamState, params: Array, grads: Array) -> None:
    """One Adam update with bias correction, written into the given buffers.

    Every operation is elementwise, so updating the state's moment arrays
    and ``params`` in place is exact. ``state.step_count`` is advanced.
    This is the single implementation of the recurrence; ``adam_step`` is
    its pure wrapper. State-owned scratch buffers keep the hot path free
    of allocations.
    """
    if grads.shape != params.shape:
        raise ConfigurationError(
            f"gradient shape {grads.shape} does not match parameters {params.shape}"
        )
    if not np.all(np.isfinite(grads)):
        raise DivergenceError("non-finite gradient", step=state.step_count + 1)
    if state._scratch_a is None or state._scratch_a.shape != params.shape:
        state._scratch_a = np.empty_like(state.first_moment)
        state._scratch_b = np.empty_like(state.first_moment)
    s1, s2 = state._scratch_a, state._scratch_b
    t = state.step_count + 1
    m, v = state.first_moment, state.second_moment
    np.multiply(grads, grads, out=s1)
    np.multiply(s1, 1.0 - state.beta2, out=s1)
    v *= state.beta2
    v += s1
    np.multiply(grads, 1.0 - state.beta1, out=s2)
    m *= state.beta1
    m += s2
    # params -= lr * (m / bc1) / (sqrt(v / bc2) + eps)
    np.divide(v, 1.0 - state.beta2**t, out=s1)
    np.sqrt(s1, out=s1)
    s1 += state.eps
    np.divide(m, s1, out=s2)
    np.multiply(s2, state.lr / (1.0 - state.beta1**t), out=s2)
    params -= s2
    state.step_count = t


def adam_step(state: AdamState, params: Array, grads: Array) -> tuple[Array, AdamState]:
    """One Adam update with bias correction. Pure: returns new values."""
    grads = np.asarray(grads)
    new_state = AdamState(
        first_moment=state.first_moment.copy(),
        second_moment=state.second_moment.copy(),
        step_count=state.step_count,
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
    new_params = np.array(params, copy=True)
    adam_step_inplace(new_state, new_params, grads)
    return new_params, new_state


def clip_gradients(grads: Array, clip_value: float) -> Array:
    """Elementwise clamp to [-clip_value, +clip_value]."""
    if clip_value <= 0:
        raise ConfigurationError(f"clip_value must be positive, got {clip_value}")
    return np.clip(grads, -clip_value, clip_value)


def polyak_update(target: Array, online: Array, tau: float) -> Array:
    """target' = (1 - tau) * target + tau * online, elementwise."""
    if not 0.0 <= tau <= 1.0:
        raise ConfigurationError(f"tau must lie in [0, 1], got {tau}")
    target = np.asarray(target)
    online = np.asarray(online)
    if target.shape != online.shape:
        raise ConfigurationError(
            f"target shape {target.shape} does not match online {online.shape}"
        )
    return (1.0 - tau) * target + tau * online


def dueling_combine(value, advantages) -> Array:
    """q[a] = value + advantages[a] - mean(advantages).

    Accepts a scalar value with a 1-D advantage vector, or column/row
    batches of each.
    """
    adv = np.asarray(advantages)
    if adv.size == 0:
        raise ConfigurationError("advantages must be non-empty")
    if adv.ndim == 1:
        return value + adv - adv.mean()
    val = np.asarray(value).reshape(-1, 1)
    return val + adv - adv.mean(axis=1, keepdims=True)


def dueling_combine_backward(q_grad: Array) -> tuple[Array, Array]:
    """Backprop through dueling_combine.

    Given dL/dq of shape (n, actions), returns (dL/dvalue (n, 1),
    dL/dadvantages (n, actions)).
    """
    g = np.asarray(q_grad)
    if g.ndim == 1:
        g = g.reshape(1, -1)
    total = g.sum(axis=1, keepdims=True)
    return total, g - total / g.shape[1]

"""Residual dense network with hand-written forward and backward passes.

Layout: a stem stage (linear, batch norm, ReLU, dropout) lifting the input
to ``hidden_size``, ``num_blocks`` residual blocks of two such stages each
with an identity skip, and a linear head. ``linear_only`` replaces all of it
with a single linear layer, which is handy for exact gradient checks.

Everything is float64. ``net_forward`` never mutates the network; running
batch-norm statistics are folded in separately by ``update_running_stats``.
"""

from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import numpy.typing as npt
from pydantic import BaseModel, ConfigDict, Field

from prior_lift.core.rng import Rng
from prior_lift.errors import InvalidInputError, InvalidStateError, NumericError

FloatArray = npt.NDArray[np.float64]


class ForwardMode(Enum):
    """How batch norm and dropout behave during a forward pass."""

    TRAIN = "train"
    BATCH_STATS = "batch_stats"
    EVAL = "eval"


class NetworkConfig(BaseModel):
    """Shape and regularization settings of a LiftingMLP."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    input_size: int = Field(gt=0)
    output_size: int = Field(gt=0)
    hidden_size: int = Field(default=1024, gt=0)
    num_blocks: int = Field(default=2, ge=0)
    keep_prob: float = Field(default=0.5, gt=0.0, le=1.0)
    bn_momentum: float = Field(default=0.1, gt=0.0, le=1.0)
    bn_eps: float = Field(default=1e-5, gt=0.0)
    linear_only: bool = False


@dataclass
class LinearParams:
    """Affine layer ``x @ weight.T + bias``.

    Args:
        weight: (out, in).
        bias: (out,).
    """

    weight: FloatArray
    bias: FloatArray


@dataclass
class DenseBlockParams:
    """One stage: linear, batch norm, ReLU, dropout.

    Args:
        weight: Linear weight (out, in).
        bias: Linear bias (out,).
        gamma: Batch-norm scale (out,).
        beta: Batch-norm shift (out,).
        running_mean: Running feature mean (out,).
        running_var: Running feature variance (out,), non-negative.
        keep_prob: Dropout keep probability in (0, 1].
    """

    weight: FloatArray
    bias: FloatArray
    gamma: FloatArray
    beta: FloatArray
    running_mean: FloatArray
    running_var: FloatArray
    keep_prob: float

    PARAMETER_NAMES = ("weight", "bias", "gamma", "beta")
    BUFFER_NAMES = ("running_mean", "running_var")


@dataclass
class LiftingMLP:
    """Network parameters plus a version counter bumped on every update."""

    config: NetworkConfig
    stem: DenseBlockParams | None
    blocks: list[tuple[DenseBlockParams, DenseBlockParams]]
    head: LinearParams
    version: int = 0

    def named_stages(self) -> Iterator[tuple[str, DenseBlockParams]]:
        """Stages in forward order with their parameter-name prefixes."""
        if self.stem is not None:
            yield "stem", self.stem
        for b, (first, second) in enumerate(self.blocks):
            yield f"blocks.{b}.0", first
            yield f"blocks.{b}.1", second

    def parameters(self) -> dict[str, FloatArray]:
        """Trainable arrays by name, in a fixed order. Arrays are shared, not copied."""
        params: dict[str, FloatArray] = {}
        for prefix, stage in self.named_stages():
            for name in DenseBlockParams.PARAMETER_NAMES:
                params[f"{prefix}.{name}"] = getattr(stage, name)
        params["head.weight"] = self.head.weight
        params["head.bias"] = self.head.bias
        return params

    def buffers(self) -> dict[str, FloatArray]:
        """Running batch-norm statistics by name."""
        buffers: dict[str, FloatArray] = {}
        for prefix, stage in self.named_stages():
            for name in DenseBlockParams.BUFFER_NAMES:
                buffers[f"{prefix}.{name}"] = getattr(stage, name)
        return buffers

    def state_dict(self) -> dict[str, FloatArray]:
        """Parameters followed by buffers."""
        return {**self.parameters(), **self.buffers()}

    def load_state_dict(self, state: dict[str, FloatArray]) -> None:
        """Copy arrays into the network, checking names and shapes."""
        current = self.state_dict()
        if set(state) != set(current):
            missing = sorted(set(current) - set(state))
            extra = sorted(set(state) - set(current))
            raise InvalidInputError(f"State mismatch: missing {missing}, unexpected {extra}.")
        for name, target in current.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != target.shape:
                raise InvalidInputError(
                    f"Shape mismatch for {name}: expected {target.shape}, got {value.shape}."
                )
            target[...] = value
        self.version += 1

    def copy(self) -> "LiftingMLP":
        """Deep copy of the network."""
        clone = build_network(self.config, rng=None)
        clone.load_state_dict(self.state_dict())
        clone.version = self.version
        return clone


def _kaiming_uniform(rng: Rng | None, fan_out: int, fan_in: int) -> FloatArray:
    if rng is None:
        return np.zeros((fan_out, fan_in))
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=(fan_out, fan_in))


def _dense_stage(rng: Rng | None, fan_in: int, fan_out: int, keep_prob: float) -> DenseBlockParams:
    return DenseBlockParams(
        weight=_kaiming_uniform(rng, fan_out, fan_in),
        bias=np.zeros(fan_out),
        gamma=np.ones(fan_out),
        beta=np.zeros(fan_out),
        running_mean=np.zeros(fan_out),
        running_var=np.ones(fan_out),
        keep_prob=keep_prob,
    )


def build_network(config: NetworkConfig, rng: Rng | None) -> LiftingMLP:
    """Initialize a network.

    Weights are drawn uniformly with fan-in (Kaiming) scaling from ``rng``;
    biases start at zero, batch-norm scale at one. ``rng=None`` gives all-zero
    weights, used as a blank before loading a checkpoint.
    """
    if config.linear_only:
        head = LinearParams(
            weight=_kaiming_uniform(rng, config.output_size, config.input_size),
            bias=np.zeros(config.output_size),
        )
        return LiftingMLP(config=config, stem=None, blocks=[], head=head)

    width = config.hidden_size
    stem = _dense_stage(rng, config.input_size, width, config.keep_prob)
    blocks = [
        (
            _dense_stage(rng, width, width, config.keep_prob),
            _dense_stage(rng, width, width, config.keep_prob),
        )
        for _ in range(config.num_blocks)
    ]
    head = LinearParams(
        weight=_kaiming_uniform(rng, config.output_size, width),
        bias=np.zeros(config.output_size),
    )
    return LiftingMLP(config=config, stem=stem, blocks=blocks, head=head)


@dataclass
class StageCache:
    """Intermediate values of one stage needed for the backward pass."""

    inputs: FloatArray
    xhat: FloatArray
    inv_std: FloatArray
    active: npt.NDArray[np.bool_]
    mask: FloatArray | None
    batch_mean: FloatArray | None
    batch_var: FloatArray | None


@dataclass
class ForwardCache:
    """Everything net_backward needs, tied to one network version."""

    mode: ForwardMode
    version: int
    network_id: int
    inputs: FloatArray
    output_shape: tuple[int, ...]
    stages: list[StageCache] = field(default_factory=list)
    head_inputs: FloatArray | None = None

    def relu_signature(self) -> npt.NDArray[np.bool_]:
        """All ReLU on/off states, flattened; changes mark a non-differentiable point."""
        if not self.stages:
            return np.zeros(0, dtype=bool)
        return np.concatenate([stage.active.ravel() for stage in self.stages])


def _stage_forward(
    stage: DenseBlockParams,
    inputs: FloatArray,
    mode: ForwardMode,
    rng: Rng | None,
    eps: float,
) -> tuple[FloatArray, StageCache]:
    z = inputs @ stage.weight.T + stage.bias
    if mode is ForwardMode.EVAL:
        mean, var = stage.running_mean, stage.running_var
        batch_mean = batch_var = None
    else:
        mean = z.mean(axis=0)
        var = z.var(axis=0)
        batch_mean, batch_var = mean, var
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (z - mean) * inv_std
    y = stage.gamma * xhat + stage.beta
    active = y > 0
    out = np.where(active, y, 0.0)

    mask = None
    if mode is ForwardMode.TRAIN and stage.keep_prob < 1.0:
        if rng is None:
            raise InvalidInputError("Training-mode forward with dropout needs an Rng.")
        # Inverted dropout: scale at train time so eval needs no rescale.
        mask = (rng.random(out.shape) < stage.keep_prob) / stage.keep_prob
        out = out * mask

    cache = StageCache(
        inputs=inputs,
        xhat=xhat,
        inv_std=inv_std,
        active=active,
        mask=mask,
        batch_mean=batch_mean,
        batch_var=batch_var,
    )
    return out, cache


def net_forward(
    net: LiftingMLP,
    inputs: FloatArray,
    mode: ForwardMode,
    rng: Rng | None = None,
) -> tuple[FloatArray, ForwardCache]:
    """Run the network on a batch.

    Args:
        net: The network.
        inputs: Batch (N, input_size).
        mode: TRAIN uses batch statistics and dropout, BATCH_STATS uses batch
            statistics only, EVAL uses running statistics and no dropout.
        rng: Source of dropout masks; required in TRAIN mode.

    Returns:
        Output batch (N, output_size) and the cache for net_backward.

    Raises:
        InvalidInputError: On a width mismatch or a batch of 1 in a batch-statistics mode.
        NumericError: If any activation is non-finite.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != net.config.input_size:
        raise InvalidInputError(
            f"Expected input (N, {net.config.input_size}), got {inputs.shape}."
        )
    uses_batch_stats = mode is not ForwardMode.EVAL and not net.config.linear_only
    if uses_batch_stats and inputs.shape[0] < 2:
        raise InvalidInputError("Batch-statistics modes need a batch of at least 2.")

    cache = ForwardCache(
        mode=mode,
        version=net.version,
        network_id=id(net),
        inputs=inputs,
        output_shape=(inputs.shape[0], net.config.output_size),
    )
    eps = net.config.bn_eps
    hidden = inputs
    if net.stem is not None:
        hidden, stage_cache = _stage_forward(net.stem, hidden, mode, rng, eps)
        cache.stages.append(stage_cache)
    for first, second in net.blocks:
        inner, first_cache = _stage_forward(first, hidden, mode, rng, eps)
        inner, second_cache = _stage_forward(second, inner, mode, rng, eps)
        cache.stages.extend([first_cache, second_cache])
        hidden = hidden + inner

    cache.head_inputs = hidden
    output = hidden @ net.head.weight.T + net.head.bias
    if not np.all(np.isfinite(output)):
        raise NumericError("Non-finite activation in network output.")
    return output, cache


def _stage_backward(
    stage: DenseBlockParams,
    cache: StageCache,
    upstream: FloatArray,
    grads: dict[str, FloatArray],
    prefix: str,
) -> FloatArray:
    grad = upstream if cache.mask is None else upstream * cache.mask
    grad_y = grad * cache.active
    grads[f"{prefix}.gamma"] = np.sum(grad_y * cache.xhat, axis=0)
    grads[f"{prefix}.beta"] = np.sum(grad_y, axis=0)

    grad_xhat = grad_y * stage.gamma
    n = grad_xhat.shape[0]
    grad_z = (cache.inv_std / n) * (
        n * grad_xhat
        - np.sum(grad_xhat, axis=0)
        - cache.xhat * np.sum(grad_xhat * cache.xhat, axis=0)
    )
    grads[f"{prefix}.weight"] = grad_z.T @ cache.inputs
    grads[f"{prefix}.bias"] = np.sum(grad_z, axis=0)
    return grad_z @ stage.weight


def net_backward(
    net: LiftingMLP,
    cache: ForwardCache,
    upstream: FloatArray,
) -> tuple[dict[str, FloatArray], FloatArray]:
    """Backpropagate an output gradient through a cached forward pass.

    Args:
        net: The network the cache was produced with.
        cache: Cache from a TRAIN or BATCH_STATS forward call.
        upstream: Gradient of the loss with respect to the output (N, output_size).

    Returns:
        Gradients keyed like ``net.parameters()`` and the input gradient.

    Raises:
        InvalidStateError: If the cache is from another network, an older
            parameter version, or an EVAL pass.
        InvalidInputError: If the upstream gradient has the wrong shape.
    """
    if cache.network_id != id(net) or cache.version != net.version:
        raise InvalidStateError("Forward cache is stale: the network changed since the forward.")
    if cache.mode is ForwardMode.EVAL and not net.config.linear_only:
        raise InvalidStateError("Backward needs a cache from a batch-statistics forward pass.")
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != cache.output_shape:
        raise InvalidInputError(
            f"Upstream gradient shape {upstream.shape} != output shape {cache.output_shape}."
        )

    grads: dict[str, FloatArray] = {}
    grads["head.weight"] = upstream.T @ cache.head_inputs
    grads["head.bias"] = np.sum(upstream, axis=0)
    grad_hidden = upstream @ net.head.weight

    stage_caches = list(cache.stages)
    for b in reversed(range(len(net.blocks))):
        first, second = net.blocks[b]
        second_cache = stage_caches.pop()
        first_cache = stage_caches.pop()
        inner = _stage_backward(second, second_cache, grad_hidden, grads, f"blocks.{b}.1")
        inner = _stage_backward(first, first_cache, inner, grads, f"blocks.{b}.0")
        grad_hidden = grad_hidden + inner
    if net.stem is not None:
        grad_hidden = _stage_backward(net.stem, stage_caches.pop(), grad_hidden, grads, "stem")

    ordered = {name: grads[name] for name in net.parameters()}
    for name, grad in ordered.items():
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"Non-finite gradient for {name}.")
    return ordered, grad_hidden


def update_running_stats(net: LiftingMLP, cache: ForwardCache) -> None:
    """Fold the batch statistics of a training pass into the running statistics.

    Uses ``running = (1 - momentum) * running + momentum * batch`` with the
    unbiased batch variance.
    """
    if cache.mode is ForwardMode.EVAL:
        return
    momentum = net.config.bn_momentum
    for (_, stage), stage_cache in zip(net.named_stages(), cache.stages, strict=True):
        n = stage_cache.inputs.shape[0]
        unbiased = stage_cache.batch_var * n / (n - 1)
        batch_mean = stage_cache.batch_mean
        stage.running_mean[...] = (1 - momentum) * stage.running_mean + momentum * batch_mean
        stage.running_var[...] = (1 - momentum) * stage.running_var + momentum * unbiased

"""Adam optimizer and the step learning-rate schedule."""

from dataclasses import dataclass, field

import numpy as np

from prior_lift.core.network import FloatArray, LiftingMLP
from prior_lift.errors import InvalidInputError, NumericError


@dataclass
class AdamState:
    """Moment accumulators and hyperparameters of Adam.

    Args:
        lr: Current learning rate.
        beta1: First-moment decay.
        beta2: Second-moment decay.
        eps: Denominator offset.
        step: Number of updates applied so far.
        m: First moments by parameter name.
        v: Second moments by parameter name.
    """

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, FloatArray] = field(default_factory=dict)
    v: dict[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise InvalidInputError(f"Learning rate must be positive, got {self.lr}.")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidInputError("Adam betas must lie in [0, 1).")

    def to_dict(self) -> dict:
        """JSON form with moments as nested lists."""
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step": self.step,
            "m": {name: value.tolist() for name, value in self.m.items()},
            "v": {name: value.tolist() for name, value in self.v.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdamState":
        """Rebuild optimizer state from its JSON form."""
        return cls(
            lr=float(data["lr"]),
            beta1=float(data["beta1"]),
            beta2=float(data["beta2"]),
            eps=float(data["eps"]),
            step=int(data["step"]),
            m={name: np.asarray(value, dtype=np.float64) for name, value in data["m"].items()},
            v={name: np.asarray(value, dtype=np.float64) for name, value in data["v"].items()},
        )


def adam_step(
    params: dict[str, FloatArray],
    grads: dict[str, FloatArray],
    state: AdamState,
) -> None:
    """Apply one bias-corrected Adam update in place.

    Args:
        params: Arrays to update, modified in place.
        grads: Gradients with the same names and shapes.
        state: Optimizer state; moments are created lazily and ``step`` is incremented.

    Raises:
        InvalidInputError: If names or shapes disagree.
        NumericError: If any gradient is non-finite. Nothing is updated in that case.
    """
    if set(params) != set(grads):
        raise InvalidInputError("Gradient names do not match parameter names.")
    for name, grad in grads.items():
        if grad.shape != params[name].shape:
            raise InvalidInputError(
                f"Gradient for {name} has shape {grad.shape}, parameter has {params[name].shape}."
            )
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"Non-finite gradient for {name}.")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for name, param in params.items():
        grad = grads[name]
        m = state.m.setdefault(name, np.zeros_like(param))
        v = state.v.setdefault(name, np.zeros_like(param))
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        param -= state.lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)


def apply_gradients(net: LiftingMLP, grads: dict[str, FloatArray], state: AdamState) -> None:
    """Run adam_step on the network's parameters and invalidate older caches."""
    adam_step(net.parameters(), grads, state)
    net.version += 1


def decayed_learning_rate(base_lr: float, epoch: int, rate: float, every: int) -> float:
    """Step schedule ``base_lr * rate ** (epoch // every)`` with a 0-based epoch."""
    if every < 1:
        raise InvalidInputError(f"Decay interval must be at least 1, got {every}.")
    return base_lr * rate ** (epoch // every)

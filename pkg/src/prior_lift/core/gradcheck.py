"""Central finite-difference verification of the hand-written backward pass."""

from collections.abc import Callable
from dataclasses import asdict, dataclass, field

import numpy as np

from prior_lift.core.network import (
    FloatArray,
    ForwardMode,
    LiftingMLP,
    NetworkConfig,
    build_network,
    net_backward,
    net_forward,
)
from prior_lift.core.rng import Rng, make_rng
from prior_lift.errors import InvalidInputError
from prior_lift.logging import get_logger

logger = get_logger("gradcheck")

LossFn = Callable[[FloatArray], tuple[float, FloatArray]]

RELATIVE_FLOOR = 1e-8


@dataclass
class GradcheckFailure:
    """One coordinate whose analytic and numeric gradients disagree."""

    parameter: str
    index: int
    analytic: float
    numeric: float
    relative_error: float


@dataclass
class GradcheckReport:
    """Outcome of a finite-difference check.

    Args:
        passed: True when no checked coordinate exceeded the tolerance.
        worst_relative_error: Largest relative error over checked coordinates.
        worst_parameter: ``name[flat_index]`` of that coordinate.
        checked: Number of coordinates compared.
        kinks: Coordinates skipped because a ReLU switched within the step.
        failures: Coordinates above the tolerance.
    """

    passed: bool
    worst_relative_error: float
    worst_parameter: str
    checked: int
    kinks: int
    failures: list[GradcheckFailure] = field(default_factory=list)

    def to_dict(self) -> dict:
        """JSON-ready form."""
        return asdict(self)


def relative_error(analytic: float, numeric: float) -> float:
    """``|a - n| / max(|a|, |n|, 1e-8)``."""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), RELATIVE_FLOOR)


def _evaluate(
    net: LiftingMLP,
    inputs: FloatArray,
    loss_fn: LossFn,
) -> tuple[float, np.ndarray]:
    output, cache = net_forward(net, inputs, ForwardMode.BATCH_STATS)
    loss, _ = loss_fn(output)
    return float(loss), cache.relu_signature()


def fd_gradcheck(
    net: LiftingMLP,
    inputs: FloatArray,
    loss_fn: LossFn,
    epsilon: float = 1e-4,
    tolerance: float = 1e-4,
    checks_per_tensor: int | None = None,
    rng: Rng | None = None,
) -> GradcheckReport:
    """Compare analytic gradients against ``(f(θ+ε) - f(θ-ε)) / 2ε``.

    The forward pass uses batch statistics without dropout. Each selected
    parameter coordinate is nudged in place and restored. Coordinates where
    any ReLU changes state between the nudged evaluations are counted as
    kinks and not compared.

    Args:
        net: Network to check; left unchanged on return.
        inputs: Input batch.
        loss_fn: Maps the network output to ``(loss, d loss / d output)``.
        epsilon: Finite-difference step, > 0.
        tolerance: Maximum accepted relative error.
        checks_per_tensor: Coordinates sampled per parameter tensor, or all of them.
        rng: Sampler for the subset; required with ``checks_per_tensor``.

    Returns:
        The report.
    """
    if not epsilon > 0:
        raise InvalidInputError(f"Finite-difference step must be positive, got {epsilon}.")
    if checks_per_tensor is not None and rng is None:
        raise InvalidInputError("Sampling coordinates needs an Rng.")

    output, cache = net_forward(net, inputs, ForwardMode.BATCH_STATS)
    _, upstream = loss_fn(output)
    grads, _ = net_backward(net, cache, upstream)
    base_signature = cache.relu_signature()

    worst, worst_name = 0.0, ""
    checked = kinks = 0
    failures: list[GradcheckFailure] = []
    for name, param in net.parameters().items():
        flat = param.reshape(-1)
        if checks_per_tensor is None or checks_per_tensor >= flat.size:
            indices = np.arange(flat.size)
        else:
            indices = np.sort(rng.choice(flat.size, size=checks_per_tensor, replace=False))
        analytic = grads[name].reshape(-1)

        for index in indices:
            original = flat[index]
            flat[index] = original + epsilon
            f_plus, sig_plus = _evaluate(net, inputs, loss_fn)
            flat[index] = original - epsilon
            f_minus, sig_minus = _evaluate(net, inputs, loss_fn)
            flat[index] = original

            if not (
                np.array_equal(sig_plus, base_signature)
                and np.array_equal(sig_minus, base_signature)
            ):
                kinks += 1
                logger.debug("Skipping kink at %s[%d]", name, index)
                continue

            numeric = (f_plus - f_minus) / (2.0 * epsilon)
            error = relative_error(float(analytic[index]), numeric)
            checked += 1
            if error > worst:
                worst, worst_name = error, f"{name}[{index}]"
            if error > tolerance:
                failures.append(
                    GradcheckFailure(
                        parameter=name,
                        index=int(index),
                        analytic=float(analytic[index]),
                        numeric=numeric,
                        relative_error=error,
                    )
                )

    return GradcheckReport(
        passed=not failures,
        worst_relative_error=worst,
        worst_parameter=worst_name,
        checked=checked,
        kinks=kinks,
        failures=failures,
    )


def local_mse_objective(base_output: FloatArray, rng: Rng, scale: float = 0.1) -> LossFn:
    """Mean squared error against targets scattered ``scale`` around ``base_output``.

    Small residuals keep the loss near zero, so its roundoff stays below the
    relative-error floor.
    """
    targets = base_output + rng.normal(0.0, scale, size=base_output.shape)

    def loss_fn(output: FloatArray) -> tuple[float, FloatArray]:
        diff = output - targets
        return float(np.mean(diff * diff)), 2.0 * diff / diff.size

    return loss_fn


def gradcheck_network(
    seed: int,
    config: NetworkConfig,
    batch_size: int = 8,
    epsilon: float = 1e-4,
    tolerance: float = 1e-4,
    checks_per_tensor: int | None = 8,
) -> GradcheckReport:
    """Build a seeded network and random batch, then run fd_gradcheck on it."""
    rng = make_rng(seed)
    net = build_network(config, rng)
    inputs = rng.normal(size=(batch_size, config.input_size))
    base_output, _ = net_forward(net, inputs, ForwardMode.BATCH_STATS)
    loss_fn = local_mse_objective(base_output, rng)
    report = fd_gradcheck(
        net,
        inputs,
        loss_fn,
        epsilon=epsilon,
        tolerance=tolerance,
        checks_per_tensor=checks_per_tensor,
        rng=rng,
    )
    logger.info(
        "Gradcheck seed %d: worst %.3e at %s (%d checked, %d kinks)",
        seed,
        report.worst_relative_error,
        report.worst_parameter,
        report.checked,
        report.kinks,
    )
    return report

"""Mini-batch training of the lifting network with per-epoch evaluation."""

from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, FilePath, model_validator

from prior_lift.core.network import ForwardMode, net_backward, net_forward, update_running_stats
from prior_lift.core.optim import AdamState, apply_gradients, decayed_learning_rate
from prior_lift.core.rng import make_rng
from prior_lift.data.records import SampleRecord, load_dataset
from prior_lift.data.stats import compute_stats
from prior_lift.errors import InvalidInputError, NumericError, TrainingDivergedError
from prior_lift.logging import get_logger
from prior_lift.losses.objectives import LossWeights, combined_loss
from prior_lift.model.lifting import (
    InputVariant,
    LiftingNetwork,
    build_lifting_network,
    check_compatibility,
)
from prior_lift.skeleton.topology import SkeletonTopology, default_topology
from prior_lift.training.evaluation import EvalReport, evaluate

logger = get_logger("training")


class TrainConfig(BaseModel):
    """Settings of one training run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(
        default=50, ge=1, description="Training epochs; 400 matches the long schedule"
    )
    batch_size: int = Field(default=64, ge=2, description="Mini-batch size")
    learning_rate: float = Field(default=1e-3, gt=0.0, description="Initial Adam learning rate")
    lr_decay: float = Field(default=0.96, gt=0.0, le=1.0, description="Step decay factor")
    lr_decay_every: int = Field(default=4, ge=1, description="Epochs between decay steps")
    w_mse: float = Field(default=0.5, ge=0.0, description="Coordinate MSE weight")
    w_dir: float = Field(default=0.5, ge=0.0, description="Direction loss weight")
    direction_reduction: Literal["component", "bone"] = "component"
    variant: InputVariant = InputVariant.JOINTS_CAMERA_BONES
    camera_width: Literal[3, 4] = 4
    hidden_size: int = Field(default=1024, gt=0)
    num_blocks: int = Field(default=2, ge=0)
    keep_prob: float = Field(default=0.5, gt=0.0, le=1.0)
    bn_momentum: float = Field(default=0.1, gt=0.0, le=1.0)
    procrustes_scale: bool = Field(
        default=True, description="Log similarity (true) or rigid (false) P-MPJPE per epoch"
    )
    seed: int = Field(default=0, ge=0)
    train_path: FilePath | None = None
    test_path: FilePath | None = None
    topology_path: FilePath | None = None

    @model_validator(mode="after")
    def _positive_weight_sum(self) -> "TrainConfig":
        if self.w_mse + self.w_dir <= 0:
            raise ValueError("w_mse + w_dir must be positive")
        return self

    @property
    def loss_weights(self) -> LossWeights:
        """The loss weights as a LossWeights."""
        return LossWeights(w_mse=self.w_mse, w_dir=self.w_dir)

    def topology(self) -> SkeletonTopology:
        """The configured topology, or the default 16-joint one."""
        if self.topology_path is None:
            return default_topology()
        return SkeletonTopology.load(self.topology_path)


@dataclass
class EpochMetrics:
    """One row of the metrics log."""

    epoch: int
    train_loss: float
    mpjpe_mm: float
    p_mpjpe_mm: float
    learning_rate: float


@dataclass
class TrainResult:
    """Networks and logs produced by a training run.

    Args:
        network: Network after the last epoch.
        best_network: Snapshot with the lowest test MPJPE.
        best_epoch: Epoch of that snapshot (1-based).
        metrics: Per-epoch log.
        optimizer: Adam state after the last epoch.
        final_report: Test evaluation of ``network``.
        best_report: Test evaluation of ``best_network``.
    """

    network: LiftingNetwork
    best_network: LiftingNetwork
    best_epoch: int
    final_report: EvalReport
    best_report: EvalReport
    metrics: list[EpochMetrics] = field(default_factory=list)
    optimizer: AdamState | None = None


EpochCallback = Callable[[EpochMetrics], None]


def _resolve_records(
    records: list[SampleRecord] | None,
    path: FilePath | None,
    topo: SkeletonTopology,
    split: str,
) -> list[SampleRecord]:
    if records is not None:
        return records
    if path is None:
        raise InvalidInputError(f"No {split} records given and no {split}_path configured.")
    return load_dataset(path, topo)


def _snapshot(net: LiftingNetwork) -> LiftingNetwork:
    return LiftingNetwork(
        mlp=net.mlp.copy(),
        variant=net.variant,
        stats=net.stats,
        topology=net.topology,
        camera_width=net.camera_width,
    )


def train(
    config: TrainConfig,
    train_records: list[SampleRecord] | None = None,
    test_records: list[SampleRecord] | None = None,
    on_epoch: EpochCallback | None = None,
) -> TrainResult:
    """Train a lifting network.

    Statistics come from the training split only. Each epoch shuffles the
    training split with the run's generator, skips a trailing batch of one,
    pins the root output to the target so it adds neither loss nor gradient,
    and evaluates on the test split.

    Args:
        config: Run settings.
        train_records: Training split; read from ``config.train_path`` when None.
        test_records: Test split; read from ``config.test_path`` when None.
        on_epoch: Called with each epoch's metrics.

    Returns:
        The trained networks and logs.

    Raises:
        InvalidInputError: If a split is missing or too small.
        VariantMismatchError: If the records lack what the variant needs.
        TrainingDivergedError: If the loss stops being finite.
    """
    topo = config.topology()
    train_records = _resolve_records(train_records, config.train_path, topo, "train")
    test_records = _resolve_records(test_records, config.test_path, topo, "test")
    if not test_records:
        raise InvalidInputError("The test split is empty.")

    stats = compute_stats(train_records, topo)
    rng = make_rng(config.seed)
    net = build_lifting_network(
        variant=config.variant,
        topo=topo,
        stats=stats,
        rng=rng,
        hidden_size=config.hidden_size,
        num_blocks=config.num_blocks,
        keep_prob=config.keep_prob,
        bn_momentum=config.bn_momentum,
        camera_width=config.camera_width,
    )
    check_compatibility(net, train_records)
    check_compatibility(net, test_records)

    inputs = net.features(train_records)
    targets = net.targets(train_records)
    root = slice(3 * topo.root_index, 3 * topo.root_index + 3)
    weights = config.loss_weights
    optimizer = AdamState(lr=config.learning_rate)
    count = len(train_records)

    logger.info(
        "Training %s on %d samples, testing on %d (seed %d)",
        config.variant.value,
        count,
        len(test_records),
        config.seed,
    )

    metrics: list[EpochMetrics] = []
    best_network, best_report, best_epoch = net, None, 0
    report: EvalReport | None = None
    for epoch in range(1, config.epochs + 1):
        optimizer.lr = decayed_learning_rate(
            config.learning_rate, epoch - 1, config.lr_decay, config.lr_decay_every
        )
        order = rng.permutation(count)
        loss_sum, batches = 0.0, 0
        for batch, start in enumerate(range(0, count, config.batch_size)):
            index = order[start : start + config.batch_size]
            if len(index) < 2:
                continue
            batch_targets = targets[index]
            loss = None
            try:
                output, cache = net_forward(net.mlp, inputs[index], ForwardMode.TRAIN, rng)
                output[:, root] = batch_targets[:, root]
                loss = combined_loss(
                    output, batch_targets, topo, weights, stats, config.direction_reduction
                )
                if not np.isfinite(loss.total):
                    raise NumericError(f"loss is {loss.total}")
                grad = loss.grad
                grad[:, root] = 0.0
                grads, _ = net_backward(net.mlp, cache, grad)
            except NumericError as e:
                total = loss.total if loss is not None else float("nan")
                logger.error("Training diverged at epoch %d, batch %d: %s", epoch, batch, e)
                raise TrainingDivergedError(epoch, batch, total) from e
            update_running_stats(net.mlp, cache)
            apply_gradients(net.mlp, grads, optimizer)
            loss_sum += loss.total
            batches += 1

        report = evaluate(net, test_records)
        aligned = report.p_mpjpe_mm if config.procrustes_scale else report.p_mpjpe_rigid_mm
        row = EpochMetrics(
            epoch=epoch,
            train_loss=loss_sum / max(batches, 1),
            mpjpe_mm=report.mpjpe_mm,
            p_mpjpe_mm=aligned,
            learning_rate=optimizer.lr,
        )
        metrics.append(row)
        logger.info(
            "Epoch %d/%d: loss %.6f, MPJPE %.3f mm, P-MPJPE %.3f mm",
            epoch,
            config.epochs,
            row.train_loss,
            row.mpjpe_mm,
            row.p_mpjpe_mm,
        )
        if best_report is None or report.mpjpe_mm < best_report.mpjpe_mm:
            best_network, best_report, best_epoch = _snapshot(net), report, epoch
        if on_epoch is not None:
            on_epoch(row)

    return TrainResult(
        network=net,
        best_network=best_network,
        best_epoch=best_epoch,
        metrics=metrics,
        optimizer=optimizer,
        final_report=report,
        best_report=best_report,
    )

"""Ablation matrix over input variants and the direction loss."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from prior_lift.data.records import SampleRecord
from prior_lift.errors import InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.model.lifting import InputVariant
from prior_lift.training.evaluation import EvalReport
from prior_lift.training.trainer import TrainConfig, train

logger = get_logger("ablation")

VARIANT_LABELS = {
    InputVariant.JOINTS_ONLY: "baseline",
    InputVariant.JOINTS_CAMERA: "+ camera",
    InputVariant.JOINTS_BONES: "+ bone length",
    InputVariant.JOINTS_CAMERA_BONES: "+ camera and bone length",
}

ALL_VARIANTS = tuple(VARIANT_LABELS)
DIRECTION_SETTINGS = (False, True)


@dataclass
class AblationCell:
    """One trained and evaluated cell of the matrix.

    Args:
        label: Row label, e.g. "+ camera + direction loss".
        variant: Input variant of the cell.
        direction_loss: Whether the direction term was enabled.
        config: The exact settings the cell was trained with.
        report: Test evaluation of the final network.
    """

    label: str
    variant: InputVariant
    direction_loss: bool
    config: TrainConfig
    report: EvalReport


def row_label(variant: InputVariant, direction_loss: bool) -> str:
    """Table label of a cell, e.g. "+ bone length + direction loss"."""
    label = VARIANT_LABELS[variant]
    return f"{label} + direction loss" if direction_loss else label


def cell_config(base: TrainConfig, variant: InputVariant, direction_loss: bool) -> TrainConfig:
    """Settings of one cell: the base with its variant and loss weights replaced.

    With the direction loss off the cell trains on MSE alone; with it on it
    uses the base weights, or 0.5/0.5 when the base has no direction term.
    """
    if direction_loss:
        w_mse, w_dir = (base.w_mse, base.w_dir) if base.w_dir > 0 else (0.5, 0.5)
    else:
        w_mse, w_dir = 1.0, 0.0
    return TrainConfig.model_validate(
        {**base.model_dump(), "variant": variant, "w_mse": w_mse, "w_dir": w_dir}
    )


def run_ablation(
    base: TrainConfig,
    train_records: list[SampleRecord],
    test_records: list[SampleRecord],
    variants: tuple[InputVariant, ...] | list[InputVariant] = ALL_VARIANTS,
    direction_settings: tuple[bool, ...] | list[bool] = DIRECTION_SETTINGS,
    max_workers: int = 1,
) -> list[AblationCell]:
    """Train and evaluate every (variant, direction loss) combination.

    All cells share the base seed and the same records, so a cell listed twice
    produces identical numbers. Cells are independent and run on up to
    ``max_workers`` threads; results come back in matrix order.

    Args:
        base: Settings shared by every cell.
        train_records: Training split.
        test_records: Test split.
        variants: Input variants, one row group each.
        direction_settings: Direction loss on/off per variant.
        max_workers: Concurrent cells.

    Returns:
        One cell per combination, variants outermost.

    Raises:
        InvalidInputError: If the matrix is empty or ``max_workers`` < 1.
    """
    if not variants or not direction_settings:
        raise InvalidInputError("The ablation matrix needs at least one variant and setting.")
    if max_workers < 1:
        raise InvalidInputError(f"max_workers must be at least 1, got {max_workers}.")

    plan = [
        (InputVariant(variant), bool(direction))
        for variant in variants
        for direction in direction_settings
    ]

    def run_cell(variant: InputVariant, direction: bool) -> AblationCell:
        label = row_label(variant, direction)
        config = cell_config(base, variant, direction)
        logger.info("Ablation cell '%s' started", label)
        result = train(config, train_records, test_records)
        logger.info(
            "Ablation cell '%s' finished: MPJPE %.3f mm, P-MPJPE %.3f mm",
            label,
            result.final_report.mpjpe_mm,
            result.final_report.p_mpjpe_mm,
        )
        return AblationCell(
            label=label,
            variant=variant,
            direction_loss=direction,
            config=config,
            report=result.final_report,
        )

    logger.info("Running %d ablation cells on %d workers", len(plan), max_workers)
    if max_workers == 1:
        return [run_cell(variant, direction) for variant, direction in plan]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(run_cell, variant, direction) for variant, direction in plan]
        return [future.result() for future in futures]

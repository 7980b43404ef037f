"""CSV and JSON reports for training runs, evaluations and ablations."""

import csv
import json
from datetime import datetime
from pathlib import Path

from prior_lift.training.ablation import AblationCell
from prior_lift.training.evaluation import EvalReport
from prior_lift.training.trainer import EpochMetrics, TrainResult

METRICS_HEADER = ["epoch", "train_loss", "mpjpe", "p_mpjpe"]
ABLATION_HEADER = ["row", "variant", "direction_loss", "P1", "P2", "P2_rigid"]


def write_metrics_csv(metrics: list[EpochMetrics], report_path: Path) -> Path:
    """Write the per-epoch metrics log.

    Args:
        metrics: Rows produced by training.
        report_path: Output file path.

    Returns:
        The path written.
    """
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for row in metrics:
            writer.writerow(
                [row.epoch, repr(row.train_loss), repr(row.mpjpe_mm), repr(row.p_mpjpe_mm)]
            )
    return report_path


def training_summary(result: TrainResult) -> dict:
    """JSON-ready summary of a training run."""
    last = result.metrics[-1] if result.metrics else None
    return {
        "epochs": len(result.metrics),
        "best_epoch": result.best_epoch,
        "final_train_loss": last.train_loss if last else None,
        "final": result.final_report.to_dict(),
        "best": result.best_report.to_dict(),
    }


def write_json_report(data: dict, report_path: Path) -> Path:
    """Write a JSON report with sorted keys."""
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return report_path


def write_eval_report(report: EvalReport, report_path: Path, checkpoint: Path) -> Path:
    """Write an evaluation report stamped with its checkpoint path and generation time."""
    data = {
        "generated_at": datetime.now().isoformat(timespec="seconds"),
        "checkpoint": str(checkpoint),
        **report.to_dict(),
    }
    return write_json_report(data, report_path)


def write_ablation_csv(cells: list[AblationCell], report_path: Path) -> Path:
    """Write the ablation table, one row per cell with P1/P2 columns in millimeters."""
    report_path.parent.mkdir(parents=True, exist_ok=True)
    with open(report_path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(ABLATION_HEADER)
        for cell in cells:
            writer.writerow(
                [
                    cell.label,
                    cell.variant.value,
                    str(cell.direction_loss).lower(),
                    f"{cell.report.mpjpe_mm:.2f}",
                    f"{cell.report.p_mpjpe_mm:.2f}",
                    f"{cell.report.p_mpjpe_rigid_mm:.2f}",
                ]
            )
    return report_path

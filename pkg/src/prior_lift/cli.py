"""Command-line interface for prior-lift."""

import json
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Annotated, Any

import typer
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from prior_lift import __version__
from prior_lift.config import Settings, get_settings
from prior_lift.core.gradcheck import gradcheck_network
from prior_lift.core.network import NetworkConfig
from prior_lift.data.h36m import TEST_SUBJECTS, LengthUnit, import_h36m
from prior_lift.data.records import SampleRecord, load_dataset, save_dataset, split_by_subject
from prior_lift.data.stats import write_sidecar
from prior_lift.data.synthetic import generate_synthetic, load_generation_config
from prior_lift.errors import InvalidInputError, PriorLiftError
from prior_lift.geometry.depth import analyze_sample
from prior_lift.logging import attach_run_log, get_logger, setup_logging
from prior_lift.model.checkpoint import load_checkpoint, save_checkpoint
from prior_lift.model.lifting import InputVariant, check_compatibility
from prior_lift.reports.metrics import (
    training_summary,
    write_ablation_csv,
    write_eval_report,
    write_json_report,
    write_metrics_csv,
)
from prior_lift.skeleton.topology import SkeletonTopology, default_topology
from prior_lift.training.ablation import ALL_VARIANTS, run_ablation
from prior_lift.training.evaluation import EvalReport, evaluate
from prior_lift.training.trainer import EpochMetrics, TrainConfig, train

app = typer.Typer(
    name="prior-lift",
    help="Lift 2D human poses to 3D with bone-length and camera priors.",
    no_args_is_help=True,
)

console = Console()
err_console = Console(stderr=True)
logger = get_logger("cli")

RESOLVED_CONFIG_NAME = "resolved_config.json"


class RunConfig(BaseModel):
    """Reproducibility record written into every run directory.

    Args:
        command: Subcommand that produced the run.
        seed: Seed of the run.
        run_dir: Absolute output directory.
        options: Merged config-file values and flag overrides.
    """

    command: str
    seed: int
    run_dir: Path
    options: dict[str, Any]

    def save(self) -> Path:
        """Write the record as ``resolved_config.json`` inside ``run_dir``."""
        path = self.run_dir / RESOLVED_CONFIG_NAME
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path


class GenerateOptions(BaseModel):
    """Options of ``gen-data`` after merging the config file and flags."""

    model_config = ConfigDict(extra="forbid")

    subjects: int = Field(default=7, ge=2)
    samples_per_subject: int = Field(default=2000, ge=1)
    test_subjects: int = Field(default=2, ge=1)
    noise_px: float = Field(default=0.0, ge=0.0)
    seed: int = Field(default=0, ge=0)
    generation_config: Path | None = None
    topology_path: Path | None = None


def _init_settings() -> Settings:
    """Initialize settings and logging.

    Returns:
        Configured Settings instance.
    """
    settings = get_settings()
    settings.ensure_directories()
    setup_logging(level=settings.log_level, log_file=settings.log_path)
    return settings


def _fail(error: Exception) -> None:
    """Print a single machine-parsable error line and exit with status 1."""
    message = " ".join(str(error).split())
    err_console.print(
        f"error: {type(error).__name__}: {message}",
        markup=False,
        highlight=False,
        soft_wrap=True,
    )
    raise typer.Exit(1)


@contextmanager
def _reported_errors() -> Iterator[None]:
    try:
        yield
    except (PriorLiftError, ValidationError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        _fail(e)


def _plain(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value.resolve())
    return value


def _merge_options(config_path: Path | None, overrides: dict[str, Any]) -> dict[str, Any]:
    """Config-file values overridden by every flag that was given.

    Raises:
        InvalidInputError: If the config file is not a JSON object.
    """
    options: dict[str, Any] = {}
    if config_path is not None:
        try:
            loaded = json.loads(config_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise InvalidInputError(f"{config_path} is not valid JSON: {e.msg}") from e
        if not isinstance(loaded, dict):
            raise InvalidInputError(f"{config_path} must hold a JSON object.")
        options.update(loaded)
    options.update({key: _plain(value) for key, value in overrides.items() if value is not None})
    for key, value in options.items():
        if key.endswith("_path") and isinstance(value, str):
            options[key] = str(Path(value).resolve())
    return options


def _make_run_dir(settings: Settings, out_dir: Path | None, seed: int) -> Path:
    if out_dir is None:
        out_dir = settings.runs_dir / f"{datetime.now():%Y%m%d_%H%M%S}_seed{seed}"
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir.resolve()


def _record_run(command: str, seed: int, run_dir: Path, options: dict[str, Any]) -> None:
    RunConfig(command=command, seed=seed, run_dir=run_dir, options=options).save()
    attach_run_log(run_dir, command, seed)


def _load_topology(path: Path | None) -> SkeletonTopology:
    return SkeletonTopology.load(path) if path is not None else default_topology()


def _save_split(records: list[SampleRecord], path: Path, topo: SkeletonTopology) -> int:
    count = save_dataset(records, path)
    if count >= 2:
        write_sidecar(records, path, topo)
    else:
        logger.warning("Skipping statistics for %s: %d record(s)", path, count)
    return count


def _print_eval_report(report: EvalReport, title: str) -> None:
    table = Table(title=title)
    table.add_column("Action", style="cyan")
    table.add_column("Samples", justify="right")
    table.add_column("MPJPE (mm)", justify="right", style="green")
    table.add_column("P-MPJPE (mm)", justify="right", style="green")
    table.add_column("P-MPJPE rigid (mm)", justify="right", style="dim")

    for action, metrics in report.per_action.items():
        table.add_row(
            action,
            str(metrics.sample_count),
            f"{metrics.mpjpe_mm:.2f}",
            f"{metrics.p_mpjpe_mm:.2f}",
            f"{metrics.p_mpjpe_rigid_mm:.2f}",
        )
    table.add_row(
        "[bold]Average[/bold]",
        str(report.sample_count),
        f"{report.mpjpe_mm:.2f}",
        f"{report.p_mpjpe_mm:.2f}",
        f"{report.p_mpjpe_rigid_mm:.2f}",
    )
    console.print(table)

    if report.alignment_violations:
        console.print(
            f"[yellow]{report.alignment_violations} sample(s) scored worse "
            "after alignment.[/yellow]"
        )


def _parse_variants(value: str) -> list[InputVariant]:
    try:
        return [InputVariant(item.strip()) for item in value.split(",") if item.strip()]
    except ValueError as e:
        choices = ", ".join(variant.value for variant in InputVariant)
        raise InvalidInputError(f"{e}; choose from {choices}.") from e


def _parse_direction_settings(value: str) -> list[bool]:
    settings = {"off": False, "on": True}
    items = [item.strip().lower() for item in value.split(",") if item.strip()]
    unknown = [item for item in items if item not in settings]
    if unknown:
        raise InvalidInputError(f"Direction loss settings must be 'on' or 'off', got {unknown}.")
    return [settings[item] for item in items]


def version_callback(value: bool) -> None:
    """Show version and exit."""
    if value:
        console.print(f"prior-lift version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: Annotated[
        bool | None,
        typer.Option(
            "--version",
            "-v",
            help="Show version and exit.",
            callback=version_callback,
            is_eager=True,
        ),
    ] = None,
) -> None:
    """Prior Lift - 2D-to-3D pose lifting with skeleton and camera priors."""


ConfigOption = Annotated[
    Path | None,
    typer.Option(
        "--config",
        "-c",
        help="JSON file with option values; flags override it.",
        exists=True,
        dir_okay=False,
    ),
]
OutDirOption = Annotated[
    Path | None,
    typer.Option(
        "--out-dir",
        "-o",
        help="Output directory (default: <runs_dir>/<timestamp>_seed<seed>).",
        file_okay=False,
    ),
]
SeedOption = Annotated[int | None, typer.Option("--seed", "-s", help="Random seed.")]


@app.command("gen-data")
def gen_data(
    config: ConfigOption = None,
    subjects: Annotated[
        int | None, typer.Option("--subjects", help="Number of subjects (default 7).")
    ] = None,
    samples_per_subject: Annotated[
        int | None,
        typer.Option("--samples-per-subject", help="Samples per subject (default 2000)."),
    ] = None,
    test_subjects: Annotated[
        int | None,
        typer.Option("--test-subjects", help="Trailing subjects held out for testing (default 2)."),
    ] = None,
    noise_px: Annotated[
        float | None,
        typer.Option("--noise-px", help="Gaussian 2D noise in pixels (default 0)."),
    ] = None,
    generation_config: Annotated[
        Path | None,
        typer.Option(
            "--generation-config",
            help="Generation config JSON (default: packaged config).",
            exists=True,
            dir_okay=False,
        ),
    ] = None,
    topology: Annotated[
        Path | None,
        typer.Option("--topology", help="Topology JSON.", exists=True, dir_okay=False),
    ] = None,
    seed: SeedOption = None,
    out_dir: OutDirOption = None,
) -> None:
    """Generate a synthetic dataset split into train.jsonl and test.jsonl by subject."""
    settings = _init_settings()

    with _reported_errors():
        options = GenerateOptions.model_validate(
            _merge_options(
                config,
                {
                    "subjects": subjects,
                    "samples_per_subject": samples_per_subject,
                    "test_subjects": test_subjects,
                    "noise_px": noise_px,
                    "seed": seed,
                    "generation_config": generation_config,
                    "topology_path": topology,
                },
            )
        )
        if options.test_subjects >= options.subjects:
            raise InvalidInputError("At least one subject must remain for training.")

        topo = _load_topology(options.topology_path)
        generation = load_generation_config(options.generation_config)
        run_dir = _make_run_dir(settings, out_dir, options.seed)
        _record_run("gen-data", options.seed, run_dir, options.model_dump(mode="json"))

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
        ) as progress:
            progress.add_task("Generating synthetic poses...", total=None)
            records = generate_synthetic(
                n_subjects=options.subjects,
                samples_per_subject=options.samples_per_subject,
                topo=topo,
                noise_px=options.noise_px,
                seed=options.seed,
                config=generation,
            )

        first_test = options.subjects - options.test_subjects
        held_out = [f"S{index + 1}" for index in range(first_test, options.subjects)]
        train_split, test_split = split_by_subject(records, held_out)
        train_count = _save_split(train_split, run_dir / "train.jsonl", topo)
        test_count = _save_split(test_split, run_dir / "test.jsonl", topo)

    summary = Table.grid(padding=1)
    summary.add_column(justify="right")
    summary.add_column()
    summary.add_row("[bold]Output:[/bold]", str(run_dir))
    summary.add_row("Train samples:", str(train_count))
    summary.add_row("Test samples:", f"{test_count} ({', '.join(held_out)})")
    console.print(summary)


@app.command("train")
def train_command(
    config: ConfigOption = None,
    train_path: Annotated[
        Path | None,
        typer.Option("--train", help="Training split (JSON Lines).", exists=True, dir_okay=False),
    ] = None,
    test_path: Annotated[
        Path | None,
        typer.Option("--test", help="Test split (JSON Lines).", exists=True, dir_okay=False),
    ] = None,
    variant: Annotated[
        InputVariant | None, typer.Option("--variant", help="Input variant.")
    ] = None,
    epochs: Annotated[int | None, typer.Option("--epochs", "-e", help="Epochs.")] = None,
    batch_size: Annotated[int | None, typer.Option("--batch-size", help="Batch size.")] = None,
    learning_rate: Annotated[
        float | None, typer.Option("--learning-rate", help="Initial learning rate.")
    ] = None,
    w_mse: Annotated[float | None, typer.Option("--w-mse", help="Coordinate loss weight.")] = None,
    w_dir: Annotated[float | None, typer.Option("--w-dir", help="Direction loss weight.")] = None,
    hidden_size: Annotated[
        int | None, typer.Option("--hidden-size", help="Hidden layer width.")
    ] = None,
    num_blocks: Annotated[
        int | None, typer.Option("--num-blocks", help="Residual blocks.")
    ] = None,
    camera_width: Annotated[
        int | None, typer.Option("--camera-width", help="Camera features: 4 or 3.")
    ] = None,
    seed: SeedOption = None,
    out_dir: OutDirOption = None,
) -> None:
    """Train a lifting network and write checkpoints and metrics."""
    settings = _init_settings()

    with _reported_errors():
        options = _merge_options(
            config,
            {
                "train_path": train_path,
                "test_path": test_path,
                "variant": variant,
                "epochs": epochs,
                "batch_size": batch_size,
                "learning_rate": learning_rate,
                "w_mse": w_mse,
                "w_dir": w_dir,
                "hidden_size": hidden_size,
                "num_blocks": num_blocks,
                "camera_width": camera_width,
                "seed": seed,
            },
        )
        train_config = TrainConfig.model_validate(options)
        run_dir = _make_run_dir(settings, out_dir, train_config.seed)
        _record_run("train", train_config.seed, run_dir, train_config.model_dump(mode="json"))

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            console=console,
        ) as progress:
            task = progress.add_task("Training...", total=train_config.epochs)

            def on_epoch(row: EpochMetrics) -> None:
                progress.update(
                    task,
                    advance=1,
                    description=f"Epoch {row.epoch}: MPJPE {row.mpjpe_mm:.1f} mm",
                )

            result = train(train_config, on_epoch=on_epoch)

        save_checkpoint(
            run_dir / "final.json",
            result.network,
            result.optimizer,
            {"epoch": len(result.metrics), "seed": train_config.seed},
        )
        save_checkpoint(
            run_dir / "best.json",
            result.best_network,
            metadata={"epoch": result.best_epoch, "seed": train_config.seed},
        )
        write_metrics_csv(result.metrics, run_dir / "metrics.csv")
        write_json_report(training_summary(result), run_dir / "summary.json")

    _print_eval_report(result.final_report, f"Final test evaluation ({train_config.epochs} epochs)")
    console.print(f"[green]Best epoch:[/green] {result.best_epoch}")
    console.print(f"[green]Outputs written to:[/green] {run_dir}")


@app.command("eval")
def eval_command(
    checkpoint: Annotated[
        Path,
        typer.Option("--checkpoint", help="Checkpoint JSON.", exists=True, dir_okay=False),
    ],
    data: Annotated[
        Path,
        typer.Option(
            "--data", help="Dataset to evaluate (JSON Lines).", exists=True, dir_okay=False
        ),
    ],
    out_dir: OutDirOption = None,
) -> None:
    """Evaluate a checkpoint on a dataset."""
    settings = _init_settings()

    with _reported_errors():
        loaded = load_checkpoint(checkpoint)
        net = loaded.network
        records = load_dataset(data, net.topology)
        check_compatibility(net, records)
        report = evaluate(net, records)

        seed = int(loaded.metadata.get("seed", 0))
        run_dir = _make_run_dir(settings, out_dir, seed)
        _record_run(
            "eval",
            seed,
            run_dir,
            {"checkpoint": _plain(checkpoint), "data": _plain(data)},
        )
        write_eval_report(report, run_dir / "eval.json", checkpoint.resolve())

    _print_eval_report(report, f"Evaluation of {checkpoint.name} ({net.variant.value})")
    console.print(f"[green]Report written to:[/green] {run_dir / 'eval.json'}")


@app.command("ablate")
def ablate(
    config: ConfigOption = None,
    train_path: Annotated[
        Path | None,
        typer.Option("--train", help="Training split (JSON Lines).", exists=True, dir_okay=False),
    ] = None,
    test_path: Annotated[
        Path | None,
        typer.Option("--test", help="Test split (JSON Lines).", exists=True, dir_okay=False),
    ] = None,
    variants: Annotated[
        str,
        typer.Option("--variants", help="Comma-separated input variants (default: all four)."),
    ] = ",".join(variant.value for variant in ALL_VARIANTS),
    direction_loss: Annotated[
        str,
        typer.Option("--direction-loss", help="Comma-separated direction loss settings."),
    ] = "off,on",
    epochs: Annotated[int | None, typer.Option("--epochs", "-e", help="Epochs per cell.")] = None,
    hidden_size: Annotated[
        int | None, typer.Option("--hidden-size", help="Hidden layer width.")
    ] = None,
    batch_size: Annotated[int | None, typer.Option("--batch-size", help="Batch size.")] = None,
    max_workers: Annotated[
        int | None,
        typer.Option("--max-workers", help="Concurrent cells (default: PRIOR_LIFT_MAX_WORKERS)."),
    ] = None,
    seed: SeedOption = None,
    out_dir: OutDirOption = None,
) -> None:
    """Train and evaluate every input variant with and without the direction loss."""
    settings = _init_settings()

    with _reported_errors():
        options = _merge_options(
            config,
            {
                "train_path": train_path,
                "test_path": test_path,
                "epochs": epochs,
                "hidden_size": hidden_size,
                "batch_size": batch_size,
                "seed": seed,
            },
        )
        base = TrainConfig.model_validate(options)
        if base.train_path is None or base.test_path is None:
            raise InvalidInputError("Ablation needs both --train and --test datasets.")
        variant_list = _parse_variants(variants)
        directions = _parse_direction_settings(direction_loss)
        workers = max_workers if max_workers is not None else settings.max_workers

        run_dir = _make_run_dir(settings, out_dir, base.seed)
        _record_run(
            "ablate",
            base.seed,
            run_dir,
            {
                "base": base.model_dump(mode="json"),
                "variants": [variant.value for variant in variant_list],
                "direction_loss": directions,
                "max_workers": workers,
            },
        )

        topo = base.topology()
        train_records = load_dataset(base.train_path, topo)
        test_records = load_dataset(base.test_path, topo)
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
        ) as progress:
            cells_total = len(variant_list) * len(directions)
            progress.add_task(f"Running {cells_total} ablation cells...", total=None)
            cells = run_ablation(
                base,
                train_records,
                test_records,
                variants=variant_list,
                direction_settings=directions,
                max_workers=workers,
            )

        write_ablation_csv(cells, run_dir / "ablation.csv")
        write_json_report(
            {
                "cells": [
                    {
                        "row": cell.label,
                        "variant": cell.variant.value,
                        "direction_loss": cell.direction_loss,
                        "report": cell.report.to_dict(),
                    }
                    for cell in cells
                ]
            },
            run_dir / "ablation.json",
        )

    table = Table(title="Ablation")
    table.add_column("Input", style="cyan")
    table.add_column("P1 (mm)", justify="right", style="green")
    table.add_column("P2 (mm)", justify="right", style="green")
    for cell in cells:
        table.add_row(cell.label, f"{cell.report.mpjpe_mm:.2f}", f"{cell.report.p_mpjpe_mm:.2f}")
    console.print(table)
    console.print(f"[green]Table written to:[/green] {run_dir / 'ablation.csv'}")


@app.command("depth-analyze")
def depth_analyze(
    data: Annotated[
        Path,
        typer.Option("--data", help="Dataset (JSON Lines).", exists=True, dir_okay=False),
    ],
    limit: Annotated[int, typer.Option("--limit", help="Samples to analyze.", min=1)] = 100,
    cap: Annotated[
        int, typer.Option("--cap", help="Maximum candidate poses per sample.", min=1)
    ] = 2**15,
    tolerance_mm: Annotated[
        float,
        typer.Option("--tolerance-mm", help="Per-joint distance that counts as recovered."),
    ] = 1e-6,
    topology: Annotated[
        Path | None,
        typer.Option("--topology", help="Topology JSON.", exists=True, dir_okay=False),
    ] = None,
    out_dir: OutDirOption = None,
) -> None:
    """Reconstruct depth candidates from 2D joints, true root depth and bone lengths."""
    settings = _init_settings()

    with _reported_errors():
        topo = _load_topology(topology)
        records = load_dataset(data, topo)[:limit]
        if not records:
            raise InvalidInputError(f"{data} holds no records.")

        samples = []
        for index, record in enumerate(records):
            if record.camera is None:
                raise InvalidInputError(f"Record {index} has no camera intrinsics.")
            summary = analyze_sample(
                record.joints_3d, record.joints_2d, record.camera, topo, cap, tolerance_mm
            )
            samples.append({"index": index, **summary})

        recovered = sum(1 for sample in samples if sample["contains_truth"])
        truncated = sum(1 for sample in samples if sample["truncated"])
        max_candidates = max(sample["candidate_count"] for sample in samples)
        report = {
            "samples": len(samples),
            "contains_truth": recovered,
            "truncated": truncated,
            "max_candidate_count": max_candidates,
            "cap": cap,
            "tolerance_mm": tolerance_mm,
            "per_sample": samples,
        }
        run_dir = _make_run_dir(settings, out_dir, 0)
        _record_run(
            "depth-analyze",
            0,
            run_dir,
            {"data": _plain(data), "limit": limit, "cap": cap, "tolerance_mm": tolerance_mm},
        )
        write_json_report(report, run_dir / "depth_report.json")

    summary_table = Table.grid(padding=1)
    summary_table.add_column(justify="right")
    summary_table.add_column()
    summary_table.add_row("[bold]Samples:[/bold]", str(len(samples)))
    summary_table.add_row("Truth recovered:", f"[green]{recovered}[/green]")
    summary_table.add_row("Truncated:", f"[yellow]{truncated}[/yellow]")
    summary_table.add_row("Max candidates:", str(max_candidates))
    console.print(summary_table)


@app.command("gradcheck")
def gradcheck(
    seed: Annotated[int, typer.Option("--seed", "-s", help="First seed.")] = 0,
    repeats: Annotated[
        int, typer.Option("--repeats", help="Consecutive seeds to check.", min=1)
    ] = 1,
    hidden_size: Annotated[int, typer.Option("--hidden-size", help="Hidden width.")] = 1024,
    num_blocks: Annotated[int, typer.Option("--num-blocks", help="Residual blocks.")] = 2,
    batch_size: Annotated[int, typer.Option("--batch-size", help="Batch size.", min=2)] = 8,
    epsilon: Annotated[float, typer.Option("--epsilon", help="Central difference step.")] = 1e-4,
    tolerance: Annotated[
        float, typer.Option("--tolerance", help="Largest accepted relative error.")
    ] = 1e-4,
    checks_per_tensor: Annotated[
        int, typer.Option("--checks-per-tensor", help="Coordinates sampled per tensor.", min=1)
    ] = 8,
    out_dir: OutDirOption = None,
) -> None:
    """Compare analytic gradients of the full network with central finite differences."""
    settings = _init_settings()

    with _reported_errors():
        topo = default_topology()
        network_config = NetworkConfig(
            input_size=InputVariant.JOINTS_CAMERA_BONES.width(topo),
            output_size=3 * topo.joint_count,
            hidden_size=hidden_size,
            num_blocks=num_blocks,
        )
        reports = {
            run_seed: gradcheck_network(
                run_seed,
                network_config,
                batch_size=batch_size,
                epsilon=epsilon,
                tolerance=tolerance,
                checks_per_tensor=checks_per_tensor,
            )
            for run_seed in range(seed, seed + repeats)
        }
        run_dir = _make_run_dir(settings, out_dir, seed)
        _record_run(
            "gradcheck",
            seed,
            run_dir,
            {
                "repeats": repeats,
                "network": network_config.model_dump(),
                "batch_size": batch_size,
                "epsilon": epsilon,
                "tolerance": tolerance,
                "checks_per_tensor": checks_per_tensor,
            },
        )
        write_json_report(
            {str(run_seed): report.to_dict() for run_seed, report in reports.items()},
            run_dir / "gradcheck.json",
        )

    table = Table(title="Gradient check")
    table.add_column("Seed", justify="right", style="cyan")
    table.add_column("Worst rel. error", justify="right")
    table.add_column("Parameter", style="magenta")
    table.add_column("Checked", justify="right")
    table.add_column("Kinks", justify="right", style="dim")
    table.add_column("Status")
    for run_seed, report in reports.items():
        table.add_row(
            str(run_seed),
            f"{report.worst_relative_error:.2e}",
            report.worst_parameter,
            str(report.checked),
            str(report.kinks),
            "[green]PASS[/green]" if report.passed else "[red]FAIL[/red]",
        )
    console.print(table)

    if not all(report.passed for report in reports.values()):
        failed = [str(run_seed) for run_seed, report in reports.items() if not report.passed]
        err_console.print(
            f"error: GradcheckFailed: seeds {', '.join(failed)} exceed tolerance {tolerance:g}",
            markup=False,
            highlight=False,
            soft_wrap=True,
        )
        raise typer.Exit(1)


@app.command("import-h36m")
def import_h36m_command(
    npz: Annotated[
        Path,
        typer.Option(
            "--npz",
            help="Archive with joints_3d, subject, action and camera_index arrays.",
            exists=True,
            dir_okay=False,
        ),
    ],
    cameras: Annotated[
        Path,
        typer.Option(
            "--cameras",
            help="JSON list of camera intrinsics.",
            exists=True,
            dir_okay=False,
        ),
    ],
    units: Annotated[
        LengthUnit, typer.Option("--units", help="Unit of joints_3d.")
    ] = LengthUnit.MILLIMETERS,
    test_subjects: Annotated[
        str, typer.Option("--test-subjects", help="Comma-separated held-out subjects.")
    ] = ",".join(TEST_SUBJECTS),
    out_dir: OutDirOption = None,
) -> None:
    """Convert Human3.6M-style poses into train/test JSON Lines datasets."""
    settings = _init_settings()

    with _reported_errors():
        topo = default_topology()
        records = import_h36m(npz, cameras, units=units, topo=topo)
        held_out = [subject.strip() for subject in test_subjects.split(",") if subject.strip()]
        train_split, test_split = split_by_subject(records, held_out)

        run_dir = _make_run_dir(settings, out_dir, 0)
        _record_run(
            "import-h36m",
            0,
            run_dir,
            {
                "npz": _plain(npz),
                "cameras": _plain(cameras),
                "units": units.value,
                "test_subjects": held_out,
            },
        )
        train_count = _save_split(train_split, run_dir / "train.jsonl", topo)
        test_count = _save_split(test_split, run_dir / "test.jsonl", topo)

    console.print(
        f"[green]Imported {train_count} train and {test_count} test frames into[/green] {run_dir}"
    )


if __name__ == "__main__":
    app()

"""JSON checkpoints of a LiftingNetwork and, optionally, its optimizer."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from prior_lift.core.network import NetworkConfig, build_network
from prior_lift.core.optim import AdamState
from prior_lift.data.stats import DatasetStats
from prior_lift.errors import InvalidInputError
from prior_lift.logging import get_logger
from prior_lift.model.lifting import InputVariant, LiftingNetwork
from prior_lift.skeleton.topology import SkeletonTopology

logger = get_logger("model")

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """A loaded checkpoint.

    Args:
        network: The restored regressor.
        optimizer: Adam state, when it was saved.
        metadata: Free-form run information such as the epoch.
    """

    network: LiftingNetwork
    optimizer: AdamState | None = None
    metadata: dict = field(default_factory=dict)


def checkpoint_to_dict(
    net: LiftingNetwork,
    optimizer: AdamState | None = None,
    metadata: dict | None = None,
) -> dict:
    """JSON form of a network; layers are flat value lists with their shapes."""
    layers = [
        {"name": name, "shape": list(array.shape), "values": array.ravel().tolist()}
        for name, array in net.mlp.state_dict().items()
    ]
    payload = {
        "format_version": FORMAT_VERSION,
        "model_config": net.mlp.config.model_dump(),
        "variant": net.variant.value,
        "camera_width": net.camera_width,
        "topology": net.topology.to_dict(),
        "dataset_stats": net.stats.to_dict(),
        "layers": layers,
        "metadata": metadata or {},
    }
    if optimizer is not None:
        payload["optimizer"] = optimizer.to_dict()
    return payload


def checkpoint_from_dict(data: dict) -> Checkpoint:
    """Rebuild a checkpoint from its JSON form.

    Raises:
        InvalidInputError: On an unknown format version or inconsistent layers.
    """
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise InvalidInputError(f"Unsupported checkpoint format version {version!r}.")
    config = NetworkConfig.model_validate(data["model_config"])
    mlp = build_network(config, rng=None)
    state = {
        layer["name"]: np.asarray(layer["values"], dtype=np.float64).reshape(layer["shape"])
        for layer in data["layers"]
    }
    mlp.load_state_dict(state)
    mlp.version = 0

    network = LiftingNetwork(
        mlp=mlp,
        variant=InputVariant(data["variant"]),
        stats=DatasetStats.from_dict(data["dataset_stats"]),
        topology=SkeletonTopology.from_dict(data["topology"]),
        camera_width=int(data["camera_width"]),
    )
    if config.input_size != network.input_width:
        raise InvalidInputError(
            f"Checkpoint input width {config.input_size} does not match variant "
            f"{network.variant.value}."
        )
    optimizer = AdamState.from_dict(data["optimizer"]) if "optimizer" in data else None
    return Checkpoint(network=network, optimizer=optimizer, metadata=dict(data["metadata"]))


def save_checkpoint(
    path: Path,
    net: LiftingNetwork,
    optimizer: AdamState | None = None,
    metadata: dict | None = None,
) -> None:
    """Write a checkpoint; the same network always yields the same bytes."""
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(checkpoint_to_dict(net, optimizer, metadata), separators=(",", ":"))
    path.write_text(text + "\n", encoding="utf-8")
    logger.info("Wrote checkpoint %s", path)


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint."""
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"{path} is not a valid checkpoint: {e.msg}") from e
    return checkpoint_from_dict(data)

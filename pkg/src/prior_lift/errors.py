"""Exception hierarchy shared by every prior-lift module."""


class PriorLiftError(Exception):
    """Base class for all errors raised by prior-lift."""


class InvalidInputError(PriorLiftError, ValueError):
    """Raised when an argument has the wrong shape, count or range."""


class BehindCameraError(InvalidInputError):
    """Raised when a joint cannot be projected because it is not in front of the camera.

    Args:
        joint: Index of the offending joint.
        depth: Its z coordinate in millimeters.
    """

    def __init__(self, joint: int, depth: float):
        self.joint = joint
        self.depth = depth
        super().__init__(f"Joint {joint} is behind the camera (z={depth:.6g} mm).")


class DegenerateInputError(InvalidInputError):
    """Raised when a point configuration does not determine a unique alignment."""


class VariantMismatchError(InvalidInputError):
    """Raised when a checkpoint, dataset and input variant do not fit together."""


class NumericError(PriorLiftError, ArithmeticError):
    """Raised when a non-finite value appears in activations or gradients."""


class TrainingDivergedError(NumericError):
    """Raised when the training loss stops being finite.

    Args:
        epoch: Epoch index (1-based).
        batch: Batch index within the epoch (0-based).
        loss: The offending loss value.
    """

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"Training diverged at epoch {epoch}, batch {batch}: loss={loss}")


class InvalidStateError(PriorLiftError, RuntimeError):
    """Raised when a cached forward pass no longer matches the network."""


class GenerationError(PriorLiftError):
    """Raised when a synthetic sample cannot be placed in front of the camera.

    Args:
        subject_id: Subject label of the sample.
        sample_index: Index of the sample within its subject.
        attempts: Number of attempts made.
    """

    def __init__(self, subject_id: str, sample_index: int, attempts: int):
        self.subject_id = subject_id
        self.sample_index = sample_index
        self.attempts = attempts
        super().__init__(
            f"Sample {sample_index} of subject {subject_id} stayed behind the camera "
            f"after {attempts} attempts."
        )


class DatasetParseError(PriorLiftError):
    """Raised when a dataset line is not valid JSON or lacks a field.

    Args:
        line_number: 1-based line number in the file.
        reason: Parser message.
    """

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"Line {line_number}: {reason}")


class DatasetValidationError(PriorLiftError):
    """Raised when a parsed record violates a dataset invariant.

    Args:
        record_index: 0-based record index.
        reason: What is wrong.
        joint: Offending joint index, if any.
    """

    def __init__(self, record_index: int, reason: str, joint: int | None = None):
        self.record_index = record_index
        self.reason = reason
        self.joint = joint
        where = f" (joint {joint})" if joint is not None else ""
        super().__init__(f"Record {record_index}{where}: {reason}")

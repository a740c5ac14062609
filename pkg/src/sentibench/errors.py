"""Exception hierarchy shared by every sentibench module."""
from typing import Optional


class SentibenchError(Exception):
    """Root of all sentibench errors.

    ``module`` names the component that raised the error so the CLI can
    report where a failure came from.
    """

    module = "sentibench"


class DatasetError(SentibenchError, ValueError):
    """Unreadable dataset file or malformed record."""

    module = "corpus"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(f"{where}{message}")


class FeatureError(SentibenchError, ValueError):
    module = "features"


class LexiconError(SentibenchError, ValueError):
    module = "lexicon"

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if path is not None and line is not None else ""
        super().__init__(f"{where}{message}")


class ModelError(SentibenchError, ValueError):
    """A model precondition was violated (absent class, bad shape, ...)."""

    def __init__(self, message: str, module: str = "model"):
        self.module = module
        super().__init__(message)


class TrainingDivergedError(SentibenchError, ArithmeticError):
    """Training produced a non-finite loss."""

    module = "bilstm"

    def __init__(self, epoch: int, batch: int, loss: float):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(
            f"training diverged at epoch {epoch}, batch {batch}: loss={loss!r}"
        )


class EvaluationError(SentibenchError, ValueError):
    module = "eval"


class ConfigError(SentibenchError, ValueError):
    module = "config"


class ArtifactError(SentibenchError, ValueError):
    """Unreadable artifact or unsupported format version."""

    module = "artifacts"


class ArtifactMismatchError(ArtifactError):
    """Artifact fingerprint does not match the data or preprocessing in use."""

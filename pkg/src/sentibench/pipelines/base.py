"""Abstract base class for classification pipelines."""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from ..artifacts import Artifact, check_fingerprint, load_artifact, save_artifact
from ..config import ExperimentConfig
from ..corpus import LabeledDocument, PreprocessConfig, SentimentLabel, preprocess

# Called with (completed, total) units of training work.
ProgressCallback = Callable[[int, int], None]


class BasePipeline(ABC):
    """Raw text in, sentiment labels out.

    Subclasses own one model family plus whatever feature extraction it
    needs. Preprocessing is shared and identified by its fingerprint, so an
    artifact can only be applied under the preprocessing it was trained with.
    """

    kind: str = ""
    display_name: str = ""

    def __init__(self, config: ExperimentConfig, preprocess_config: Optional[PreprocessConfig] = None):
        self.config = config
        self.preprocess_config = preprocess_config or config.preprocess_config()

    def tokens(self, texts: Sequence[str], drop_stopwords: bool = True) -> List[List[str]]:
        return [preprocess(t, self.preprocess_config, drop_stopwords=drop_stopwords) for t in texts]

    def fingerprints(self) -> Dict[str, str]:
        """Fingerprints an artifact must share with the config it is used under."""
        return {"preprocessing": self.preprocess_config.fingerprint()}

    def training_units(self) -> int:
        """Units of progress reported by ``fit`` (epochs, trees, ...)."""
        return 1

    @abstractmethod
    def fit(
        self,
        docs: Sequence[LabeledDocument],
        n_jobs: int = 1,
        on_progress: Optional[ProgressCallback] = None,
    ) -> "BasePipeline":
        """Train on labeled documents."""
        pass

    @abstractmethod
    def predict(self, texts: Sequence[str]) -> List[SentimentLabel]:
        """Predict one label per raw text."""
        pass

    @abstractmethod
    def _arrays(self) -> Dict[str, np.ndarray]:
        pass

    def _meta(self) -> Dict[str, Any]:
        return {}

    @abstractmethod
    def _restore(self, artifact: Artifact) -> None:
        pass

    def name(self) -> str:
        return self.display_name

    def save(self, path: Union[str, Path], extra_meta: Optional[Mapping[str, Any]] = None) -> Path:
        meta = {
            "config": self.config.to_dict(),
            "fingerprints": self.fingerprints(),
            **self._meta(),
            **(extra_meta or {}),
        }
        return save_artifact(path, self.kind, self._arrays(), meta)

    @classmethod
    def load(cls, path: Union[str, Path], config: ExperimentConfig) -> "BasePipeline":
        """Restore a trained pipeline and check it matches ``config``'s preprocessing."""
        artifact = load_artifact(path, kind=cls.kind)
        # Preprocessing files come from the current config; model settings from the artifact.
        stored_config = ExperimentConfig.model_validate(artifact.meta["config"]).model_copy(
            update={"preprocess": config.preprocess}
        )
        pipeline = cls(stored_config, config.preprocess_config())
        stored = artifact.meta.get("fingerprints", {})
        for name, current in pipeline.fingerprints().items():
            check_fingerprint(name, stored.get(name), current)
        pipeline._restore(artifact)
        return pipeline

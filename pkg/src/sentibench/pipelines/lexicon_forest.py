"""Lexicon polarity/subjectivity scores classified by a random forest."""
import logging
from typing import Dict, FrozenSet, List, Optional, Sequence

import numpy as np

from ..artifacts import Artifact, prefixed
from ..corpus import LabeledDocument, SentimentLabel, remove_stopwords
from ..errors import ModelError
from ..forest import ForestParams, RandomForestModel, fit_forest
from ..lexicon import Lexicon, lexicon_fingerprint, load_lexicon, score_features
from .base import BasePipeline, ProgressCallback

logger = logging.getLogger(__name__)


class LexiconForestPipeline(BasePipeline):
    kind = "lexicon-rf"
    display_name = "Lexicon + Random Forest"

    model: Optional[RandomForestModel] = None
    _lexicon: Optional[Lexicon] = None

    @property
    def lexicon(self) -> Lexicon:
        if self._lexicon is None:
            self._lexicon = load_lexicon(self.config.lexicon_path())
        return self._lexicon

    @property
    def modifiers(self) -> FrozenSet[str]:
        return frozenset(w for w, e in self.lexicon.items() if e.is_modifier)

    def fingerprints(self) -> Dict[str, str]:
        order = "before_stopwords" if self.config.preprocess.lexicon_before_stopwords else "after_stopwords_keep_modifiers"
        return {**super().fingerprints(), "lexicon": lexicon_fingerprint(self.lexicon), "lexicon_scoring": order}

    def features(self, texts: Sequence[str]) -> np.ndarray:
        """Document scores, one row per text, columns as configured.

        Scored after stop-word removal by default; intensity modifiers on the
        stop list are kept.
        """
        docs = self.tokens(texts, drop_stopwords=False)
        if not self.config.preprocess.lexicon_before_stopwords:
            docs = [remove_stopwords(doc, self.preprocess_config, keep=self.modifiers) for doc in docs]
        return score_features(docs, self.lexicon, self.config.lexicon_rf.features)

    def fit(
        self,
        docs: Sequence[LabeledDocument],
        n_jobs: int = 1,
        on_progress: Optional[ProgressCallback] = None,
    ) -> "LexiconForestPipeline":
        X = self.features([d.text for d in docs])
        jobs = max(n_jobs, self.config.lexicon_rf.n_jobs)
        self.model = fit_forest(X, [d.label for d in docs], self.config.forest_params(), n_jobs=jobs)
        logger.info("random forest: %d trees on %d documents", len(self.model.trees), len(docs))
        if on_progress is not None:
            on_progress(1, 1)
        return self

    def predict(self, texts: Sequence[str]) -> List[SentimentLabel]:
        if self.model is None:
            raise ModelError("pipeline is not fitted; train it or load an artifact", module=self.kind)
        return self.model.predict(self.features(texts))

    def _arrays(self) -> Dict[str, np.ndarray]:
        return prefixed("forest", self.model.to_arrays())

    def _restore(self, artifact: Artifact) -> None:
        params: ForestParams = self.config.forest_params()
        self.model = RandomForestModel.from_arrays(artifact.subset("forest"), params)

"""TF-IDF n-gram features + multinomial Naive Bayes."""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..artifacts import Artifact, check_fingerprint, prefixed
from ..corpus import LabeledDocument, SentimentLabel
from ..errors import ArtifactMismatchError, ModelError
from ..features import DocTermMatrix, TfIdfModel, tfidf_fit
from ..naive_bayes import NaiveBayesModel, nb_fit
from .base import BasePipeline, ProgressCallback

logger = logging.getLogger(__name__)


class NaiveBayesPipeline(BasePipeline):
    kind = "nb"
    display_name = "Naive Bayes"

    tfidf: Optional[TfIdfModel] = None
    model: Optional[NaiveBayesModel] = None

    def _features(self, token_lists) -> DocTermMatrix:
        if self.config.nb.features == "counts":
            return self.tfidf.counts(token_lists)
        return self.tfidf.transform(token_lists)

    def fit(
        self,
        docs: Sequence[LabeledDocument],
        n_jobs: int = 1,
        on_progress: Optional[ProgressCallback] = None,
    ) -> "NaiveBayesPipeline":
        nb = self.config.nb
        token_lists = self.tokens([d.text for d in docs])
        self.tfidf = tfidf_fit(token_lists, ngram_range=nb.ngram_range, min_df=nb.min_df)
        self.model = nb_fit(self._features(token_lists), [d.label for d in docs], alpha=nb.alpha)
        logger.info("naive bayes: %d terms over %d documents", len(self.tfidf.vocabulary), len(docs))
        if on_progress is not None:
            on_progress(1, 1)
        return self

    def predict(self, texts: Sequence[str]) -> List[SentimentLabel]:
        if self.model is None:
            raise ModelError("pipeline is not fitted; train it or load an artifact", module=self.kind)
        return self.model.predict(self._features(self.tokens(texts)))

    def _arrays(self) -> Dict[str, np.ndarray]:
        return {**prefixed("tfidf", self.tfidf.to_arrays()), **prefixed("nb", self.model.to_arrays())}

    def _meta(self):
        return {"vocabulary_hash": self.tfidf.vocabulary.fingerprint(), "features": self.config.nb.features}

    def _restore(self, artifact: Artifact) -> None:
        self.tfidf = TfIdfModel.from_arrays(artifact.subset("tfidf"))
        vocabulary_hash = self.tfidf.vocabulary.fingerprint()
        check_fingerprint("vocabulary", artifact.meta.get("vocabulary_hash"), vocabulary_hash)
        self.model = NaiveBayesModel.from_arrays(artifact.subset("nb"), vocabulary_hash=vocabulary_hash)
        if self.model.n_features != len(self.tfidf.vocabulary):
            raise ArtifactMismatchError(
                f"model has {self.model.n_features} features but the vocabulary has {len(self.tfidf.vocabulary)} terms"
            )

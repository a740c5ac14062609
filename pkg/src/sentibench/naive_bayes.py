"""Multinomial Naive Bayes over document-term features, computed in log space."""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Union

import numpy as np
from scipy import sparse
from scipy.special import logsumexp

from .corpus import LABELS, NUM_CLASSES, SentimentLabel, label_from_index, labels_to_indices
from .errors import ModelError
from .features import DocTermMatrix

logger = logging.getLogger(__name__)

Features = Union[DocTermMatrix, sparse.spmatrix, np.ndarray]


def _as_matrix(X: Features) -> sparse.csr_matrix:
    if isinstance(X, DocTermMatrix):
        return X.matrix
    if sparse.issparse(X):
        return sparse.csr_matrix(X)
    return sparse.csr_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """Class log-priors and per-class term log-likelihoods.

    Rows of ``feature_log_likelihood`` follow the canonical label order
    (-1, 0, 1).
    """

    class_log_prior: np.ndarray
    feature_log_likelihood: np.ndarray
    smoothing_alpha: float = 1.0
    vocabulary_hash: Optional[str] = None

    @property
    def n_features(self) -> int:
        return self.feature_log_likelihood.shape[1]

    def joint_log_likelihood(self, X: Features) -> np.ndarray:
        """Unnormalized log P(c) + sum_t x_t log P(t|c), shape (N, 3)."""
        X = _as_matrix(X)
        if X.shape[1] != self.n_features:
            raise ModelError(
                f"feature row has {X.shape[1]} columns, model expects {self.n_features}",
                module="naive_bayes",
            )
        return np.asarray(X @ self.feature_log_likelihood.T) + self.class_log_prior

    def predict_log_proba(self, X: Features) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        return jll - logsumexp(jll, axis=1, keepdims=True)

    def predict_indices(self, X: Features) -> np.ndarray:
        # argmax keeps the first maximum: ties resolve to the smaller label.
        return np.argmax(self.predict_log_proba(X), axis=1)

    def predict(self, X: Features) -> list:
        return [label_from_index(i) for i in self.predict_indices(X)]

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "class_log_prior": self.class_log_prior,
            "feature_log_likelihood": self.feature_log_likelihood,
            "smoothing_alpha": np.array(self.smoothing_alpha, dtype=np.float64),
        }

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], vocabulary_hash: Optional[str] = None) -> "NaiveBayesModel":
        return cls(
            class_log_prior=np.asarray(arrays["class_log_prior"], dtype=np.float64),
            feature_log_likelihood=np.asarray(arrays["feature_log_likelihood"], dtype=np.float64),
            smoothing_alpha=float(arrays["smoothing_alpha"]),
            vocabulary_hash=vocabulary_hash,
        )


def nb_fit(X: Features, y: Sequence, alpha: float = 1.0) -> NaiveBayesModel:
    """Fit priors and Lidstone-smoothed term likelihoods.

    P(t|c) = (sum_{d in c} X[d,t] + alpha) / (sum_{d in c} sum_t X[d,t] + alpha * V).
    Fractional feature values (TF-IDF weights) are accepted as-is.
    """
    if not alpha > 0:
        raise ModelError(f"smoothing alpha must be > 0, got {alpha}", module="naive_bayes")
    vocabulary_hash = X.vocabulary.fingerprint() if isinstance(X, DocTermMatrix) else None
    X = _as_matrix(X)
    y_idx = labels_to_indices(y)
    if X.shape[0] != len(y_idx):
        raise ModelError(f"X has {X.shape[0]} rows but y has {len(y_idx)} labels", module="naive_bayes")
    class_counts = np.bincount(y_idx, minlength=NUM_CLASSES)
    absent = [int(LABELS[c]) for c in range(NUM_CLASSES) if class_counts[c] == 0]
    if absent:
        raise ModelError(f"every class must be present; absent label(s): {absent}", module="naive_bayes")
    if X.nnz and X.data.min() < 0:
        raise ModelError("feature values must be nonnegative", module="naive_bayes")

    # One-hot (N x 3) lets one sparse product produce all class-conditional sums.
    membership = sparse.csr_matrix(
        (np.ones(len(y_idx)), (np.arange(len(y_idx)), y_idx)), shape=(len(y_idx), NUM_CLASSES)
    )
    feature_sums = np.asarray((membership.T @ X).todense(), dtype=np.float64)
    smoothed = feature_sums + alpha
    feature_log_likelihood = np.log(smoothed) - np.log(smoothed.sum(axis=1, keepdims=True))
    class_log_prior = np.log(class_counts) - np.log(class_counts.sum())
    logger.debug("naive bayes fitted: %d docs, %d features, alpha=%s", X.shape[0], X.shape[1], alpha)
    return NaiveBayesModel(
        class_log_prior=class_log_prior,
        feature_log_likelihood=feature_log_likelihood,
        smoothing_alpha=float(alpha),
        vocabulary_hash=vocabulary_hash,
    )


def nb_predict_log_proba(model: NaiveBayesModel, x: Features) -> np.ndarray:
    """Log posteriors over (-1, 0, 1) for a single row."""
    return model.predict_log_proba(x)[0]


def nb_predict(model: NaiveBayesModel, x: Features) -> SentimentLabel:
    return label_from_index(int(np.argmax(nb_predict_log_proba(model, x))))

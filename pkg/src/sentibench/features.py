"""Vocabularies, sparse document-term matrices, n-grams and TF-IDF weighting."""
import hashlib
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import FeatureError

logger = logging.getLogger(__name__)

# Largest N*V a document-term matrix may be densified to.
MAX_DENSE_CELLS = 10**8

NgramRange = Tuple[int, int]


def _check_ngram_range(ngram_range: Sequence[int]) -> NgramRange:
    lo, hi = (int(v) for v in ngram_range)
    if lo < 1 or hi < lo:
        raise FeatureError(f"ngram_range must satisfy 1 <= lo <= hi, got ({lo}, {hi})")
    return lo, hi


def extract_ngrams(tokens: Sequence[str], ngram_range: Sequence[int] = (1, 1)) -> List[str]:
    """All contiguous n-token windows for n in [lo, hi], n ascending, left to right."""
    lo, hi = _check_ngram_range(ngram_range)
    terms: List[str] = []
    length = len(tokens)
    for n in range(lo, min(hi, length) + 1):
        terms.extend(" ".join(tokens[i:i + n]) for i in range(length - n + 1))
    return terms


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """Dense term <-> index mapping.

    Terms are ordered by descending document frequency, ties broken
    lexicographically.
    """

    terms: Tuple[str, ...]
    document_frequency: np.ndarray
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "document_frequency", np.asarray(self.document_frequency, dtype=np.int64))
        if len(self.document_frequency) != len(self.terms):
            raise FeatureError("document_frequency length differs from term count")
        index = {term: i for i, term in enumerate(self.terms)}
        if len(index) != len(self.terms):
            raise FeatureError("vocabulary terms must be unique")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def index_of(self, term: str) -> int:
        return self._index[term]

    def get(self, term: str, default=None):
        return self._index.get(term, default)

    def term(self, i: int) -> str:
        return self.terms[i]

    def fingerprint(self) -> str:
        """SHA-256 of the ordered term list."""
        return hashlib.sha256("\n".join(self.terms).encode("utf-8")).hexdigest()


def build_vocabulary(docs: Sequence[Sequence[str]], min_df: int = 1) -> Vocabulary:
    """Keep every term whose document frequency reaches ``min_df``."""
    if min_df < 1:
        raise FeatureError(f"min_df must be >= 1, got {min_df}")
    if len(docs) == 0:
        raise FeatureError("cannot build a vocabulary from an empty corpus")
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc))
    kept = sorted(((t, c) for t, c in df.items() if c >= min_df), key=lambda item: (-item[1], item[0]))
    if not kept:
        raise FeatureError(f"no term reaches min_df={min_df} in {len(docs)} documents")
    terms, counts = zip(*kept)
    logger.debug("vocabulary: %d of %d terms kept at min_df=%d", len(terms), len(df), min_df)
    return Vocabulary(terms=terms, document_frequency=np.array(counts, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class DocTermMatrix:
    """Sparse documents x terms weights, tied to the vocabulary that indexes them."""

    matrix: sparse.csr_matrix
    vocabulary: Vocabulary

    def __post_init__(self):
        if self.matrix.shape[1] != len(self.vocabulary):
            raise FeatureError(
                f"matrix has {self.matrix.shape[1]} columns but vocabulary has {len(self.vocabulary)} terms"
            )

    @property
    def n_docs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_terms(self) -> int:
        return self.matrix.shape[1]

    def row(self, i: int) -> sparse.csr_matrix:
        return self.matrix[i]

    def to_dense(self) -> np.ndarray:
        cells = self.n_docs * self.n_terms
        if cells > MAX_DENSE_CELLS:
            raise FeatureError(f"refusing to densify a {self.n_docs}x{self.n_terms} matrix ({cells} cells)")
        return self.matrix.toarray()


def _csr_from_counts(rows: Sequence[Mapping[int, float]], n_cols: int) -> sparse.csr_matrix:
    indptr = [0]
    indices: List[int] = []
    values: List[float] = []
    for row in rows:
        for col in sorted(row):
            indices.append(col)
            values.append(row[col])
        indptr.append(len(indices))
    matrix = sparse.csr_matrix(
        (np.array(values, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(rows), n_cols),
    )
    matrix.eliminate_zeros()
    return matrix


def _count_row(doc: Sequence[str], vocab: Vocabulary) -> Dict[int, float]:
    counts: Dict[int, float] = {}
    for term in doc:
        col = vocab.get(term)
        if col is not None:
            counts[col] = counts.get(col, 0.0) + 1.0
    return counts


def count_vectorize(doc: Sequence[str], vocab: Vocabulary) -> sparse.csr_matrix:
    """1 x V row of term multiplicities; out-of-vocabulary terms are ignored."""
    if len(vocab) == 0:
        raise FeatureError("vocabulary is empty")
    return _csr_from_counts([_count_row(doc, vocab)], len(vocab))


def count_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> DocTermMatrix:
    """Raw-count document-term matrix."""
    return DocTermMatrix(_csr_from_counts([_count_row(d, vocab) for d in docs], len(vocab)), vocab)


def l2_normalize_rows(matrix: sparse.csr_matrix) -> sparse.csr_matrix:
    """Scale every nonzero row to unit L2 norm; zero rows stay zero."""
    if matrix.shape[0] == 0:
        return sparse.csr_matrix(matrix)
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    normalized = sparse.diags(scale) @ matrix
    normalized = sparse.csr_matrix(normalized)
    normalized.eliminate_zeros()
    return normalized


@dataclass(frozen=True, eq=False)
class TfIdfModel:
    """Fitted TF-IDF weighting with smooth idf ln((1+N)/(1+df)) + 1."""

    vocabulary: Vocabulary
    idf: np.ndarray
    ngram_range: NgramRange = (1, 2)
    min_df: int = 2
    n_documents: int = 0

    def analyze(self, tokens: Sequence[str]) -> List[str]:
        return extract_ngrams(tokens, self.ngram_range)

    def transform(self, docs: Sequence[Sequence[str]]) -> DocTermMatrix:
        """Weight unseen token lists with the fitted idf and L2-normalize rows."""
        counts = count_matrix([self.analyze(d) for d in docs], self.vocabulary)
        weighted = sparse.csr_matrix(counts.matrix @ sparse.diags(self.idf))
        return DocTermMatrix(l2_normalize_rows(weighted), self.vocabulary)

    def counts(self, docs: Sequence[Sequence[str]]) -> DocTermMatrix:
        """Raw n-gram counts over the fitted vocabulary."""
        return count_matrix([self.analyze(d) for d in docs], self.vocabulary)

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {
            "terms": np.array(self.vocabulary.terms, dtype=str),
            "document_frequency": self.vocabulary.document_frequency,
            "idf": self.idf,
            "ngram_range": np.array(self.ngram_range, dtype=np.int64),
            "min_df": np.array(self.min_df, dtype=np.int64),
            "n_documents": np.array(self.n_documents, dtype=np.int64),
        }

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> "TfIdfModel":
        vocabulary = Vocabulary(
            terms=tuple(str(t) for t in arrays["terms"]),
            document_frequency=arrays["document_frequency"],
        )
        lo, hi = (int(v) for v in arrays["ngram_range"])
        return cls(
            vocabulary=vocabulary,
            idf=np.asarray(arrays["idf"], dtype=np.float64),
            ngram_range=(lo, hi),
            min_df=int(arrays["min_df"]),
            n_documents=int(arrays["n_documents"]),
        )


def tfidf_fit(
    docs: Sequence[Sequence[str]],
    ngram_range: Sequence[int] = (1, 2),
    min_df: int = 2,
) -> TfIdfModel:
    ngram_range = _check_ngram_range(ngram_range)
    if len(docs) == 0:
        raise FeatureError("cannot fit TF-IDF on an empty corpus")
    terms = [extract_ngrams(d, ngram_range) for d in docs]
    vocabulary = build_vocabulary(terms, min_df=min_df)
    n = len(docs)
    idf = np.log((1.0 + n) / (1.0 + vocabulary.document_frequency)) + 1.0
    return TfIdfModel(vocabulary=vocabulary, idf=idf, ngram_range=ngram_range, min_df=min_df, n_documents=n)


def tfidf_fit_transform(
    docs: Sequence[Sequence[str]],
    ngram_range: Sequence[int] = (1, 2),
    min_df: int = 2,
) -> Tuple[TfIdfModel, DocTermMatrix]:
    model = tfidf_fit(docs, ngram_range, min_df)
    return model, model.transform(docs)


def tfidf_transform(model: TfIdfModel, docs: Sequence[Sequence[str]]) -> DocTermMatrix:
    return model.transform(docs)

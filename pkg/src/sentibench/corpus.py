"""Labeled dataset loading, text cleaning and deterministic splits."""
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .errors import DatasetError
from .seeding import STREAM_SPLIT, check_seed, make_rng

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SentimentLabel(IntEnum):
    """Sentiment label scheme: negative, neutral, positive."""

    NEGATIVE = -1
    NEUTRAL = 0
    POSITIVE = 1

    @classmethod
    def parse(cls, value) -> "SentimentLabel":
        """Parse an int or an integer string; anything outside {-1, 0, 1} fails."""
        if isinstance(value, SentimentLabel):
            return value
        if isinstance(value, bool):
            raise ValueError(f"invalid sentiment label {value!r}")
        if isinstance(value, (int, np.integer)):
            number = int(value)
        elif isinstance(value, str):
            text = value.strip()
            if not re.fullmatch(r"[+-]?\d+", text):
                raise ValueError(f"invalid sentiment label {value!r}")
            number = int(text)
        else:
            raise ValueError(f"invalid sentiment label {value!r}")
        try:
            return cls(number)
        except ValueError:
            raise ValueError(f"sentiment label must be -1, 0 or 1, got {number}") from None

    @property
    def index(self) -> int:
        """Position of this label in the canonical (-1, 0, 1) ordering."""
        return self.value + 1


# Canonical class order used by every model and by the confusion matrix.
LABELS: Tuple[SentimentLabel, ...] = (
    SentimentLabel.NEGATIVE,
    SentimentLabel.NEUTRAL,
    SentimentLabel.POSITIVE,
)
NUM_CLASSES = len(LABELS)


def label_from_index(index: int) -> SentimentLabel:
    return LABELS[int(index)]


def labels_to_indices(labels: Iterable) -> np.ndarray:
    """Map labels (-1/0/1) onto class indices (0/1/2)."""
    return np.fromiter((SentimentLabel.parse(l).index for l in labels), dtype=np.int64)


@dataclass(frozen=True)
class LabeledDocument:
    text: str
    label: SentimentLabel
    source: str = "unknown"


# --- Shipped data files ---

def data_path(name: str) -> Path:
    """Path of a file shipped in ``sentibench/data``."""
    return Path(str(resources.files("sentibench").joinpath("data", name)))


def _read_lines(path: PathLike) -> List[Tuple[int, str]]:
    """Non-blank, non-comment lines with their 1-based line numbers."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read file: {exc}", path=str(path)) from exc
    lines = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        lines.append((number, line))
    return lines


def load_stopwords(path: Optional[PathLike] = None) -> FrozenSet[str]:
    path = path or data_path("stopwords.txt")
    return frozenset(line.strip().lower() for _, line in _read_lines(path))


def load_contractions(path: Optional[PathLike] = None) -> Dict[str, str]:
    """Read ``contraction<TAB>expansion`` lines.

    Keys must contain an apostrophe and expansions must be plain lowercase
    words, so that an expanded text never contains another contraction.
    """
    path = path or data_path("contractions.tsv")
    mapping: Dict[str, str] = {}
    for number, line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise DatasetError("expected 'contraction<TAB>expansion'", path=str(path), line=number)
        key, expansion = parts[0].strip().lower(), parts[1].strip().lower()
        if "'" not in key:
            raise DatasetError(f"contraction {key!r} has no apostrophe", path=str(path), line=number)
        if not re.fullmatch(r"[a-z0-9]+( [a-z0-9]+)*", expansion):
            raise DatasetError(f"expansion {expansion!r} is not plain words", path=str(path), line=number)
        mapping[key] = expansion
    return mapping


def load_emoticons(path: Optional[PathLike] = None) -> Tuple[str, ...]:
    """Read one emoticon per line; each must contain a non-alphanumeric character."""
    path = path or data_path("emoticons.txt")
    emoticons = []
    for number, line in _read_lines(path):
        emoticon = line.strip()
        if emoticon.isalnum():
            raise DatasetError(
                f"emoticon {emoticon!r} has no punctuation and would match words",
                path=str(path), line=number,
            )
        emoticons.append(emoticon)
    return tuple(dict.fromkeys(emoticons))


def _alternation(items: Iterable[str]) -> str:
    # Longest first, so ":-))" style prefixes never shadow longer entries.
    return "|".join(re.escape(s) for s in sorted(items, key=lambda s: (-len(s), s)))


def _emoticon_alternation(emoticons: Iterable[str]) -> str:
    """Like ``_alternation``, but an alphanumeric edge must not touch a word.

    ":P" still matches in "it:P" but not inside "Note:Please".
    """
    patterns = []
    for emoticon in sorted(emoticons, key=lambda s: (-len(s), s)):
        pattern = re.escape(emoticon)
        if emoticon[0].isalnum():
            pattern = r"(?<![A-Za-z0-9])" + pattern
        if emoticon[-1].isalnum():
            pattern += r"(?![A-Za-z0-9])"
        patterns.append(pattern)
    return "|".join(patterns)


@dataclass(frozen=True)
class PreprocessConfig:
    stopwords: FrozenSet[str]
    contractions: Mapping[str, str]
    emoticons: Tuple[str, ...] = ()
    lowercase: bool = True
    _emoticon_re: Optional[re.Pattern] = field(init=False, repr=False, compare=False, default=None)
    _contraction_re: Optional[re.Pattern] = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "stopwords", frozenset(w.lower() for w in self.stopwords))
        object.__setattr__(self, "contractions", dict(self.contractions))
        object.__setattr__(self, "emoticons", tuple(self.emoticons))
        if self.emoticons:
            object.__setattr__(self, "_emoticon_re", re.compile(_emoticon_alternation(self.emoticons)))
        if self.contractions:
            object.__setattr__(
                self,
                "_contraction_re",
                re.compile(
                    rf"(?<![a-z0-9']){_alternation(self.contractions)}(?![a-z0-9'])",
                    re.IGNORECASE,
                ),
            )

    @classmethod
    def from_files(
        cls,
        stopwords: Optional[PathLike] = None,
        contractions: Optional[PathLike] = None,
        emoticons: Optional[PathLike] = None,
        lowercase: bool = True,
    ) -> "PreprocessConfig":
        """Build a config from data files; ``None`` selects the shipped file."""
        return cls(
            stopwords=load_stopwords(stopwords),
            contractions=load_contractions(contractions),
            emoticons=load_emoticons(emoticons),
            lowercase=lowercase,
        )

    def fingerprint(self) -> str:
        """SHA-256 over the exact preprocessing data, for artifact compatibility checks."""
        payload = json.dumps(
            {
                "stopwords": sorted(self.stopwords),
                "contractions": sorted(self.contractions.items()),
                "emoticons": list(self.emoticons),
                "lowercase": self.lowercase,
            },
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SplitConfig:
    test_fraction: float = 0.25
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < float(self.test_fraction) < 1.0:
            raise ValueError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        check_seed(self.seed)


# --- Loading ---

def load_dataset(path: PathLike, format: Optional[str] = None) -> List[LabeledDocument]:
    """Load a CSV (header ``text,label[,source]``) or JSON-lines dataset.

    Documents come back in file order. Line numbers in errors are 1-based
    file lines (the CSV header is line 1).
    """
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"
    format = format.lower()
    if format not in ("csv", "jsonl"):
        raise DatasetError(f"unsupported dataset format {format!r}", path=str(path))
    if not path.is_file():
        raise DatasetError("dataset file does not exist", path=str(path))

    records = _read_csv_records(path) if format == "csv" else _read_jsonl_records(path)
    documents = []
    for line, record in records:
        if "text" not in record or "label" not in record:
            raise DatasetError("record needs 'text' and 'label' fields", path=str(path), line=line)
        text = record["text"]
        if text is None:
            text = ""
        if not isinstance(text, str):
            raise DatasetError(f"'text' must be a string, got {type(text).__name__}", path=str(path), line=line)
        try:
            label = SentimentLabel.parse(record["label"])
        except ValueError as exc:
            raise DatasetError(str(exc), path=str(path), line=line) from None
        source = record.get("source") or "unknown"
        documents.append(LabeledDocument(text=text, label=label, source=str(source)))
    logger.debug("loaded %d documents from %s", len(documents), path)
    return documents


def _read_csv_records(path: Path) -> List[Tuple[int, dict]]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return []
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise DatasetError(f"malformed CSV: {exc}", path=str(path)) from exc
    missing = {"text", "label"} - set(frame.columns)
    if missing:
        raise DatasetError(f"CSV header lacks column(s): {', '.join(sorted(missing))}", path=str(path), line=1)
    # Header is line 1, first record line 2 (records without embedded newlines).
    return [(i + 2, row) for i, row in enumerate(frame.to_dict("records"))]


def _read_jsonl_records(path: Path) -> List[Tuple[int, dict]]:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read file: {exc}", path=str(path)) from exc
    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"invalid JSON: {exc.msg}", path=str(path), line=number) from None
        if not isinstance(record, dict):
            raise DatasetError("each line must be a JSON object", path=str(path), line=number)
        records.append((number, record))
    return records


def dataset_fingerprint(path: PathLike) -> str:
    """SHA-256 of the raw dataset bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def label_distribution(docs: Sequence[LabeledDocument]) -> Dict[str, int]:
    """Per-class document counts keyed by label value, in canonical order."""
    counts = {str(int(label)): 0 for label in LABELS}
    for doc in docs:
        counts[str(int(doc.label))] += 1
    return counts


# --- Cleaning ---

# Any token carrying a scheme, "www." or "http" is URL residue.
_URL_RE = re.compile(r"\S*(?:[a-z][a-z0-9+.-]*://|www\.|http)\S*", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_HASHTAG_RE = re.compile(r"#\w+")
_SPECIAL_LOWER_RE = re.compile(r"[^a-z0-9 ]")
_SPECIAL_MIXED_RE = re.compile(r"[^A-Za-z0-9 ]")
_SPACES_RE = re.compile(r" {2,}")


def clean_text(raw: str, config: PreprocessConfig) -> str:
    """Apply the cleaning rules in fixed order.

    URLs, mentions, hashtags, emoticons, lowercase, contraction expansion,
    special-character removal, whitespace collapse. Removed spans become a
    space, so no removal can glue two fragments into a new word.
    """
    text = _URL_RE.sub(" ", raw)
    text = _MENTION_RE.sub(" ", text)
    text = _HASHTAG_RE.sub(" ", text)
    if config._emoticon_re is not None:
        text = config._emoticon_re.sub(" ", text)
    if config.lowercase:
        text = text.lower()
    if config._contraction_re is not None:
        text = text.replace("’", "'")
        text = config._contraction_re.sub(lambda m: config.contractions[m.group(0).lower()], text)
    special = _SPECIAL_LOWER_RE if config.lowercase else _SPECIAL_MIXED_RE
    text = special.sub(" ", text)
    return _SPACES_RE.sub(" ", text).strip()


def tokenize(clean: str) -> List[str]:
    return clean.split()


def remove_stopwords(
    tokens: Sequence[str], config: PreprocessConfig, keep: AbstractSet[str] = frozenset()
) -> List[str]:
    """Drop stop words, except those in ``keep``."""
    return [t for t in tokens if t not in config.stopwords or t in keep]


def preprocess(raw: str, config: PreprocessConfig, drop_stopwords: bool = True) -> List[str]:
    """clean_text -> tokenize [-> remove_stopwords]."""
    tokens = tokenize(clean_text(raw, config))
    return remove_stopwords(tokens, config) if drop_stopwords else tokens


# --- Splitting ---

def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_indices(
    labels: Sequence,
    config: SplitConfig,
    stream: int = STREAM_SPLIT,
) -> Tuple[np.ndarray, np.ndarray]:
    """Sorted (train, test) index arrays for a seeded, optionally stratified split.

    Stratified quotas use largest remainders: each class gets
    floor(fraction * n_c) test documents, and the leftover needed to reach
    round(fraction * N) goes to classes with the largest fractional parts,
    ties to the lower label.
    """
    y = labels_to_indices(labels)
    n = len(y)
    if n == 0:
        return np.array([], dtype=np.int64), np.array([], dtype=np.int64)
    fraction = float(config.test_fraction)
    n_test = _round_half_up(fraction * n)

    if config.stratified:
        counts = np.bincount(y, minlength=NUM_CLASSES)
        absent = [int(LABELS[c]) for c in range(NUM_CLASSES) if counts[c] == 0]
        if absent:
            raise DatasetError(f"stratified split needs every class; absent label(s): {absent}")
        quotas = fraction * counts
        allocation = np.floor(quotas).astype(np.int64)
        leftover = n_test - int(allocation.sum())
        order = sorted(range(NUM_CLASSES), key=lambda c: (-(quotas[c] - allocation[c]), c))
        for c in order[: max(leftover, 0)]:
            allocation[c] += 1
        test_parts = []
        for c in range(NUM_CLASSES):
            members = np.flatnonzero(y == c)
            perm = make_rng(config.seed, stream, c).permutation(len(members))
            test_parts.append(members[perm[: allocation[c]]])
        test = np.sort(np.concatenate(test_parts))
    else:
        perm = make_rng(config.seed, stream, NUM_CLASSES).permutation(n)
        test = np.sort(perm[:n_test])

    mask = np.zeros(n, dtype=bool)
    mask[test] = True
    train = np.flatnonzero(~mask)
    return train, test


def split_dataset(
    docs: Sequence[LabeledDocument],
    config: SplitConfig,
) -> Tuple[List[LabeledDocument], List[LabeledDocument]]:
    """Partition documents into (train, test); both keep input order."""
    train_idx, test_idx = split_indices([d.label for d in docs], config)
    return [docs[i] for i in train_idx], [docs[i] for i in test_idx]


def split_fingerprint(train_idx: np.ndarray, test_idx: np.ndarray) -> str:
    """SHA-256 identifying an exact partition."""
    payload = json.dumps({"train": [int(i) for i in train_idx], "test": [int(i) for i in test_idx]})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()

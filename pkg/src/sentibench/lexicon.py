"""Lexicon-based polarity/subjectivity scoring with intensity modifiers."""
import hashlib
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import LexiconError

logger = logging.getLogger(__name__)

Lexicon = Dict[str, "LexiconEntry"]

# Feature names a document can be described by, in column order.
SCORE_FEATURES = ("polarity", "subjectivity", "matched_terms")


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, value))


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    polarity: float = 0.0
    subjectivity: float = 0.0
    intensity: float = 1.0
    is_modifier: bool = False

    def __post_init__(self):
        if not -1.0 <= self.polarity <= 1.0:
            raise LexiconError(f"polarity of {self.word!r} must be in [-1, 1], got {self.polarity}")
        if not 0.0 <= self.subjectivity <= 1.0:
            raise LexiconError(f"subjectivity of {self.word!r} must be in [0, 1], got {self.subjectivity}")
        if not (self.intensity > 0 and math.isfinite(self.intensity)):
            raise LexiconError(f"intensity of {self.word!r} must be positive, got {self.intensity}")
        if self.is_modifier:
            # A modifier only scales its neighbour.
            object.__setattr__(self, "polarity", 0.0)
            object.__setattr__(self, "subjectivity", 0.0)


@dataclass(frozen=True)
class SentimentScores:
    polarity: float = 0.0
    subjectivity: float = 0.0
    matched_terms: int = 0

    def as_features(self, names: Sequence[str] = ("polarity", "subjectivity")) -> List[float]:
        return [float(getattr(self, name)) for name in names]


def _parse_flag(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes"):
        return True
    if value in ("0", "false", "no", ""):
        return False
    raise ValueError(f"invalid modifier flag {text!r}")


def load_lexicon(path: Union[str, Path]) -> Lexicon:
    """Parse ``word<TAB>polarity<TAB>subjectivity<TAB>intensity<TAB>modifier_flag`` lines.

    ``#`` lines are comments. Duplicate words are merged: polarity and
    subjectivity are averaged, intensity is the maximum, and the entry is a
    modifier if any duplicate is.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise LexiconError(f"cannot read lexicon {path}: {exc}") from exc

    grouped: Dict[str, List[LexiconEntry]] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise LexiconError(f"expected 5 tab-separated fields, got {len(parts)}", path=str(path), line=number)
        word = parts[0].strip().lower()
        if not word:
            raise LexiconError("empty word", path=str(path), line=number)
        try:
            entry = LexiconEntry(
                word=word,
                polarity=float(parts[1]),
                subjectivity=float(parts[2]),
                intensity=float(parts[3]),
                is_modifier=_parse_flag(parts[4]),
            )
        except LexiconError as exc:
            raise LexiconError(str(exc), path=str(path), line=number) from None
        except ValueError as exc:
            raise LexiconError(f"malformed entry: {exc}", path=str(path), line=number) from None
        grouped.setdefault(word, []).append(entry)

    lexicon: Lexicon = {}
    for word, entries in grouped.items():
        if len(entries) == 1:
            lexicon[word] = entries[0]
            continue
        lexicon[word] = LexiconEntry(
            word=word,
            polarity=sum(e.polarity for e in entries) / len(entries),
            subjectivity=sum(e.subjectivity for e in entries) / len(entries),
            intensity=max(e.intensity for e in entries),
            is_modifier=any(e.is_modifier for e in entries),
        )
    logger.debug("loaded %d lexicon entries from %s", len(lexicon), path)
    return lexicon


def lexicon_fingerprint(lexicon: Lexicon) -> str:
    payload = "\n".join(
        f"{e.word}\t{e.polarity!r}\t{e.subjectivity!r}\t{e.intensity!r}\t{int(e.is_modifier)}"
        for e in sorted(lexicon.values(), key=lambda e: e.word)
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def score_text(tokens: Sequence[str], lexicon: Lexicon) -> SentimentScores:
    """Average the scores of matched words, left to right.

    A modifier scales the polarity and subjectivity of the very next token
    when that token is a scored entry; any other next token discards it.
    Unknown words are skipped and do not count toward the average.
    """
    polarity_sum = 0.0
    subjectivity_sum = 0.0
    matched = 0
    pending: Optional[float] = None
    for token in tokens:
        entry = lexicon.get(token)
        if entry is None:
            pending = None
            continue
        if entry.is_modifier:
            pending = entry.intensity
            continue
        polarity, subjectivity = entry.polarity, entry.subjectivity
        if pending is not None:
            polarity = _clamp(polarity * pending, -1.0, 1.0)
            subjectivity = _clamp(subjectivity * pending, 0.0, 1.0)
            pending = None
        polarity_sum += polarity
        subjectivity_sum += subjectivity
        matched += 1
    if matched == 0:
        return SentimentScores(0.0, 0.0, 0)
    return SentimentScores(
        polarity=_clamp(polarity_sum / matched, -1.0, 1.0),
        subjectivity=_clamp(subjectivity_sum / matched, 0.0, 1.0),
        matched_terms=matched,
    )


def score_features(
    docs: Sequence[Sequence[str]],
    lexicon: Lexicon,
    features: Sequence[str] = ("polarity", "subjectivity"),
) -> np.ndarray:
    """N x len(features) matrix of document scores, the forest's input."""
    unknown = [f for f in features if f not in SCORE_FEATURES]
    if unknown or not features:
        raise LexiconError(f"unknown score feature(s) {unknown}; choose from {SCORE_FEATURES}")
    rows = [score_text(doc, lexicon).as_features(features) for doc in docs]
    return np.array(rows, dtype=np.float64).reshape(len(docs), len(features))

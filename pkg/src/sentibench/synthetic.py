"""Seeded generator for labeled three-class corpora with a known signal.

Polar documents carry words from the sentiment lexicon. Most of them come from
a small pool of the strongest words per polarity; a share of plain documents
instead use a rare word from the rest of the lexicon, which a lexicon scorer
knows but a classifier seldom sees in training. "Turnaround" documents state
their sentiment early and close on an opposite remark, so the label depends on
word order and not only on which words occur. Neutral documents are built from
topic words the lexicon does not know. Social-media noise (mentions, hashtags,
links, emoticons) is sprinkled in to exercise the cleaning rules.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .corpus import LabeledDocument, SentimentLabel, data_path, load_stopwords
from .errors import DatasetError
from .lexicon import Lexicon, load_lexicon
from .seeding import STREAM_SYNTHETIC, make_rng

logger = logging.getLogger(__name__)

TOPIC_WORDS = (
    "phone", "battery", "screen", "delivery", "order", "price", "service", "app", "update", "team",
    "game", "movie", "weather", "traffic", "coffee", "train", "office", "meeting", "report", "city",
    "camera", "laptop", "restaurant", "menu", "hotel", "flight", "ticket", "concert", "album", "season",
    "episode", "driver", "store", "package", "website", "account", "course", "tutor", "class", "match",
    "stadium", "market", "budget", "policy", "election", "council", "bridge", "station", "museum", "garden",
)
SOURCES = ("twitter", "reddit")
_NOISE = ("@user", "#news", "http://t.co/x1", ":)", ":(", "!!", "...")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class _Pool:
    """Polar words of one sign, strongest first."""

    head: List[str]
    tail: List[str]

    def draw(self, rng: np.random.Generator, rare: bool = False) -> str:
        words = self.tail if rare and self.tail else self.head
        return str(words[int(rng.integers(len(words)))])


def _word_pools(lexicon: Lexicon, threshold: float, head_size: int):
    excluded = load_stopwords() | set(TOPIC_WORDS)

    def pool(sign: int) -> _Pool:
        ranked = sorted(
            (w for w, e in lexicon.items()
             if not e.is_modifier and sign * e.polarity >= threshold and w.isalpha() and w not in excluded),
            key=lambda w: (-abs(lexicon[w].polarity), w),
        )
        return _Pool(head=ranked[:head_size], tail=ranked[head_size:])

    positive, negative = pool(1), pool(-1)
    boosters = sorted(w for w, e in lexicon.items() if e.is_modifier and e.intensity > 1.0)
    topics = [w for w in TOPIC_WORDS if w not in lexicon]
    if not positive.head or not negative.head or not topics:
        raise DatasetError("lexicon lacks polar words to generate a corpus from")
    return positive, negative, boosters, topics


def generate_corpus(
    n_docs: int,
    seed: int = 0,
    turnaround_fraction: float = 0.5,
    noise_fraction: float = 0.2,
    rare_fraction: float = 0.2,
    lexicon: Optional[Lexicon] = None,
    polarity_threshold: float = 0.3,
    head_size: int = 20,
) -> List[LabeledDocument]:
    """Generate ``n_docs`` documents with labels cycling -1, 0, 1 in random order.

    ``turnaround_fraction`` of the polar documents carry the deciding
    sentiment word early and an opposite one late. ``rare_fraction`` of the other
    polar documents use a word outside the ``head_size`` strongest of its sign.
    """
    if n_docs < 1:
        raise DatasetError(f"n_docs must be >= 1, got {n_docs}")
    if head_size < 1:
        raise DatasetError(f"head_size must be >= 1, got {head_size}")
    for name, value in (("turnaround_fraction", turnaround_fraction), ("noise_fraction", noise_fraction),
                        ("rare_fraction", rare_fraction)):
        if not 0.0 <= value <= 1.0:
            raise DatasetError(f"{name} must be in [0, 1], got {value}")
    lexicon = lexicon if lexicon is not None else load_lexicon(data_path("lexicon.tsv"))
    positive, negative, boosters, topics = _word_pools(lexicon, polarity_threshold, head_size)
    rng = make_rng(seed, STREAM_SYNTHETIC)

    labels = np.resize(np.array([-1, 0, 1]), n_docs)
    rng.shuffle(labels)
    docs = []
    for label in labels:
        words = list(rng.choice(topics, size=int(rng.integers(3, 8))))
        if label != 0:
            own, other = (positive, negative) if label == 1 else (negative, positive)
            if rng.random() < turnaround_fraction:
                # deciding word second, opposite remark second to last
                words.insert(1, own.draw(rng))
                words.insert(len(words) - 1, other.draw(rng))
            else:
                phrase = [own.draw(rng, rare=rng.random() < rare_fraction)]
                if boosters and rng.random() < 0.3:
                    phrase.insert(0, str(rng.choice(boosters)))
                position = int(rng.integers(0, len(words) + 1))
                words[position:position] = phrase
        if rng.random() < noise_fraction:
            words.insert(int(rng.integers(0, len(words) + 1)), str(rng.choice(_NOISE)))
        text = " ".join(words)
        docs.append(
            LabeledDocument(
                text=text[0].upper() + text[1:],
                label=SentimentLabel(int(label)),
                source=str(rng.choice(SOURCES)),
            )
        )
    logger.debug("generated %d synthetic documents (seed=%d)", n_docs, seed)
    return docs


def write_corpus(docs: Sequence[LabeledDocument], path: PathLike, format: Optional[str] = None) -> Path:
    """Write documents as CSV or JSON lines, in the layout ``load_dataset`` reads."""
    path = Path(path)
    if format is None:
        format = "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"
    frame = pd.DataFrame(
        {"text": [d.text for d in docs], "label": [int(d.label) for d in docs], "source": [d.source for d in docs]}
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        frame.to_csv(path, index=False)
    elif format == "jsonl":
        frame.to_json(path, orient="records", lines=True, force_ascii=False)
    else:
        raise DatasetError(f"unsupported dataset format {format!r}", path=str(path))
    return path

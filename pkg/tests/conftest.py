"""Shared fixtures for sentibench tests."""
import json
from pathlib import Path

import pytest

from sentibench.config import load_config
from sentibench.corpus import LabeledDocument, PreprocessConfig, SentimentLabel
from sentibench.lexicon import LexiconEntry
from sentibench.synthetic import generate_corpus, write_corpus


# Settings small enough for every pipeline to train in well under a second.
SMALL_SETTINGS = {
    "seed": 0,
    "nb": {"min_df": 1},
    "lexicon_rf": {"n_trees": 5},
    "bilstm": {
        "embedding_dim": 8,
        "hidden_dim": 8,
        "maxlen": 12,
        "epochs": 2,
        "batch_size": 16,
    },
}

TINY_DOCS = [
    LabeledDocument("What a great day, loved it!", SentimentLabel.POSITIVE, "twitter"),
    LabeledDocument("Excellent service and a wonderful team", SentimentLabel.POSITIVE, "reddit"),
    LabeledDocument("The train leaves at noon", SentimentLabel.NEUTRAL, "twitter"),
    LabeledDocument("Meeting moved to the office on Monday", SentimentLabel.NEUTRAL, "reddit"),
    LabeledDocument("Terrible delivery, awful packaging", SentimentLabel.NEGATIVE, "twitter"),
    LabeledDocument("I hate this bad update", SentimentLabel.NEGATIVE, "reddit"),
]


def _flatten(settings, prefix=""):
    for key, value in settings.items():
        if isinstance(value, dict):
            yield from _flatten(value, f"{prefix}{key}.")
        else:
            yield f"{prefix}{key}", value


# --- Fixtures ---

@pytest.fixture
def preprocess_config():
    """Preprocessing with the shipped stopwords, contractions and emoticons."""
    return PreprocessConfig.from_files()


@pytest.fixture
def toy_lexicon():
    """Hand-sized lexicon with one intensity modifier."""
    return {
        "great": LexiconEntry("great", 0.8, 0.75),
        "bad": LexiconEntry("bad", -0.7, 0.65),
        "good": LexiconEntry("good", 0.7, 0.6),
        "very": LexiconEntry("very", intensity=1.3, is_modifier=True),
    }


@pytest.fixture
def synthetic_docs():
    """90 generated documents, 30 per class."""
    return generate_corpus(90, seed=3)


@pytest.fixture
def dataset_csv(tmp_path, synthetic_docs):
    """The synthetic documents written as a CSV dataset."""
    return write_corpus(synthetic_docs, tmp_path / "data.csv")


@pytest.fixture
def small_config(tmp_path, dataset_csv):
    """Validated experiment config with small model settings."""
    overrides = dict(_flatten(SMALL_SETTINGS))
    overrides["data.path"] = str(dataset_csv)
    overrides["output_dir"] = str(tmp_path / "out")
    return load_config(None, overrides)


@pytest.fixture
def config_file(tmp_path, dataset_csv):
    """JSON config file pointing at the synthetic dataset, paths relative to the file."""
    data = {
        "schema_version": 1,
        "seed": 0,
        "output_dir": str(tmp_path / "out"),
        "data": {"path": dataset_csv.name},
        **SMALL_SETTINGS,
    }
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture
def out_dir(tmp_path) -> Path:
    return tmp_path / "out"

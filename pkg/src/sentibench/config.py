"""Experiment configuration for sentibench."""
import copy
import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .bilstm import ModelDims, TrainConfig
from .corpus import PreprocessConfig, SplitConfig, data_path
from .errors import ConfigError
from .forest import ForestParams
from .lexicon import SCORE_FEATURES

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODEL_NAMES = ("nb", "lexicon-rf", "bilstm")

DEFAULTS: Dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "seed": None,  # required: set in the config file or with --seed
    "output_dir": "out",
    "data": {"path": None, "format": None},
    "preprocess": {
        "stopwords": None,  # None = shipped file
        "contractions": None,
        "emoticons": None,
        "lexicon": None,
        "lowercase": True,
        "lexicon_before_stopwords": False,
    },
    "split": {"test_fraction": 0.25, "stratified": True, "validation_fraction": 0.1},
    "nb": {"alpha": 1.0, "ngram_range": [1, 2], "min_df": 2, "features": "tfidf"},
    "lexicon_rf": {
        "n_trees": 25,
        "max_depth": 12,
        "min_samples_split": 2,
        "features_per_split": None,  # None = ceil(sqrt(dim))
        "bootstrap": True,
        "features": ["polarity", "subjectivity"],
        "n_jobs": 1,
    },
    "bilstm": {
        "embedding_dim": 64,
        "hidden_dim": 64,
        "maxlen": 48,
        "max_vocab": 20000,
        "epochs": 20,
        "learning_rate": 0.1,
        "momentum": 0.8,
        "batch_size": 64,
        "gradient_clip_norm": 5.0,
    },
}

# Config keys holding file paths, resolved against the config file's directory.
_PATH_KEYS = (("data", "path"), ("preprocess", "stopwords"), ("preprocess", "contractions"),
              ("preprocess", "emoticons"), ("preprocess", "lexicon"))


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DataBlock(_Block):
    path: Optional[Path] = None
    format: Optional[Literal["csv", "jsonl"]] = None


class PreprocessBlock(_Block):
    stopwords: Optional[Path] = None
    contractions: Optional[Path] = None
    emoticons: Optional[Path] = None
    lexicon: Optional[Path] = None
    lowercase: bool = True
    lexicon_before_stopwords: bool = False


class SplitBlock(_Block):
    test_fraction: float = Field(0.25, gt=0, lt=1)
    stratified: bool = True
    validation_fraction: float = Field(0.1, ge=0, lt=1)


class NaiveBayesBlock(_Block):
    alpha: float = Field(1.0, gt=0)
    ngram_range: Tuple[int, int] = (1, 2)
    min_df: int = Field(2, ge=1)
    features: Literal["tfidf", "counts"] = "tfidf"

    @field_validator("ngram_range")
    @classmethod
    def _ordered(cls, value):
        lo, hi = value
        if lo < 1 or hi < lo:
            raise ValueError(f"ngram_range must satisfy 1 <= lo <= hi, got {list(value)}")
        return value


class LexiconForestBlock(_Block):
    n_trees: int = Field(25, ge=1)
    max_depth: Optional[int] = Field(12, ge=0)
    min_samples_split: int = Field(2, ge=2)
    features_per_split: Optional[int] = Field(None, ge=1)
    bootstrap: bool = True
    features: List[str] = ["polarity", "subjectivity"]
    n_jobs: int = Field(1, ge=1)

    @field_validator("features")
    @classmethod
    def _known_features(cls, value):
        unknown = [f for f in value if f not in SCORE_FEATURES]
        if unknown or not value:
            raise ValueError(f"features must be a nonempty subset of {list(SCORE_FEATURES)}, got {value}")
        return value


class BiLstmBlock(_Block):
    embedding_dim: int = Field(64, ge=1)
    hidden_dim: int = Field(64, ge=1)
    maxlen: int = Field(48, ge=1)
    max_vocab: int = Field(20000, ge=1)
    epochs: int = Field(20, ge=1)
    learning_rate: float = Field(0.1, gt=0)
    momentum: float = Field(0.8, ge=0, lt=1)
    batch_size: int = Field(64, ge=1)
    gradient_clip_norm: float = Field(5.0, gt=0)


class ExperimentConfig(_Block):
    schema_version: int
    seed: int = Field(ge=0, le=2**64 - 1)
    output_dir: Path
    data: DataBlock = DataBlock()
    preprocess: PreprocessBlock = PreprocessBlock()
    split: SplitBlock = SplitBlock()
    nb: NaiveBayesBlock = NaiveBayesBlock()
    lexicon_rf: LexiconForestBlock = LexiconForestBlock()
    bilstm: BiLstmBlock = BiLstmBlock()

    @field_validator("schema_version")
    @classmethod
    def _known_schema(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {value}, expected {SCHEMA_VERSION}")
        return value

    # --- Derived settings ---

    def lexicon_path(self) -> Path:
        return self.preprocess.lexicon or data_path("lexicon.tsv")

    def preprocess_config(self) -> PreprocessConfig:
        p = self.preprocess
        return PreprocessConfig.from_files(p.stopwords, p.contractions, p.emoticons, lowercase=p.lowercase)

    def split_config(self) -> SplitConfig:
        return SplitConfig(test_fraction=self.split.test_fraction, seed=self.seed, stratified=self.split.stratified)

    def validation_split_config(self) -> Optional[SplitConfig]:
        if self.split.validation_fraction == 0:
            return None
        return SplitConfig(
            test_fraction=self.split.validation_fraction, seed=self.seed, stratified=self.split.stratified
        )

    def forest_params(self) -> ForestParams:
        rf = self.lexicon_rf
        return ForestParams(
            n_trees=rf.n_trees,
            max_depth=rf.max_depth,
            min_samples_split=rf.min_samples_split,
            features_per_split=rf.features_per_split,
            bootstrap=rf.bootstrap,
            seed=self.seed,
        )

    def model_dims(self) -> ModelDims:
        b = self.bilstm
        return ModelDims(embedding_dim=b.embedding_dim, hidden_dim=b.hidden_dim, max_len=b.maxlen, max_vocab=b.max_vocab)

    def train_config(self) -> TrainConfig:
        b = self.bilstm
        return TrainConfig(
            epochs=b.epochs,
            learning_rate=b.learning_rate,
            momentum=b.momentum,
            batch_size=b.batch_size,
            gradient_clip_norm=b.gradient_clip_norm,
            seed=self.seed,
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready echo of the config."""
        return self.model_dump(mode="json")

    def validate_files(self, models: Sequence[str] = MODEL_NAMES, require_data: bool = True) -> None:
        """Fail fast on any referenced file that does not exist."""
        checks = [("preprocess.stopwords", self.preprocess.stopwords),
                  ("preprocess.contractions", self.preprocess.contractions),
                  ("preprocess.emoticons", self.preprocess.emoticons)]
        if "lexicon-rf" in models:
            checks.append(("preprocess.lexicon", self.preprocess.lexicon))
        if require_data:
            if self.data.path is None:
                raise ConfigError("no dataset given: set data.path or pass --data")
            checks.append(("data.path", self.data.path))
        for key, path in checks:
            if path is not None and not Path(path).is_file():
                raise ConfigError(f"{key}: file not found: {path}")


def _deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(base.get(key), dict):
            _deep_merge(base[key], value)
        else:
            base[key] = value
    return base


def _read_config_file(path: Path) -> Dict[str, Any]:
    suffix = path.suffix.lower()
    try:
        if suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        if suffix == ".json":
            with open(path, encoding="utf-8") as f:
                loaded = json.load(f)
            if not isinstance(loaded, dict):
                raise ConfigError(f"{path}: top level must be an object")
            return loaded
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}: config must be .toml or .json")


def parse_override(assignment: str) -> Tuple[str, Any]:
    """``key.path=value``; the value is read as JSON when it parses, else as a string."""
    key, sep, raw = assignment.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override must look like key.path=value, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def apply_override(config: Dict[str, Any], key: str, value: Any) -> None:
    *parents, leaf = key.split(".")
    node = config
    for part in parents:
        child = node.get(part)
        if not isinstance(child, dict):
            raise ConfigError(f"unknown config section {key!r}")
        node = child
    if leaf not in node:
        raise ConfigError(f"unknown config key {key!r}")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"{key!r} is a section; override one of its keys")
    node[leaf] = value


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """Merge a config file and dotted-key overrides over DEFAULTS, then validate.

    Relative file paths inside a config file are taken relative to that file.
    The seed has no default: the file or the overrides must set it.
    """
    merged = copy.deepcopy(DEFAULTS)
    if path is not None:
        path = Path(path)
        loaded = _read_config_file(path)
        for section, key in _PATH_KEYS:
            value = loaded.get(section, {}).get(key) if isinstance(loaded.get(section), dict) else None
            if isinstance(value, str) and not Path(value).is_absolute():
                loaded[section][key] = str(path.parent / value)
        _deep_merge(merged, loaded)
    for key, value in (overrides or {}).items():
        apply_override(merged, key, value)
    if merged.get("seed") is None:
        raise ConfigError("seed is required: set 'seed' in the config file or pass --seed")
    try:
        config = ExperimentConfig.model_validate(merged)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"invalid configuration: {problems}") from None
    logger.debug("config loaded from %s", path or "defaults")
    return config


def save_config(config: Union[ExperimentConfig, Mapping[str, Any]], path: Union[str, Path]) -> Path:
    """Write a config as JSON."""
    data = config.to_dict() if isinstance(config, ExperimentConfig) else dict(config)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False)
        f.write("\n")
    return path

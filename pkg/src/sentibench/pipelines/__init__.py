"""Classification pipelines: one per model family."""
from pathlib import Path
from typing import Dict, Type, Union

from ..artifacts import load_artifact
from ..config import ExperimentConfig
from ..errors import ArtifactError, ConfigError
from .base import BasePipeline
from .bilstm import BiLstmPipeline
from .lexicon_forest import LexiconForestPipeline
from .naive_bayes import NaiveBayesPipeline


# Pipeline registry, in comparison-table order
_PIPELINES: Dict[str, Type[BasePipeline]] = {
    'nb': NaiveBayesPipeline,
    'lexicon-rf': LexiconForestPipeline,
    'bilstm': BiLstmPipeline,
}


def get_pipeline(name: str, config: ExperimentConfig, **kwargs) -> BasePipeline:
    """Factory to create an untrained pipeline by name.

    Args:
        name: Pipeline name ('nb', 'lexicon-rf', 'bilstm')
        config: Experiment configuration holding the model's hyperparameters
        **kwargs: Passed to the pipeline constructor

    Raises:
        ConfigError: If the pipeline name is not recognized

    Examples:
        >>> pipeline = get_pipeline('nb', load_config('exp.json'))
        >>> pipeline.fit(train_docs).predict(["what a great day"])
    """
    name_lower = name.lower()

    if name_lower not in _PIPELINES:
        available = ', '.join(_PIPELINES.keys())
        raise ConfigError(
            f"Unknown model '{name}'. Available models: {available}"
        )

    return _PIPELINES[name_lower](config, **kwargs)


def list_pipelines() -> list:
    """List all available pipeline names."""
    return list(_PIPELINES.keys())


def load_pipeline(path: Union[str, Path], config: ExperimentConfig) -> BasePipeline:
    """Restore whichever pipeline an artifact holds."""
    kind = load_artifact(path).kind
    if kind not in _PIPELINES:
        raise ArtifactError(f"{path} holds an unknown model kind {kind!r}")
    return _PIPELINES[kind].load(path, config)


__all__ = [
    'BasePipeline',
    'NaiveBayesPipeline',
    'LexiconForestPipeline',
    'BiLstmPipeline',
    'get_pipeline',
    'list_pipelines',
    'load_pipeline',
]

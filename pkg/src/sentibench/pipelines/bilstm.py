"""Frequency tokenizer + bidirectional LSTM."""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..artifacts import Artifact, prefixed
from ..bilstm import (
    BiLstmModel,
    EpochRecord,
    SeqTokenizer,
    encode_batch,
    fit_tokenizer,
    model_predict,
    train_model,
)
from ..corpus import NUM_CLASSES, LabeledDocument, SentimentLabel, labels_to_indices, split_indices
from ..errors import ModelError
from ..seeding import STREAM_VALIDATION
from .base import BasePipeline, ProgressCallback

logger = logging.getLogger(__name__)


class BiLstmPipeline(BasePipeline):
    kind = "bilstm"
    display_name = "BiLSTM"

    tokenizer: Optional[SeqTokenizer] = None
    model: Optional[BiLstmModel] = None

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.history: List[EpochRecord] = []

    def training_units(self) -> int:
        return self.config.bilstm.epochs

    def _validation_split(self, docs: Sequence[LabeledDocument]):
        """Carve a validation set out of the training documents, if configured."""
        split = self.config.validation_split_config()
        if split is None:
            return list(docs), []
        labels = [d.label for d in docs]
        train_idx, val_idx = split_indices(labels, split, stream=STREAM_VALIDATION)
        kept = np.bincount(labels_to_indices([labels[i] for i in train_idx]), minlength=NUM_CLASSES)
        if len(val_idx) == 0 or (kept == 0).any():
            logger.warning("training set too small for a validation split; using the last epoch")
            return list(docs), []
        return [docs[i] for i in train_idx], [docs[i] for i in val_idx]

    def fit(
        self,
        docs: Sequence[LabeledDocument],
        n_jobs: int = 1,
        on_progress: Optional[ProgressCallback] = None,
    ) -> "BiLstmPipeline":
        dims = self.config.model_dims()
        train_docs, val_docs = self._validation_split(docs)
        train_tokens = self.tokens([d.text for d in train_docs])
        self.tokenizer = fit_tokenizer(train_tokens, max_vocab=dims.max_vocab)
        X_train = encode_batch(train_tokens, self.tokenizer, dims.max_len)
        validation = None
        if val_docs:
            X_val = encode_batch(self.tokens([d.text for d in val_docs]), self.tokenizer, dims.max_len)
            validation = (X_val, [d.label for d in val_docs])

        total = self.config.bilstm.epochs

        def on_epoch(record: EpochRecord) -> None:
            if on_progress is not None:
                on_progress(record.epoch, total)

        self.model, self.history = train_model(
            (X_train, [d.label for d in train_docs]),
            validation,
            self.tokenizer.vocab_size,
            dims,
            self.config.train_config(),
            on_epoch=on_epoch,
        )
        logger.info(
            "bilstm: vocabulary %d, %d train / %d validation documents",
            self.tokenizer.vocab_size, len(train_docs), len(val_docs),
        )
        return self

    def predict(self, texts: Sequence[str]) -> List[SentimentLabel]:
        if self.model is None:
            raise ModelError("pipeline is not fitted; train it or load an artifact", module=self.kind)
        return model_predict(self.model, self.tokens(texts), self.tokenizer, self.model.max_len)

    def _arrays(self) -> Dict[str, np.ndarray]:
        return {**prefixed("tokenizer", self.tokenizer.to_arrays()), **prefixed("model", self.model.to_arrays())}

    def _meta(self):
        return {
            "history": [
                {
                    "epoch": r.epoch,
                    "train_loss": r.train_loss,
                    "train_accuracy": r.train_accuracy,
                    "val_loss": r.val_loss,
                    "val_accuracy": r.val_accuracy,
                }
                for r in self.history
            ]
        }

    def _restore(self, artifact: Artifact) -> None:
        self.tokenizer = SeqTokenizer.from_arrays(artifact.subset("tokenizer"))
        self.model = BiLstmModel.from_arrays(artifact.subset("model"))
        self.history = [EpochRecord(**r) for r in artifact.meta.get("history", [])]

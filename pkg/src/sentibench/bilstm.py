"""Bidirectional LSTM sentence classifier in numpy.

Tokens are indexed by frequency, post-padded with 0 and embedded; one LSTM
reads the sequence left to right and another right to left. Their final
hidden states are concatenated and fed to a dense softmax head. Training is
plain backpropagation through time with SGD + momentum on categorical
cross-entropy.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_softmax, softmax

from .corpus import NUM_CLASSES, SentimentLabel, label_from_index, labels_to_indices
from .errors import ModelError, TrainingDivergedError
from .seeding import STREAM_BILSTM_INIT, STREAM_BILSTM_SHUFFLE, check_seed, make_rng

logger = logging.getLogger(__name__)

PAD = 0
PREDICT_BATCH = 256


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.1
    momentum: float = 0.8
    batch_size: int = 64
    gradient_clip_norm: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ModelError(f"epochs must be >= 1, got {self.epochs}", module="bilstm")
        if not self.learning_rate > 0:
            raise ModelError(f"learning_rate must be > 0, got {self.learning_rate}", module="bilstm")
        if not 0 <= self.momentum < 1:
            raise ModelError(f"momentum must be in [0, 1), got {self.momentum}", module="bilstm")
        if self.batch_size < 1:
            raise ModelError(f"batch_size must be >= 1, got {self.batch_size}", module="bilstm")
        if not self.gradient_clip_norm > 0:
            raise ModelError(f"gradient_clip_norm must be > 0, got {self.gradient_clip_norm}", module="bilstm")
        check_seed(self.seed)


@dataclass(frozen=True)
class ModelDims:
    embedding_dim: int = 64
    hidden_dim: int = 64
    max_len: int = 48
    max_vocab: int = 20000

    def __post_init__(self):
        for name in ("embedding_dim", "hidden_dim", "max_len", "max_vocab"):
            if getattr(self, name) < 1:
                raise ModelError(f"{name} must be >= 1, got {getattr(self, name)}", module="bilstm")


# --- Tokenizer ---

@dataclass(frozen=True, eq=False)
class SeqTokenizer:
    """word -> index, indices 1..V; 0 is padding and never assigned."""

    word_index: Dict[str, int]
    max_vocab: int = 20000

    @property
    def vocab_size(self) -> int:
        return len(self.word_index)

    def words(self) -> List[str]:
        return sorted(self.word_index, key=self.word_index.__getitem__)

    def to_arrays(self) -> Dict[str, np.ndarray]:
        return {"words": np.array(self.words(), dtype=str), "max_vocab": np.array(self.max_vocab, dtype=np.int64)}

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> "SeqTokenizer":
        words = [str(w) for w in arrays["words"]]
        return cls({w: i for i, w in enumerate(words, start=1)}, int(arrays["max_vocab"]))


def fit_tokenizer(docs: Sequence[Sequence[str]], max_vocab: int = 20000) -> SeqTokenizer:
    """Index the ``max_vocab`` most frequent words; ties go to the word seen first."""
    if max_vocab < 1:
        raise ModelError(f"max_vocab must be >= 1, got {max_vocab}", module="bilstm")
    counts: Counter = Counter()
    for doc in docs:
        counts.update(doc)
    if not counts:
        raise ModelError("cannot fit a tokenizer on an empty corpus", module="bilstm")
    # Counter preserves insertion order, so a stable sort keeps first-occurrence order on ties.
    ranked = sorted(counts, key=lambda w: -counts[w])[:max_vocab]
    return SeqTokenizer({w: i for i, w in enumerate(ranked, start=1)}, max_vocab)


def encode_and_pad(doc: Sequence[str], tok: SeqTokenizer, maxlen: int) -> np.ndarray:
    """Known-word indices, truncated to ``maxlen`` then post-padded with 0."""
    if maxlen < 1:
        raise ModelError(f"maxlen must be >= 1, got {maxlen}", module="bilstm")
    ids = [tok.word_index[w] for w in doc if w in tok.word_index][:maxlen]
    out = np.zeros(maxlen, dtype=np.int64)
    out[: len(ids)] = ids
    return out


def encode_batch(docs: Sequence[Sequence[str]], tok: SeqTokenizer, maxlen: int) -> np.ndarray:
    if not docs:
        return np.zeros((0, maxlen), dtype=np.int64)
    return np.stack([encode_and_pad(d, tok, maxlen) for d in docs])


# --- Parameters ---

@dataclass(eq=False)
class LstmParams:
    """One direction; rows of W, U and b are stacked in gate order i, f, g, o."""

    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.U.shape[1]

    def copy(self) -> "LstmParams":
        return LstmParams(self.W.copy(), self.U.copy(), self.b.copy())


@dataclass(eq=False)
class BiLstmModel:
    embedding: np.ndarray
    forward: LstmParams
    backward: LstmParams
    head_W: np.ndarray
    head_b: np.ndarray
    max_len: int

    @property
    def embedding_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.forward.hidden_dim

    @property
    def vocab_size(self) -> int:
        return self.embedding.shape[0] - 1

    def parameters(self) -> Dict[str, np.ndarray]:
        """Named views of every trainable tensor; updating them updates the model."""
        return {
            "embedding": self.embedding,
            "forward.W": self.forward.W,
            "forward.U": self.forward.U,
            "forward.b": self.forward.b,
            "backward.W": self.backward.W,
            "backward.U": self.backward.U,
            "backward.b": self.backward.b,
            "head.W": self.head_W,
            "head.b": self.head_b,
        }

    def copy(self) -> "BiLstmModel":
        return BiLstmModel(
            self.embedding.copy(), self.forward.copy(), self.backward.copy(),
            self.head_W.copy(), self.head_b.copy(), self.max_len,
        )

    def to_arrays(self) -> Dict[str, np.ndarray]:
        arrays = {name: np.ascontiguousarray(value, dtype=np.float64) for name, value in self.parameters().items()}
        arrays["max_len"] = np.array(self.max_len, dtype=np.int64)
        return arrays

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> "BiLstmModel":
        def get(name):
            return np.array(arrays[name], dtype=np.float64)

        return cls(
            embedding=get("embedding"),
            forward=LstmParams(get("forward.W"), get("forward.U"), get("forward.b")),
            backward=LstmParams(get("backward.W"), get("backward.U"), get("backward.b")),
            head_W=get("head.W"),
            head_b=get("head.b"),
            max_len=int(arrays["max_len"]),
        )


def _glorot(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-limit, limit, size=(rows, cols))


def _init_direction(rng: np.random.Generator, E: int, H: int) -> LstmParams:
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0  # forget gate
    return LstmParams(_glorot(rng, 4 * H, E), _glorot(rng, 4 * H, H), b)


def init_model(vocab_size: int, dims: ModelDims = ModelDims(), seed: int = 0) -> BiLstmModel:
    rng = make_rng(seed, STREAM_BILSTM_INIT)
    E, H = dims.embedding_dim, dims.hidden_dim
    embedding = _glorot(rng, vocab_size + 1, E)
    embedding[PAD] = 0.0
    forward = _init_direction(rng, E, H)
    backward = _init_direction(rng, E, H)
    head_W = _glorot(rng, NUM_CLASSES, 2 * H)
    return BiLstmModel(embedding, forward, backward, head_W, np.zeros(NUM_CLASSES), dims.max_len)


# --- Forward pass ---

def lstm_cell_step(
    x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray, params: LstmParams
) -> Tuple[np.ndarray, np.ndarray]:
    """One LSTM step; works on single vectors or on (B, .) batches."""
    h, c, _ = _cell_step(x, h_prev, c_prev, params)
    return h, c


def _cell_step(x, h_prev, c_prev, p: LstmParams):
    H = p.hidden_dim
    z = x @ p.W.T + h_prev @ p.U.T + p.b
    i = expit(z[..., :H])
    f = expit(z[..., H:2 * H])
    g = np.tanh(z[..., 2 * H:3 * H])
    o = expit(z[..., 3 * H:])
    c = f * c_prev + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    return h, c, (i, f, g, o, tanh_c)


@dataclass
class DirectionCache:
    steps: List[int]
    inputs: List[np.ndarray] = field(default_factory=list)
    h_prev: List[np.ndarray] = field(default_factory=list)
    c_prev: List[np.ndarray] = field(default_factory=list)
    gates: List[tuple] = field(default_factory=list)


def run_direction(embedded: np.ndarray, params: LstmParams, reverse: bool = False) -> Tuple[np.ndarray, DirectionCache]:
    """Run one LSTM over (B, L, E) inputs; return the final hidden state (B, H)."""
    B, L, _ = embedded.shape
    H = params.hidden_dim
    steps = list(range(L - 1, -1, -1)) if reverse else list(range(L))
    cache = DirectionCache(steps=steps)
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in steps:
        x = embedded[:, t, :]
        cache.inputs.append(x)
        cache.h_prev.append(h)
        cache.c_prev.append(c)
        h, c, gates = _cell_step(x, h, c, params)
        cache.gates.append(gates)
    return h, cache


@dataclass
class ForwardCache:
    batch: np.ndarray
    representation: np.ndarray
    log_probs: np.ndarray
    forward: DirectionCache
    backward: DirectionCache


def _check_batch(model: BiLstmModel, batch) -> np.ndarray:
    batch = np.asarray(batch, dtype=np.int64)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.ndim != 2 or batch.shape[1] != model.max_len:
        raise ModelError(
            f"sequences must have length {model.max_len}, got shape {batch.shape}", module="bilstm"
        )
    if batch.size and (batch.min() < 0 or batch.max() > model.vocab_size):
        raise ModelError("token index out of range for the embedding table", module="bilstm")
    return batch


def model_forward(model: BiLstmModel, batch) -> Tuple[np.ndarray, ForwardCache]:
    """Class probabilities (B, 3) and the activations needed for backprop."""
    batch = _check_batch(model, batch)
    embedded = model.embedding[batch]
    h_fwd, fwd_cache = run_direction(embedded, model.forward, reverse=False)
    h_bwd, bwd_cache = run_direction(embedded, model.backward, reverse=True)
    representation = np.concatenate([h_fwd, h_bwd], axis=1)
    logits = representation @ model.head_W.T + model.head_b
    log_probs = log_softmax(logits, axis=1)
    probs = softmax(logits, axis=1)
    return probs, ForwardCache(batch, representation, log_probs, fwd_cache, bwd_cache)


# --- Backward pass ---

def _backprop_direction(
    dh_final: np.ndarray, cache: DirectionCache, params: LstmParams, d_embedded: np.ndarray
) -> Dict[str, np.ndarray]:
    dW = np.zeros_like(params.W)
    dU = np.zeros_like(params.U)
    db = np.zeros_like(params.b)
    dh = dh_final
    dc = np.zeros_like(dh_final)
    for k in range(len(cache.steps) - 1, -1, -1):
        i, f, g, o, tanh_c = cache.gates[k]
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        dz = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * cache.c_prev[k] * f * (1.0 - f),
                dc * i * (1.0 - g**2),
                do * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += dz.T @ cache.inputs[k]
        dU += dz.T @ cache.h_prev[k]
        db += dz.sum(axis=0)
        d_embedded[:, cache.steps[k], :] += dz @ params.W
        dh = dz @ params.U
        dc = dc * f
    return {"W": dW, "U": dU, "b": db}


def loss_and_gradients(model: BiLstmModel, batch, onehot: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and its gradient for every parameter.

    A non-finite loss is returned as-is; the caller decides how to fail.
    """
    probs, cache = model_forward(model, batch)
    onehot = np.asarray(onehot, dtype=np.float64)
    if onehot.shape != probs.shape:
        raise ModelError(f"labels must be one-hot of shape {probs.shape}, got {onehot.shape}", module="bilstm")
    B = probs.shape[0]
    loss = float(-np.sum(onehot * cache.log_probs) / B)

    d_logits = (probs - onehot) / B
    grads = {
        "head.W": d_logits.T @ cache.representation,
        "head.b": d_logits.sum(axis=0),
    }
    d_rep = d_logits @ model.head_W
    H = model.hidden_dim
    d_embedded = np.zeros((B, model.max_len, model.embedding_dim))
    for name, params, dcache, dh in (
        ("forward", model.forward, cache.forward, d_rep[:, :H]),
        ("backward", model.backward, cache.backward, d_rep[:, H:]),
    ):
        for key, value in _backprop_direction(dh, dcache, params, d_embedded).items():
            grads[f"{name}.{key}"] = value

    d_embedding = np.zeros_like(model.embedding)
    np.add.at(d_embedding, cache.batch, d_embedded)
    d_embedding[PAD] = 0.0
    grads["embedding"] = d_embedding
    return loss, grads


# --- Optimization ---

def global_norm(grads: Mapping[str, np.ndarray]) -> float:
    return float(np.sqrt(sum(np.sum(g * g) for g in grads.values())))


def sgd_momentum_step(
    params: Dict[str, np.ndarray],
    grads: Mapping[str, np.ndarray],
    velocity: Dict[str, np.ndarray],
    config: TrainConfig,
) -> Tuple[Dict[str, np.ndarray], Dict[str, np.ndarray]]:
    """Clip to the global norm, then v <- mu*v + g and theta <- theta - lr*v, in place."""
    norm = global_norm(grads)
    scale = config.gradient_clip_norm / norm if norm > config.gradient_clip_norm else 1.0
    for name, value in params.items():
        v = velocity[name]
        v *= config.momentum
        v += scale * grads[name]
        value -= config.learning_rate * v
    return params, velocity


# --- Training ---

@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: Optional[float] = None
    val_accuracy: Optional[float] = None


def one_hot(y_idx: np.ndarray) -> np.ndarray:
    out = np.zeros((len(y_idx), NUM_CLASSES))
    out[np.arange(len(y_idx)), y_idx] = 1.0
    return out


def predict_log_proba(model: BiLstmModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    if len(X) == 0:
        return np.zeros((0, NUM_CLASSES))
    return np.concatenate(
        [model_forward(model, X[s:s + PREDICT_BATCH])[1].log_probs for s in range(0, len(X), PREDICT_BATCH)]
    )


def predict_proba(model: BiLstmModel, X: np.ndarray) -> np.ndarray:
    return np.exp(predict_log_proba(model, X))


def _loss_and_accuracy(model: BiLstmModel, X: np.ndarray, y_idx: np.ndarray) -> Tuple[float, float]:
    log_probs = predict_log_proba(model, X)
    loss = float(-np.mean(log_probs[np.arange(len(y_idx)), y_idx]))
    return loss, float(np.mean(np.argmax(log_probs, axis=1) == y_idx))


def train_model(
    train: Tuple[np.ndarray, Sequence],
    validation: Optional[Tuple[np.ndarray, Sequence]],
    vocab_size: int,
    dims: ModelDims = ModelDims(),
    config: TrainConfig = TrainConfig(),
    on_epoch: Optional[Callable[[EpochRecord], None]] = None,
) -> Tuple[BiLstmModel, List[EpochRecord]]:
    """Mini-batch SGD over encoded sequences.

    Returns the parameters of the epoch with the best validation accuracy
    (first one on ties), or of the last epoch when there is no validation set.
    """
    X, y = train
    X = np.asarray(X, dtype=np.int64)
    y_idx = labels_to_indices(y)
    if len(X) == 0:
        raise ModelError("cannot train on an empty training set", module="bilstm")
    if len(X) != len(y_idx):
        raise ModelError(f"X has {len(X)} rows but y has {len(y_idx)} labels", module="bilstm")
    missing = [int(label_from_index(c)) for c in range(NUM_CLASSES) if not np.any(y_idx == c)]
    if missing:
        raise ModelError(f"training labels must cover every class; missing {missing}", module="bilstm")
    if validation is not None and len(validation[0]) == 0:
        validation = None
    if validation is not None:
        X_val = np.asarray(validation[0], dtype=np.int64)
        y_val = labels_to_indices(validation[1])

    model = init_model(vocab_size, dims, config.seed)
    _check_batch(model, X[:1])
    params = model.parameters()
    velocity = {name: np.zeros_like(value) for name, value in params.items()}
    targets = one_hot(y_idx)
    history: List[EpochRecord] = []
    best: Optional[BiLstmModel] = None
    best_accuracy = -1.0

    for epoch in range(1, config.epochs + 1):
        order = make_rng(config.seed, STREAM_BILSTM_SHUFFLE, epoch).permutation(len(X))
        for batch_number, start in enumerate(range(0, len(X), config.batch_size), start=1):
            rows = order[start:start + config.batch_size]
            loss, grads = loss_and_gradients(model, X[rows], targets[rows])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, batch_number, loss)
            sgd_momentum_step(params, grads, velocity, config)

        train_loss, train_accuracy = _loss_and_accuracy(model, X, y_idx)
        if not np.isfinite(train_loss):
            raise TrainingDivergedError(epoch, batch_number, train_loss)
        record = EpochRecord(epoch, train_loss, train_accuracy)
        if validation is not None:
            val_loss, val_accuracy = _loss_and_accuracy(model, X_val, y_val)
            record = EpochRecord(epoch, train_loss, train_accuracy, val_loss, val_accuracy)
            if val_accuracy > best_accuracy:
                best_accuracy = val_accuracy
                best = model.copy()
        history.append(record)
        logger.debug(
            "epoch %d: train loss %.4f acc %.4f%s", epoch, train_loss, train_accuracy,
            "" if record.val_accuracy is None else f", val loss {record.val_loss:.4f} acc {record.val_accuracy:.4f}",
        )
        if on_epoch is not None:
            on_epoch(record)

    return (best if best is not None else model), history


def model_predict(model: BiLstmModel, docs: Sequence[Sequence[str]], tok: SeqTokenizer, maxlen: int) -> List[SentimentLabel]:
    """Argmax label per document; ties go to the smaller label."""
    probs = predict_proba(model, encode_batch(docs, tok, maxlen))
    return [label_from_index(i) for i in np.argmax(probs, axis=1)]

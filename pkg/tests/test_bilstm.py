"""Tests for the tokenizer, LSTM cell, BiLSTM forward/backward pass and training loop."""
import math

import numpy as np
import pytest

from sentibench import bilstm
from sentibench.bilstm import (
    BiLstmModel,
    LstmParams,
    ModelDims,
    SeqTokenizer,
    TrainConfig,
    encode_and_pad,
    encode_batch,
    fit_tokenizer,
    init_model,
    loss_and_gradients,
    lstm_cell_step,
    model_forward,
    model_predict,
    one_hot,
    run_direction,
    sgd_momentum_step,
    train_model,
)
from sentibench.corpus import SentimentLabel, labels_to_indices
from sentibench.errors import ModelError, TrainingDivergedError

CLASS_WORDS = {-1: ["awful", "bad", "sad"], 0: ["train", "noon", "desk"], 1: ["great", "happy", "fun"]}


def _toy_corpus(n, seed=0, length=5):
    """Token lists whose words alone identify the class."""
    rng = np.random.default_rng(seed)
    labels = [(-1, 0, 1)[i % 3] for i in range(n)]
    docs = [[str(w) for w in rng.choice(CLASS_WORDS[label], size=length)] for label in labels]
    return docs, labels


def _random_model(vocab_size=6, E=3, H=4, L=5, seed=0):
    model = init_model(vocab_size, ModelDims(embedding_dim=E, hidden_dim=H, max_len=L), seed=seed)
    rng = np.random.default_rng(seed + 100)
    model.head_b[:] = rng.normal(0, 0.3, size=3)
    model.forward.b[:] += rng.normal(0, 0.3, size=4 * H)
    model.backward.b[:] += rng.normal(0, 0.3, size=4 * H)
    return model


class TestTokenizer:
    """Test frequency indexing and padding."""

    def test_frequency_then_first_occurrence(self):
        tok = fit_tokenizer([["good", "good", "bad"], ["bad", "sad"]])
        assert tok.word_index == {"good": 1, "bad": 2, "sad": 3}
        assert tok.vocab_size == 3

    def test_max_vocab_cap(self):
        tok = fit_tokenizer([["good", "good", "bad"], ["bad", "sad"]], max_vocab=1)
        assert tok.word_index == {"good": 1}

    @pytest.mark.parametrize("docs", [[], [[], []]])
    def test_empty_corpus(self, docs):
        with pytest.raises(ModelError, match="empty"):
            fit_tokenizer(docs)

    def test_encode_and_pad(self):
        tok = fit_tokenizer([["good", "good", "bad"], ["bad", "sad"]])
        assert encode_and_pad(["good", "sad"], tok, 4).tolist() == [1, 3, 0, 0]
        assert encode_and_pad(["zzz"], tok, 2).tolist() == [0, 0]
        assert encode_and_pad(["sad", "bad", "good", "bad", "sad", "good"], tok, 4).tolist() == [3, 2, 1, 2]

    def test_encode_batch_shape(self):
        tok = SeqTokenizer({"a": 1, "b": 2})
        assert encode_batch([["a"], ["b", "a"]], tok, 3).tolist() == [[1, 0, 0], [2, 1, 0]]
        assert encode_batch([], tok, 3).shape == (0, 3)

    def test_arrays_restore_indices(self):
        tok = fit_tokenizer([["x", "y", "y"], ["z"]])
        assert SeqTokenizer.from_arrays(tok.to_arrays()).word_index == tok.word_index


class TestCellStep:
    """Test the LSTM gate equations."""

    def test_all_zero(self):
        params = LstmParams(np.zeros((8, 3)), np.zeros((8, 2)), np.zeros(8))
        h, c = lstm_cell_step(np.zeros(3), np.zeros(2), np.zeros(2), params)
        assert h.tolist() == [0.0, 0.0]
        assert c.tolist() == [0.0, 0.0]

    def test_scalar_case(self):
        params = LstmParams(np.ones((4, 1)), np.ones((4, 1)), np.zeros(4))
        h, c = lstm_cell_step(np.array([1.0]), np.zeros(1), np.zeros(1), params)
        sigma = 1 / (1 + math.exp(-1))
        assert c[0] == pytest.approx(sigma * math.tanh(1), abs=1e-12)
        assert c[0] == pytest.approx(0.5568, abs=1e-4)
        assert h[0] == pytest.approx(0.3696, abs=1e-4)

    def test_saturated_forget_gate_carries_memory(self):
        b = np.array([-50.0, 50.0, 0.0, 0.0])
        params = LstmParams(np.zeros((4, 1)), np.zeros((4, 1)), b)
        _, c = lstm_cell_step(np.zeros(1), np.zeros(1), np.array([0.7]), params)
        assert c[0] == pytest.approx(0.7, abs=1e-12)


class TestForward:
    """Test the bidirectional forward pass."""

    def test_zero_head_is_uniform(self):
        model = _random_model()
        model.head_W[:] = 0.0
        model.head_b[:] = 0.0
        probs, _ = model_forward(model, [[1, 2, 3, 0, 0], [4, 5, 6, 1, 2]])
        np.testing.assert_allclose(probs, 1 / 3, rtol=0, atol=1e-15)

    def test_rows_are_distributions(self):
        model = _random_model()
        batch = np.random.default_rng(3).integers(0, 7, size=(10, 5))
        probs, cache = model_forward(model, batch)
        assert np.all(probs >= 0)
        assert np.all(np.abs(probs.sum(axis=1) - 1.0) < 1e-9)
        assert np.all(np.abs(cache.representation) <= 1.0)

    def test_batch_independence(self):
        model = _random_model()
        batch = np.array([[1, 2, 3, 0, 0], [6, 5, 4, 3, 2], [2, 2, 0, 0, 0]])
        together, _ = model_forward(model, batch)
        for i in range(len(batch)):
            alone, _ = model_forward(model, batch[i])
            np.testing.assert_allclose(alone[0], together[i], rtol=0, atol=1e-12)

    def test_mirrored_directions(self):
        model = _random_model()
        embedded = model.embedding[np.array([[1, 2, 3, 4, 5]])]
        forward_on_reversed, _ = run_direction(embedded[:, ::-1, :], model.backward, reverse=False)
        backward_on_original, _ = run_direction(embedded, model.backward, reverse=True)
        np.testing.assert_allclose(forward_on_reversed, backward_on_original, rtol=0, atol=1e-12)

        mirrored = BiLstmModel(
            model.embedding, model.forward, model.forward.copy(), model.head_W, model.head_b, model.max_len
        )
        H = mirrored.hidden_dim
        _, original = model_forward(mirrored, [[1, 2, 3, 4, 5]])
        _, reversed_ = model_forward(mirrored, [[5, 4, 3, 2, 1]])
        np.testing.assert_allclose(reversed_.representation[:, :H], original.representation[:, H:], atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ModelError, match="length"):
            model_forward(_random_model(), [[1, 2, 3]])

    def test_index_out_of_range(self):
        with pytest.raises(ModelError, match="range"):
            model_forward(_random_model(vocab_size=6), [[7, 0, 0, 0, 0]])


class TestLossAndGradients:
    """Test cross-entropy and backpropagation through time."""

    def test_uniform_prediction_costs_ln3(self):
        model = _random_model()
        model.head_W[:] = 0.0
        model.head_b[:] = 0.0
        loss, _ = loss_and_gradients(model, [[1, 2, 3, 0, 0]], one_hot(np.array([2])))
        assert loss == pytest.approx(math.log(3), abs=1e-12)

    def test_certain_prediction_costs_nothing(self):
        model = _random_model()
        model.head_W[:] = 0.0
        model.head_b[:] = [0.0, 0.0, 1000.0]
        loss, _ = loss_and_gradients(model, [[1, 2, 3, 0, 0]], one_hot(np.array([2])))
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_gradients_match_finite_differences(self):
        model = _random_model(vocab_size=6, E=3, H=4, L=5, seed=1)
        batch = np.array([[1, 2, 3, 4, 0], [5, 6, 2, 0, 0]])
        targets = one_hot(np.array([0, 2]))
        _, grads = loss_and_gradients(model, batch, targets)
        eps = 1e-4
        for name, tensor in model.parameters().items():
            numeric = np.zeros_like(tensor)
            for idx in np.ndindex(tensor.shape):
                if name == "embedding" and idx[0] == 0:
                    continue  # padding row is frozen
                saved = tensor[idx]
                tensor[idx] = saved + eps
                plus, _ = loss_and_gradients(model, batch, targets)
                tensor[idx] = saved - eps
                minus, _ = loss_and_gradients(model, batch, targets)
                tensor[idx] = saved
                numeric[idx] = (plus - minus) / (2 * eps)
            analytic = grads[name]
            denominator = np.linalg.norm(analytic) + np.linalg.norm(numeric)
            assert denominator > 0, name
            assert np.linalg.norm(analytic - numeric) / denominator < 1e-4, name

    def test_padding_row_gradient_is_zero(self):
        model = _random_model()
        _, grads = loss_and_gradients(model, [[1, 0, 0, 0, 0]], one_hot(np.array([1])))
        assert not grads["embedding"][0].any()

    def test_label_shape_mismatch(self):
        with pytest.raises(ModelError, match="one-hot"):
            loss_and_gradients(_random_model(), [[1, 0, 0, 0, 0]], np.ones((1, 2)))


class TestSgdMomentum:
    """Test the clipped momentum update."""

    def _step(self, params, grads, velocity, **kwargs):
        config = TrainConfig(learning_rate=0.1, momentum=0.8, **kwargs)
        return sgd_momentum_step(params, grads, velocity, config)

    def test_two_steps(self):
        params = {"w": np.array([0.0])}
        velocity = {"w": np.array([0.0])}
        self._step(params, {"w": np.array([1.0])}, velocity)
        assert velocity["w"][0] == pytest.approx(1.0)
        assert params["w"][0] == pytest.approx(-0.1)
        self._step(params, {"w": np.array([1.0])}, velocity)
        assert velocity["w"][0] == pytest.approx(1.8)
        assert params["w"][0] == pytest.approx(-0.28)

    def test_zero_gradient_is_a_fixed_point(self):
        params = {"w": np.array([0.5, -0.5])}
        velocity = {"w": np.zeros(2)}
        self._step(params, {"w": np.zeros(2)}, velocity)
        assert params["w"].tolist() == [0.5, -0.5]

    def test_global_norm_clipping(self):
        params = {"a": np.array([0.0]), "b": np.array([0.0])}
        velocity = {"a": np.zeros(1), "b": np.zeros(1)}
        self._step(params, {"a": np.array([6.0]), "b": np.array([8.0])}, velocity, gradient_clip_norm=5.0)
        assert velocity["a"][0] == pytest.approx(3.0)
        assert velocity["b"][0] == pytest.approx(4.0)

    @pytest.mark.parametrize(
        "kwargs", [{"learning_rate": 0.0}, {"momentum": 1.0}, {"batch_size": 0}, {"epochs": 0}, {"gradient_clip_norm": 0}]
    )
    def test_invalid_config(self, kwargs):
        with pytest.raises(ModelError):
            TrainConfig(**kwargs)

    def test_defaults(self):
        config = TrainConfig()
        assert (config.epochs, config.learning_rate, config.momentum, config.batch_size) == (20, 0.1, 0.8, 64)


class TestTraining:
    """Test the mini-batch training loop."""

    DIMS = ModelDims(embedding_dim=8, hidden_dim=8, max_len=5)

    def _encoded(self, n, seed=0):
        docs, labels = _toy_corpus(n, seed)
        tok = fit_tokenizer(docs)
        return docs, labels, tok, encode_batch(docs, tok, self.DIMS.max_len)

    def test_overfits_a_toy_set(self):
        docs, labels, tok, X = self._encoded(32)
        config = TrainConfig(epochs=40, batch_size=8, seed=0)
        model, history = train_model((X, labels), None, tok.vocab_size, self.DIMS, config)
        assert len(history) == 40
        assert history[-1].train_accuracy >= 0.95
        assert history[-1].train_loss < history[0].train_loss
        predicted = model_predict(model, docs, tok, self.DIMS.max_len)
        assert np.mean([p == l for p, l in zip(predicted, labels)]) >= 0.95

    def test_same_seed_same_parameters(self):
        _, labels, tok, X = self._encoded(24, seed=1)
        config = TrainConfig(epochs=3, batch_size=5, seed=9)
        a, _ = train_model((X, labels), None, tok.vocab_size, self.DIMS, config)
        b, _ = train_model((X, labels), None, tok.vocab_size, self.DIMS, config)
        for name, value in a.parameters().items():
            np.testing.assert_array_equal(value, b.parameters()[name])

    def test_padding_row_stays_zero(self):
        _, labels, tok, X = self._encoded(24, seed=2)
        X[:, 3:] = 0
        model, _ = train_model((X, labels), None, tok.vocab_size, self.DIMS, TrainConfig(epochs=3, batch_size=7))
        assert not model.embedding[0].any()

    def test_validation_history_and_selection(self):
        _, labels, tok, X = self._encoded(30, seed=3)
        val_docs, val_labels = _toy_corpus(9, seed=4)
        X_val = encode_batch(val_docs, tok, self.DIMS.max_len)
        seen = []
        model, history = train_model(
            (X, labels), (X_val, val_labels), tok.vocab_size, self.DIMS,
            TrainConfig(epochs=4, batch_size=10), on_epoch=seen.append,
        )
        assert [r.epoch for r in seen] == [1, 2, 3, 4]
        assert all(r.val_accuracy is not None for r in history)
        probs = bilstm.predict_proba(model, X_val)
        accuracy = float(np.mean(np.argmax(probs, axis=1) == labels_to_indices(val_labels)))
        assert accuracy == max(r.val_accuracy for r in history)

    def test_missing_class(self):
        _, _, tok, X = self._encoded(6)
        with pytest.raises(ModelError, match="every class"):
            train_model((X, [1, 1, 0, 0, 1, 0]), None, tok.vocab_size, self.DIMS, TrainConfig(epochs=1))

    def test_divergence_names_epoch_and_batch(self, monkeypatch):
        _, labels, tok, X = self._encoded(9)
        monkeypatch.setattr(bilstm, "loss_and_gradients", lambda model, batch, onehot: (float("nan"), {}))
        with pytest.raises(TrainingDivergedError, match="epoch 1, batch 1") as exc_info:
            train_model((X, labels), None, tok.vocab_size, self.DIMS, TrainConfig(epochs=2))
        assert exc_info.value.epoch == 1

    def test_zero_head_predicts_smallest_label(self):
        model = init_model(3, self.DIMS)
        model.head_W[:] = 0.0
        tok = SeqTokenizer({"a": 1, "b": 2, "c": 3})
        assert model_predict(model, [["a", "b"], ["c"], []], tok, self.DIMS.max_len) == [SentimentLabel.NEGATIVE] * 3

    def test_arrays_restore_the_model(self):
        model = _random_model()
        restored = BiLstmModel.from_arrays(model.to_arrays())
        batch = [[1, 2, 3, 0, 0]]
        np.testing.assert_array_equal(model_forward(restored, batch)[0], model_forward(model, batch)[0])


@pytest.mark.slow
def test_overfits_100_examples_with_default_optimizer():
    docs, labels = _toy_corpus(100, seed=5, length=8)
    tok = fit_tokenizer(docs)
    dims = ModelDims(embedding_dim=16, hidden_dim=16, max_len=8)
    X = encode_batch(docs, tok, dims.max_len)
    _, history = train_model((X, labels), None, tok.vocab_size, dims, TrainConfig(epochs=200, batch_size=64))
    assert max(r.train_accuracy for r in history) >= 0.95

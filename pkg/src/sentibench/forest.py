"""CART decision trees and a bootstrap-aggregated random forest."""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .corpus import NUM_CLASSES, SentimentLabel, label_from_index, labels_to_indices
from .errors import ModelError
from .seeding import STREAM_FOREST, check_seed, make_rng

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 25
    max_depth: Optional[int] = 12
    min_samples_split: int = 2
    features_per_split: Optional[int] = None  # None means ceil(sqrt(dim))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ModelError(f"n_trees must be >= 1, got {self.n_trees}", module="forest")
        if self.max_depth is not None and self.max_depth < 0:
            raise ModelError(f"max_depth must be >= 0 or None, got {self.max_depth}", module="forest")
        if self.min_samples_split < 2:
            raise ModelError(f"min_samples_split must be >= 2, got {self.min_samples_split}", module="forest")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ModelError(f"features_per_split must be >= 1, got {self.features_per_split}", module="forest")
        check_seed(self.seed)

    def resolve_features_per_split(self, dim: int) -> int:
        k = self.features_per_split if self.features_per_split is not None else math.ceil(math.sqrt(dim))
        if not 1 <= k <= dim:
            raise ModelError(f"features_per_split must be in [1, {dim}], got {k}", module="forest")
        return k


def gini(counts: np.ndarray) -> float:
    """1 - sum_c p_c^2 for a vector of class counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Flat node arrays; ``feature[i] == LEAF`` marks node i as a leaf.

    A sample goes to ``left[i]`` iff ``x[feature[i]] <= threshold[i]``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    class_counts: np.ndarray
    n_features: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of X."""
        X = _check_rows(X, self.n_features)
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            current = node[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
            active = self.feature[node] != LEAF
        return node

    def predict_indices(self, X: np.ndarray) -> np.ndarray:
        # argmax keeps the first maximum, so leaf ties go to the smaller label.
        return np.argmax(self.class_counts[self.apply(X)], axis=1)


def _check_rows(X, n_features: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ModelError(f"feature rows have {X.shape[-1]} columns, model expects {n_features}", module="forest")
    return X


def _best_split_on_feature(values: np.ndarray, y_idx: np.ndarray) -> Optional[Tuple[float, float]]:
    """Lowest weighted Gini over midpoint thresholds of one feature, as (score, threshold)."""
    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    n = len(values)
    boundaries = np.nonzero(sorted_values[1:] > sorted_values[:-1])[0]
    if len(boundaries) == 0:
        return None
    onehot = np.zeros((n, NUM_CLASSES), dtype=np.float64)
    onehot[np.arange(n), y_idx[order]] = 1.0
    left_counts = np.cumsum(onehot, axis=0)[boundaries]
    right_counts = onehot.sum(axis=0) - left_counts
    n_left = left_counts.sum(axis=1)
    n_right = n - n_left
    # n_side * gini(side) = n_side - sum(counts^2) / n_side
    impurity = (n_left - (left_counts**2).sum(axis=1) / n_left) + (n_right - (right_counts**2).sum(axis=1) / n_right)
    best = int(np.argmin(impurity))  # first minimum is the lowest threshold
    lo = sorted_values[boundaries[best]]
    hi = sorted_values[boundaries[best] + 1]
    threshold = lo / 2.0 + hi / 2.0
    if not lo <= threshold < hi:
        threshold = lo
    return float(impurity[best] / n), float(threshold)


def fit_decision_tree(
    X,
    y: Sequence,
    params: ForestParams = ForestParams(),
    rng: Optional[np.random.Generator] = None,
) -> DecisionTree:
    """Greedy CART with Gini impurity.

    At each node ``features_per_split`` candidate features are drawn from
    ``rng``; if none of them can split the node the remaining features are
    tried in the same random order. Gini ties go to the lowest feature index,
    then the lowest threshold.
    """
    X, y_idx = _check_training_set(X, y)
    if rng is None:
        rng = make_rng(params.seed, STREAM_FOREST)
    return _grow_tree(X, y_idx, params, rng)


def _check_training_set(X, y: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y_idx = labels_to_indices(y)
    if X.size == 0 or len(y_idx) == 0:
        raise ModelError("cannot fit on empty input", module="forest")
    if X.shape[0] != len(y_idx):
        raise ModelError(f"X has {X.shape[0]} rows but y has {len(y_idx)} labels", module="forest")
    if not np.all(np.isfinite(X)):
        raise ModelError("feature values must be finite", module="forest")
    return X, y_idx


def _grow_tree(X: np.ndarray, y_idx: np.ndarray, params: ForestParams, rng: np.random.Generator) -> DecisionTree:
    dim = X.shape[1]
    k = params.resolve_features_per_split(dim)

    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    counts: List[np.ndarray] = []

    def new_node(samples: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        counts.append(np.bincount(y_idx[samples], minlength=NUM_CLASSES))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(y_idx))), np.arange(len(y_idx)), 0)]
    while stack:
        node, samples, depth = stack.pop()
        node_counts = counts[node]
        if (
            np.count_nonzero(node_counts) <= 1
            or (params.max_depth is not None and depth >= params.max_depth)
            or len(samples) < params.min_samples_split
        ):
            continue
        order = np.arange(dim) if k == dim else rng.permutation(dim)
        best: Optional[Tuple[float, int, float]] = None
        for group in (order[:k], order[k:]):
            # ascending scan with strict < keeps the lowest feature index on ties
            for f in np.sort(group):
                found = _best_split_on_feature(X[samples, f], y_idx[samples])
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], int(f), found[1])
            if best is not None:
                break
        if best is None:
            continue
        _, f, thr = best
        go_left = X[samples, f] <= thr
        left_samples, right_samples = samples[go_left], samples[~go_left]
        feature[node] = f
        threshold[node] = thr
        left[node] = new_node(left_samples)
        right[node] = new_node(right_samples)
        stack.append((right[node], right_samples, depth + 1))
        stack.append((left[node], left_samples, depth + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        class_counts=np.array(counts, dtype=np.int64).reshape(-1, NUM_CLASSES),
        n_features=dim,
    )


def tree_predict(tree: DecisionTree, x) -> SentimentLabel:
    return label_from_index(int(tree.predict_indices(x)[0]))


@dataclass(frozen=True, eq=False)
class RandomForestModel:
    trees: Tuple[DecisionTree, ...]
    params: ForestParams
    features_per_split: int
    n_features: int

    def votes(self, X) -> np.ndarray:
        """(N, 3) tally of per-tree predictions."""
        X = _check_rows(X, self.n_features)
        tally = np.zeros((X.shape[0], NUM_CLASSES), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            np.add.at(tally, (rows, tree.predict_indices(X)), 1)
        return tally

    def predict_indices(self, X) -> np.ndarray:
        return np.argmax(self.votes(X), axis=1)

    def predict(self, X) -> List[SentimentLabel]:
        return [label_from_index(i) for i in self.predict_indices(X)]

    def to_arrays(self) -> Dict[str, np.ndarray]:
        """Concatenated node arrays plus per-tree offsets."""
        sizes = np.array([t.n_nodes for t in self.trees], dtype=np.int64)
        return {
            "tree_offsets": np.concatenate([[0], np.cumsum(sizes)]),
            "feature": np.concatenate([t.feature for t in self.trees]),
            "threshold": np.concatenate([t.threshold for t in self.trees]),
            "left": np.concatenate([t.left for t in self.trees]),
            "right": np.concatenate([t.right for t in self.trees]),
            "class_counts": np.concatenate([t.class_counts for t in self.trees]),
            "n_features": np.array(self.n_features, dtype=np.int64),
            "features_per_split": np.array(self.features_per_split, dtype=np.int64),
        }

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray], params: ForestParams) -> "RandomForestModel":
        offsets = np.asarray(arrays["tree_offsets"], dtype=np.int64)
        n_features = int(arrays["n_features"])
        trees = tuple(
            DecisionTree(
                feature=np.asarray(arrays["feature"][a:b], dtype=np.int64),
                threshold=np.asarray(arrays["threshold"][a:b], dtype=np.float64),
                left=np.asarray(arrays["left"][a:b], dtype=np.int64),
                right=np.asarray(arrays["right"][a:b], dtype=np.int64),
                class_counts=np.asarray(arrays["class_counts"][a:b], dtype=np.int64),
                n_features=n_features,
            )
            for a, b in zip(offsets[:-1], offsets[1:])
        )
        return cls(
            trees=trees,
            params=params,
            features_per_split=int(arrays["features_per_split"]),
            n_features=n_features,
        )

    def params_dict(self) -> dict:
        return asdict(self.params)


def _fit_one_tree(X: np.ndarray, y_idx: np.ndarray, params: ForestParams, tree_index: int) -> DecisionTree:
    rng = make_rng(params.seed, STREAM_FOREST, tree_index)
    if params.bootstrap:
        sample = rng.integers(0, len(y_idx), size=len(y_idx))
        return _grow_tree(X[sample], y_idx[sample], params, rng)
    return _grow_tree(X, y_idx, params, rng)


def fit_forest(X, y: Sequence, params: ForestParams = ForestParams(), n_jobs: int = 1) -> RandomForestModel:
    """Fit ``params.n_trees`` trees, tree i seeded by ``(seed, i)``.

    Trees are independent, so ``n_jobs > 1`` fits them on a thread pool;
    the result does not depend on ``n_jobs``.
    """
    X, y_idx = _check_training_set(X, y)
    k = params.resolve_features_per_split(X.shape[1])

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            trees = list(executor.map(lambda i: _fit_one_tree(X, y_idx, params, i), range(params.n_trees)))
    else:
        trees = [_fit_one_tree(X, y_idx, params, i) for i in range(params.n_trees)]
    logger.debug(
        "forest fitted: %d trees, %d features, %d per split, mean depth %.1f",
        len(trees), X.shape[1], k, float(np.mean([t.depth() for t in trees])),
    )
    return RandomForestModel(trees=tuple(trees), params=params, features_per_split=k, n_features=X.shape[1])


def forest_predict(model: RandomForestModel, x) -> SentimentLabel:
    """Majority vote; tied labels resolve to the smallest."""
    return label_from_index(int(model.predict_indices(x)[0]))

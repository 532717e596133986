"""Rank classifier: four SP features and a from-scratch random forest.

Features per (query keywords, SP) pair:

* ``ratio_m``   share of the query keywords the SP matches
* ``ratio_s``   share of the SP's keywords that the query matched
* ``count``     number of reviews of the SP
* ``score_avg`` mean stars (0 when unreviewed)

Trees are CART classifiers grown on bootstrap samples with Gini impurity.
Every random draw comes from a generator seeded by ``(seed, tree_index)``, so
trees can be built in any order and the model is reproducible.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    CorruptSnapshot,
    EmptyModel,
    EmptyQueryKeywords,
    EmptyTestSet,
    InvalidRatio,
    LabelOutOfRange,
    NoReviews,
    TooFewExamples,
    UnsupportedSnapshotVersion,
)
from .graph import ServiceProviderNode, SpStats

MODEL_VERSION = "1"
N_FEATURES = 4
RANKS = (1, 2, 3, 4, 5)
FEATURE_NAMES = ("ratio_m", "ratio_s", "count", "score_avg")


@dataclass(frozen=True)
class FeatureVector:
    ratio_m: float
    ratio_s: float
    count: int
    score_avg: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.ratio_m, self.ratio_s, float(self.count), self.score_avg)


@dataclass(frozen=True)
class LabeledExample:
    features: FeatureVector
    label: int

    def __post_init__(self) -> None:
        if self.label not in RANKS:
            raise LabelOutOfRange(f"label {self.label!r} not in 1..5")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 8
    min_samples_split: int = 2
    features_per_split: int = 2
    seed: int = 42
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if self.n_trees < 1 or self.max_depth < 1:
            raise ValueError("n_trees and max_depth must be positive")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if not 1 <= self.features_per_split <= N_FEATURES:
            raise ValueError(f"features_per_split must be in 1..{N_FEATURES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass
class Tree:
    """Flat binary tree.  ``feature[i] == -1`` marks leaf ``i`` with ``value[i]``."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[int] = field(default_factory=list)

    def _add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0)
        return len(self.feature) - 1

    def predict_one(self, x: Sequence[float]) -> int:
        i = 0
        while self.feature[i] >= 0:
            i = self.left[i] if x[self.feature[i]] < self.threshold[i] else self.right[i]
        return self.value[i]

    def predict_many(self, X: np.ndarray) -> np.ndarray:
        feature = np.asarray(self.feature, dtype=np.int64)
        threshold = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.int64)
        right = np.asarray(self.right, dtype=np.int64)
        value = np.asarray(self.value, dtype=np.int64)
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = feature[node]
            active = f >= 0
            if not active.any():
                return value[node]
            fa = np.where(active, f, 0)
            go_left = X[rows, fa] < threshold[node]
            node = np.where(active, np.where(go_left, left[node], right[node]), node)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        def walk(i: int) -> int:
            if self.feature[i] < 0:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0)


@dataclass
class RandomForestModel:
    trees: list[Tree]
    config: ForestConfig
    n_examples: int = 0
    trained_at: str | None = None

    @classmethod
    def constant(cls, rank: int, n_trees: int = 1) -> "RandomForestModel":
        """A model whose every tree is a single leaf predicting ``rank``."""
        if rank not in RANKS:
            raise LabelOutOfRange(f"label {rank!r} not in 1..5")
        trees = [Tree([-1], [0.0], [-1], [-1], [rank]) for _ in range(n_trees)]
        return cls(trees, ForestConfig(n_trees=n_trees))

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "config": asdict(self.config),
            "metadata": {"n_examples": self.n_examples, "trained_at": self.trained_at},
            "trees": [asdict(t) for t in self.trees],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForestModel":
        if not isinstance(doc, dict):
            raise CorruptSnapshot("model root must be an object")
        if doc.get("version") != MODEL_VERSION:
            raise UnsupportedSnapshotVersion(f"model version {doc.get('version')!r} not supported")
        try:
            config = ForestConfig(**doc["config"])
            trees = [Tree(**t) for t in doc["trees"]]
            meta = doc.get("metadata", {})
            model = cls(trees, config, meta.get("n_examples", 0), meta.get("trained_at"))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptSnapshot(f"malformed model: {exc}") from exc
        model.validate()
        return model

    def validate(self) -> None:
        for t in self.trees:
            n = t.n_nodes
            if n == 0 or not all(len(a) == n for a in (t.threshold, t.left, t.right, t.value)):
                raise CorruptSnapshot("tree arrays have inconsistent lengths")
            for i in range(n):
                if t.feature[i] < 0:
                    if t.value[i] not in RANKS:
                        raise CorruptSnapshot(f"leaf label {t.value[i]} not in 1..5")
                elif not (t.feature[i] < N_FEATURES and 0 < t.left[i] < n and 0 < t.right[i] < n):
                    raise CorruptSnapshot("internal node references are out of range")

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_model(self))

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RandomForestModel":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorruptSnapshot(f"model is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def dumps_model(model: RandomForestModel) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


@dataclass
class EvalReport:
    accuracy: float
    confusion: list[list[int]]
    n_test: int

    def as_dict(self) -> dict:
        return asdict(self)


# features and labels ------------------------------------------------------


def extract_features(query_keywords: Iterable[str], sp: ServiceProviderNode,
                     stats: SpStats) -> FeatureVector:
    k_q = frozenset(query_keywords)
    if not k_q:
        raise EmptyQueryKeywords("query keyword set is empty")
    matched = len(k_q & sp.keywords)
    ratio_s = matched / len(sp.keywords) if sp.keywords else 0.0
    score = stats.avg_stars if stats.count > 0 and stats.avg_stars is not None else 0.0
    return FeatureVector(matched / len(k_q), ratio_s, stats.count, score)


def derive_label(stats: SpStats) -> int:
    """Ground-truth rank: average stars rounded half up, clamped to 1..5."""
    if stats.count < 1 or stats.avg_stars is None:
        raise NoReviews("cannot label an SP without reviews")
    return min(5, max(1, math.floor(stats.avg_stars + 0.5)))


def split_train_test(examples: Sequence, ratio: float = 0.8, seed: int = 42) -> tuple[list, list]:
    if not 0.0 < ratio < 1.0:
        raise InvalidRatio(f"split ratio {ratio!r} not in (0, 1)")
    n = len(examples)
    n_train = math.floor(ratio * n)
    if n < 2 or n_train == 0 or n_train == n:
        raise TooFewExamples(f"{n} examples cannot be split {ratio}/{1 - ratio:.2f}")
    perm = np.random.default_rng(seed).permutation(n)
    train = [examples[i] for i in perm[:n_train]]
    test = [examples[i] for i in perm[n_train:]]
    return train, test


def to_arrays(examples: Sequence[LabeledExample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([ex.features.as_tuple() for ex in examples], dtype=np.float64).reshape(-1, N_FEATURES)
    y = np.array([ex.label for ex in examples], dtype=np.int64)
    return X, y


# training -----------------------------------------------------------------


def _majority(y0: np.ndarray) -> int:
    """Most frequent class among 0-based labels, ties to the lower rank."""
    return int(np.argmax(np.bincount(y0, minlength=len(RANKS)))) + 1


def build_tree(X: np.ndarray, y: np.ndarray, config: ForestConfig,
               rng: np.random.Generator, kernels=None) -> Tree:
    """Grow one CART tree on rows ``X`` with 1-based labels ``y``."""
    kernels = kernels or _kernels.backend
    X = np.ascontiguousarray(X, dtype=np.float64)
    y0 = np.ascontiguousarray(y, dtype=np.int64) - 1
    tree = Tree()

    def grow(rows: np.ndarray, depth: int) -> int:
        node = tree._add()
        labels = y0[rows]
        tree.value[node] = _majority(labels)
        if depth >= config.max_depth or len(rows) < config.min_samples_split:
            return node
        if np.all(labels == labels[0]):
            return node
        feats = rng.choice(N_FEATURES, size=config.features_per_split, replace=False)
        Xn = np.ascontiguousarray(X[rows])
        f, t, _ = kernels.best_split(Xn, np.ascontiguousarray(labels), feats.astype(np.int64))
        if f < 0:
            return node
        go_left = Xn[:, f] < t
        tree.feature[node] = int(f)
        tree.threshold[node] = float(t)
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)
        return node

    grow(np.arange(len(y0)), 0)
    return tree


def train(examples: Sequence[LabeledExample], config: ForestConfig = ForestConfig(),
          kernels=None) -> RandomForestModel:
    if len(examples) < max(1, config.min_samples_split):
        raise TooFewExamples(f"need at least {config.min_samples_split} examples, got {len(examples)}")
    for ex in examples:
        if ex.label not in RANKS:
            raise LabelOutOfRange(f"label {ex.label!r} not in 1..5")
    X, y = to_arrays(examples)
    n = len(y)
    trees = []
    for i in range(config.n_trees):
        rng = np.random.default_rng([config.seed, i])
        rows = rng.integers(0, n, size=n) if config.bootstrap else np.arange(n)
        trees.append(build_tree(X[rows], y[rows], config, rng, kernels))
    return RandomForestModel(trees, config, n_examples=n)


# inference ----------------------------------------------------------------


def _vote(labels: Iterable[int]) -> int:
    counts = [0] * (len(RANKS) + 1)
    for lab in labels:
        counts[lab] += 1
    best = max(counts)
    return counts.index(best)


def predict(model: RandomForestModel, f: FeatureVector | Sequence[float]) -> int:
    """Majority vote of all trees; equal votes resolve to the lower rank."""
    if not model.trees:
        raise EmptyModel("model has no trees")
    x = f.as_tuple() if isinstance(f, FeatureVector) else tuple(f)
    return _vote(t.predict_one(x) for t in model.trees)


def predict_many(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    if not model.trees:
        raise EmptyModel("model has no trees")
    X = np.asarray(X, dtype=np.float64).reshape(-1, N_FEATURES)
    votes = np.zeros((len(X), len(RANKS)), dtype=np.int64)
    rows = np.arange(len(X))
    for t in model.trees:
        votes[rows, t.predict_many(X) - 1] += 1
    return np.argmax(votes, axis=1) + 1


def evaluate(model: RandomForestModel, test_examples: Sequence[LabeledExample]) -> EvalReport:
    if len(test_examples) == 0:
        raise EmptyTestSet("no test examples")
    X, y = to_arrays(test_examples)
    pred = predict_many(model, X)
    confusion = [[0] * len(RANKS) for _ in RANKS]
    for truth, guess in zip(y.tolist(), pred.tolist()):
        confusion[truth - 1][guess - 1] += 1
    correct = sum(confusion[i][i] for i in range(len(RANKS)))
    return EvalReport(correct / len(y), confusion, len(y))


# training sets from a graph -----------------------------------------------


def examples_for_sp(sp: ServiceProviderNode, stats: SpStats, vocab: Sequence[str],
                    augment: int, rng: np.random.Generator) -> list[LabeledExample]:
    """One example with the SP's own keywords as the query, plus ``augment``
    synthetic queries mixing a subset of its keywords with up to two foreign
    ones so that both keyword ratios vary."""
    label = derive_label(stats)
    own = sorted(sp.keywords)
    out = [LabeledExample(extract_features(own, sp, stats), label)]
    foreign = [t for t in vocab if t not in sp.keywords]
    for _ in range(augment):
        n_own = int(rng.integers(1, len(own) + 1))
        k_q = {own[i] for i in rng.choice(len(own), size=n_own, replace=False)}
        if foreign:
            n_foreign = int(rng.integers(0, min(2, len(foreign)) + 1))
            k_q |= {foreign[i] for i in rng.choice(len(foreign), size=n_foreign, replace=False)}
        out.append(LabeledExample(extract_features(k_q, sp, stats), label))
    return out


def graph_training_sets(graph, ratio: float = 0.8, seed: int = 42,
                        augment: int = 3) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Split reviewed, keyworded SPs 80/20 and expand each into examples.

    The split is made over SPs before augmentation so no SP contributes to
    both sides.
    """
    sps = [sp for sp in graph.sps if sp.keywords and graph.sp_stats(sp.id).count > 0]
    train_sps, test_sps = split_train_test(sps, ratio, seed)
    vocab = sorted(graph.keyword_index)
    rng = np.random.default_rng([seed, 1])
    sides = []
    for side in (train_sps, test_sps):
        examples: list[LabeledExample] = []
        for sp in side:
            examples += examples_for_sp(sp, graph.sp_stats(sp.id), vocab, augment, rng)
        sides.append(examples)
    return sides[0], sides[1]

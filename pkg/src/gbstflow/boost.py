"""Gradient-boosted ensembles of Set-Trees for binary flow classification."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .flowmodel import FEATURE_NAMES, N_FEATURES, FlowStream, Label
from .settree import Node, PacketTable, TreeConfig, grow_tree, iter_splits, predict_table, tree_depth

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoostConfig:
    n_trees: int = 10
    learning_rate: float = 0.1
    max_depth: int = 10
    attention_window: int = 5
    reg_lambda: float = 1.0
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 0:
            raise ValueError("n_trees must be >= 0")
        if not 0 < self.learning_rate <= 1:
            raise ValueError("learning_rate must be in (0, 1]")

    def tree_config(self) -> TreeConfig:
        return TreeConfig(
            max_depth=self.max_depth,
            attention_window=self.attention_window,
            reg_lambda=self.reg_lambda,
            min_samples_leaf=self.min_samples_leaf,
        )


@dataclass(frozen=True)
class GBSTModel:
    trees: tuple[Node, ...]
    learning_rate: float
    base_score: float
    config: BoostConfig
    feature_names: tuple[str, ...] = FEATURE_NAMES
    val_loss: tuple[float, ...] = ()

    def __post_init__(self):
        for t in self.trees:
            if tree_depth(t) > self.config.max_depth:
                raise ValueError("tree deeper than the configured max_depth")

    @property
    def n_trees(self) -> int:
        return len(self.trees)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=np.float64)))


def logistic_loss(y: np.ndarray, margin: np.ndarray) -> float:
    # log(1 + e^m) - y*m, stable for large |m|
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def _targets(flows: Sequence[FlowStream]) -> np.ndarray:
    return np.array([f.label.y for f in flows], dtype=np.float64)


def fit(train: Sequence[FlowStream], val: Optional[Sequence[FlowStream]] = None,
        config: BoostConfig = BoostConfig()) -> GBSTModel:
    """Boost Set-Trees on the binary logistic loss.

    The validation flows only feed the per-round loss monitor; they never
    alter the fitted trees.
    """
    if not train:
        raise ValueError("training set is empty")
    y = _targets(train)
    prior = y.mean()
    if prior in (0.0, 1.0):
        raise ValueError("training set holds a single class")
    base_score = math.log(prior / (1.0 - prior))

    table = PacketTable(train)
    margin = np.full(len(train), base_score)
    if val:
        val_table = PacketTable(val)
        y_val = _targets(val)
        val_margin = np.full(len(val), base_score)
    tree_cfg = config.tree_config()
    trees: list[Node] = []
    val_loss: list[float] = []
    for round_ in range(config.n_trees):
        p = sigmoid(margin)
        tree = grow_tree(table, p - y, p * (1.0 - p), tree_cfg)
        trees.append(tree)
        margin = margin + config.learning_rate * predict_table(tree, table)
        if val:
            val_margin = val_margin + config.learning_rate * predict_table(tree, val_table)
            val_loss.append(logistic_loss(y_val, val_margin))
            logger.info("round %d: train loss %.6f, validation loss %.6f",
                        round_ + 1, logistic_loss(y, margin), val_loss[-1])
        else:
            logger.info("round %d: train loss %.6f", round_ + 1, logistic_loss(y, margin))
    return GBSTModel(tuple(trees), config.learning_rate, base_score, config, FEATURE_NAMES, tuple(val_loss))


def predict_margin(model: GBSTModel, flows: Sequence[FlowStream]) -> np.ndarray:
    margin = np.full(len(flows), model.base_score)
    if not flows or not model.trees:
        return margin
    table = PacketTable(flows)
    total = np.zeros(len(flows))
    for tree in model.trees:
        total = total + predict_table(tree, table)
    return margin + model.learning_rate * total


def predict_scores(model: GBSTModel, flows: Sequence[FlowStream]) -> np.ndarray:
    return sigmoid(predict_margin(model, flows))


def predict_score(model: GBSTModel, flow: FlowStream) -> float:
    """Attack probability of a single flow."""
    return float(predict_scores(model, [flow])[0])


def classify_scores(scores, threshold: float = 0.5) -> list[Label]:
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    return [Label.ATTACK if s >= threshold else Label.BENIGN for s in np.asarray(scores)]


def classify(model: GBSTModel, flow: FlowStream, threshold: float = 0.5) -> Label:
    """Attack iff the score reaches `threshold` (boundary counts as Attack)."""
    return classify_scores([predict_score(model, flow)], threshold)[0]


@dataclass(frozen=True)
class ImportanceReport:
    importance: dict[str, float] = field(default_factory=dict)

    def ranked(self) -> list[tuple[str, float]]:
        return sorted(self.importance.items(), key=lambda kv: (-kv[1], kv[0]))


def feature_importance(model: GBSTModel) -> ImportanceReport:
    """Gain importance: per-tree normalized split gains, averaged over trees."""
    if not model.trees:
        raise ValueError("model has no trees")
    total = np.zeros(N_FEATURES)
    for tree in model.trees:
        per_tree = np.zeros(N_FEATURES)
        for split in iter_splits(tree):
            per_tree[split.rule.feature] += split.gain
        s = per_tree.sum()
        if s > 0:
            total += per_tree / s
    total /= len(model.trees)
    s = total.sum()
    if s > 0:
        total = total / s
    return ImportanceReport({name: float(v) for name, v in zip(model.feature_names, total)})

"""Bagged Gini CART trees producing propensity scores.

Each tree trains on a bootstrap resample (with replacement, same size as
the input).  At every internal node a random subset of features is
drawn without replacement; candidate cuts are the midpoints between
consecutive distinct sorted values of each candidate feature, and the
cut with the largest Gini impurity reduction wins, ties resolved to the
lowest feature index then the smallest cut value.  Growth stops when a
node is pure, smaller than ``min_samples_split``, or no cut reduces
impurity.  A leaf predicts its positive fraction; the forest predicts
the mean over trees.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rng import substream

__all__ = [
    "ForestParams",
    "TreeNode",
    "Forest",
    "train_forest",
    "forest_to_json",
    "forest_from_json",
    "save_forest",
    "load_forest",
]


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_features: int = 50
    min_samples_split: int = 50
    bootstrap: bool = True  # disable to fit plain CART trees on the raw sample
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_features < 1:
            raise ValueError("max_features must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass
class TreeNode:
    feature: Optional[int] = None
    split: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None
    prob: Optional[float] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


@dataclass
class Forest:
    params: ForestParams
    n_features: int
    trees: list[TreeNode] = field(default_factory=list)

    def predict_propensity(self, X) -> np.ndarray:
        """Mean leaf positive-fraction over trees, one score per row."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if not np.isfinite(X).all():
            raise ValueError("non-finite feature values")
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            out = np.empty(X.shape[0])
            _predict_into(tree, X, np.arange(X.shape[0]), out)
            total += out
        return total / len(self.trees)


def _gini_best_cut(X, y, rows, feats):
    """Best (reduction, feature, cut) over candidate features, or None."""
    n = rows.size
    pos = float(y[rows].sum())
    parent = 1.0 - (pos / n) ** 2 - ((n - pos) / n) ** 2
    best = None
    for f in feats:
        v = X[rows, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        sy = y[rows][order]
        bounds = np.flatnonzero(np.diff(sv))
        if bounds.size == 0:
            continue
        n_left = (bounds + 1).astype(np.float64)
        n_right = n - n_left
        pos_left = np.cumsum(sy)[bounds].astype(np.float64)
        pos_right = pos - pos_left
        g_left = 1.0 - (pos_left / n_left) ** 2 - ((n_left - pos_left) / n_left) ** 2
        g_right = 1.0 - (pos_right / n_right) ** 2 - ((n_right - pos_right) / n_right) ** 2
        weighted = (n_left * g_left + n_right * g_right) / n
        j = int(np.argmin(weighted))  # first minimum: smallest cut wins within a feature
        reduction = parent - float(weighted[j])
        if reduction > 0.0 and (best is None or reduction > best[0]):
            best = (reduction, int(f), float((sv[bounds[j]] + sv[bounds[j] + 1]) / 2.0))
    return best


def _grow(X, y, rows, params, rng, d):
    n = rows.size
    pos = int(y[rows].sum())
    if pos == 0 or pos == n or n < params.min_samples_split:
        return TreeNode(prob=pos / n)
    m = min(params.max_features, d)
    feats = np.sort(rng.choice(d, size=m, replace=False))
    best = _gini_best_cut(X, y, rows, feats)
    if best is None:
        return TreeNode(prob=pos / n)
    _, f, cut = best
    mask = X[rows, f] <= cut
    left = _grow(X, y, rows[mask], params, rng, d)
    right = _grow(X, y, rows[~mask], params, rng, d)
    return TreeNode(feature=f, split=cut, left=left, right=right)


def _predict_into(node, X, rows, out):
    if node.is_leaf:
        out[rows] = node.prob
        return
    mask = X[rows, node.feature] <= node.split
    _predict_into(node.left, X, rows[mask], out)
    _predict_into(node.right, X, rows[~mask], out)


def train_forest(X, y, params: ForestParams = ForestParams()) -> Forest:
    """Fit a forest; same (data, params) always yields the identical model."""
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, d) with one label per row")
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature values")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    y = y.astype(np.int64)
    if y.min() == y.max():
        raise ValueError("training data must contain both classes")
    n, d = X.shape
    trees = []
    for i in range(params.n_trees):
        rng = substream(params.seed, "tree", i)
        rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
        trees.append(_grow(X, y, rows, params, rng, d))
    return Forest(params=params, n_features=d, trees=trees)


# -- serialization -----------------------------------------------------


def _node_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"prob": node.prob}
    return {
        "feature": node.feature,
        "split": node.split,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(data: dict) -> TreeNode:
    if "prob" in data:
        return TreeNode(prob=float(data["prob"]))
    return TreeNode(
        feature=int(data["feature"]),
        split=float(data["split"]),
        left=_node_from_dict(data["left"]),
        right=_node_from_dict(data["right"]),
    )


def forest_to_json(forest: Forest) -> str:
    payload = {
        "params": {
            "n_trees": forest.params.n_trees,
            "max_features": forest.params.max_features,
            "min_samples_split": forest.params.min_samples_split,
            "bootstrap": forest.params.bootstrap,
            "seed": forest.params.seed,
        },
        "n_features": forest.n_features,
        "trees": [_node_to_dict(t) for t in forest.trees],
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def forest_from_json(text: str) -> Forest:
    payload = json.loads(text)
    params = ForestParams(**payload["params"])
    trees = [_node_from_dict(t) for t in payload["trees"]]
    if len(trees) != params.n_trees:
        raise ValueError("tree count disagrees with params")
    return Forest(params=params, n_features=int(payload["n_features"]), trees=trees)


def save_forest(path, forest: Forest) -> None:
    with open(path, "w") as fh:
        fh.write(forest_to_json(forest))
        fh.write("\n")


def load_forest(path) -> Forest:
    with open(path) as fh:
        return forest_from_json(fh.read())

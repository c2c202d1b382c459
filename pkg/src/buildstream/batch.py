"""Batch C4.5-style decision tree (J48 analogue) and stratified cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .evaluation import ConfusionRates, rates_from_counts
from .exceptions import ConfigError, EmptyDataset, SingleClass, TooFewInstances
from .metrics import DEFAULT_SCHEMA, BuildOutcome, MetricSchema
from .tree import Leaf, Node, SplitNode, dump_tree, route, tree_shape


@dataclass(frozen=True)
class BatchTreeParams:
    min_leaf: int = 2
    use_gain_ratio: bool = True
    prune: bool = True
    confidence: float = 0.25

    def __post_init__(self):
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be at least 1")
        if not 0 < self.confidence <= 0.5:
            raise ConfigError("confidence factor must lie in (0, 0.5]")


def _entropy2(pos, n):
    """Binary entropy (bits) of ``pos`` positives out of ``n``; vectorised."""
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(n > 0, pos / np.where(n > 0, n, 1), 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1)), 0.0)
              + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1)), 0.0))
    return h


def best_split(X: np.ndarray, y: np.ndarray, params: BatchTreeParams):
    """Best ``(attribute, threshold, score, gain)``, or None when nothing helps.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values leaving at least ``min_leaf`` instances per side.  Each metric
    keeps its highest-gain threshold; metrics whose gain reaches the average
    then compete on gain ratio.  Ties keep the lower attribute index, then
    the lower threshold.
    """
    n, d = X.shape
    if n < 2:
        return None
    total_pos = y.sum()
    parent = float(_entropy2(np.array(total_pos), np.array(n)))
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    pos_left = np.cumsum(y[order], axis=0)[:-1]
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= params.min_leaf) & (n_right >= params.min_leaf)
    if not valid.any():
        return None
    gain = parent - (n_left * _entropy2(pos_left, n_left)
                     + n_right * _entropy2(total_pos - pos_left, n_right)) / n
    gain = np.where(valid & (gain > 1e-12), gain, -np.inf)
    rows = gain.argmax(axis=0)  # per metric: threshold with the highest gain
    cols = np.arange(d)
    best_gain = gain[rows, cols]
    usable = np.isfinite(best_gain)
    if not usable.any():
        return None
    if params.use_gain_ratio:
        nl = n_left[rows, 0]
        split_info = _entropy2(nl, np.full_like(nl, n))
        score = np.where(usable, best_gain / np.where(split_info > 0, split_info, 1.0), -np.inf)
        # only metrics with at least average gain compete on gain ratio
        score = np.where(best_gain >= best_gain[usable].mean() - 1e-12, score, -np.inf)
    else:
        score = best_gain
    top = score.max()
    j = int(np.flatnonzero(score >= top - 1e-12)[0])
    i = int(rows[j])
    return j, float((xs[i, j] + xs[i + 1, j]) / 2.0), float(score[j]), float(best_gain[j])


def added_errors(n: float, e: float, cf: float) -> float:
    """Extra errors from the upper ``cf`` confidence limit on a leaf's error rate.

    Normal approximation to the binomial, as used by C4.5's error-based pruning.
    """
    if e < 1:
        base = n * (1 - cf ** (1.0 / n))
        if e == 0:
            return base
        return base + e * (added_errors(n, 1.0, cf) - base)
    if e + 0.5 >= n:
        return max(n - e, 0.0)
    z = norm.ppf(1 - cf)
    f = (e + 0.5) / n
    r = (f + z * z / (2 * n) + z * math.sqrt(f / n - f * f / n + z * z / (4 * n * n))) / (1 + z * z / n)
    return r * n - e


def _leaf_error(votes: np.ndarray, cf: float) -> float:
    n = float(votes.sum())
    if n == 0:
        return 0.0
    e = n - float(votes.max())
    return e + added_errors(n, e, cf)


def _prune(node: Node, cf: float) -> tuple[Node, float, np.ndarray]:
    """Bottom-up pessimistic pruning; returns (node, estimated errors, class counts)."""
    if node.is_leaf:
        return node, _leaf_error(node.votes, cf), node.votes
    node.left, err_l, votes_l = _prune(node.left, cf)
    node.right, err_r, votes_r = _prune(node.right, cf)
    votes = votes_l + votes_r
    as_leaf = _leaf_error(votes, cf)
    subtree = err_l + err_r
    if as_leaf <= subtree + 0.1:
        return Leaf(votes), as_leaf, votes
    return node, subtree, votes


class BatchTreeModel:
    def __init__(self, root: Node, training_size: int, params: BatchTreeParams):
        self.root = root
        self.training_size = training_size
        self.params = params

    def predict(self, metrics) -> tuple[BuildOutcome, tuple[float, float]]:
        leaf, _ = route(self.root, np.asarray(metrics, dtype=float))
        return leaf.prediction(), (float(leaf.votes[0]), float(leaf.votes[1]))

    def predict_one(self, metrics) -> BuildOutcome:
        return self.predict(metrics)[0]

    def predict_many(self, X) -> np.ndarray:
        return np.array([int(self.predict(x)[0]) for x in np.asarray(X, dtype=float)])

    def shape(self):
        return tree_shape(self.root)

    def dump(self) -> str:
        return dump_tree(self.root)


def _as_arrays(dataset):
    if isinstance(dataset, tuple) and len(dataset) == 2:
        X, y = dataset
        return np.asarray(X, dtype=float), np.asarray(y, dtype=int)
    X = np.array([inst.metrics for inst in dataset], dtype=float)
    y = np.array([int(inst.outcome) for inst in dataset], dtype=int)
    return X, y


def fit_batch_tree(dataset, params: BatchTreeParams | None = None,
                   schema: MetricSchema = DEFAULT_SCHEMA) -> BatchTreeModel:
    """Top-down induction on a dataset (instances or an ``(X, y)`` pair)."""
    params = params or BatchTreeParams()
    X, y = _as_arrays(dataset)
    if X.shape[0] == 0:
        raise EmptyDataset("cannot fit a tree on no instances")

    def grow(idx: np.ndarray) -> Node:
        ys = y[idx]
        votes = np.array([len(ys) - ys.sum(), ys.sum()], dtype=float)
        if votes.min() == 0 or len(idx) < 2 * params.min_leaf:
            return Leaf(votes)
        found = best_split(X[idx], ys, params)
        if found is None:
            return Leaf(votes)
        j, thr, _, _ = found
        mask = X[idx, j] <= thr
        return SplitNode(j, schema.metrics[j], thr, grow(idx[mask]), grow(idx[~mask]))

    root = grow(np.arange(X.shape[0]))
    if params.prune:
        root, _, _ = _prune(root, params.confidence)
    return BatchTreeModel(root, X.shape[0], params)


def stratified_folds(y, folds: int = 10, seed: int = 0) -> np.ndarray:
    """Fold id per instance: seeded shuffle, stable sort by class, deal round-robin."""
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(y))
    perm = perm[np.argsort(y[perm], kind="stable")]
    fold_of = np.empty(len(y), dtype=int)
    fold_of[perm] = np.arange(len(y)) % folds
    return fold_of


@dataclass(frozen=True)
class CrossValidationResult:
    accuracy: float
    rates: ConfusionRates
    folds: int

    def to_dict(self) -> dict:
        return {"folds": self.folds, "accuracy": self.accuracy, "rates": self.rates.to_dict()}


def cross_validate(dataset, folds: int = 10, seed: int = 0, params: BatchTreeParams | None = None,
                   schema: MetricSchema = DEFAULT_SCHEMA) -> CrossValidationResult:
    X, y = _as_arrays(dataset)
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    if len(y) < folds:
        raise TooFewInstances(f"{len(y)} instances cannot fill {folds} folds")
    if len(np.unique(y)) < 2:
        raise SingleClass("cross-validation needs both outcomes present")
    fold_of = stratified_folds(y, folds, seed)
    predicted = np.empty_like(y)
    for f in range(folds):
        test = fold_of == f
        model = fit_batch_tree((X[~test], y[~test]), params, schema)
        predicted[test] = model.predict_many(X[test])
    counts = np.zeros((2, 2), dtype=int)
    np.add.at(counts, (y, predicted), 1)
    return CrossValidationResult(float((predicted == y).mean()), rates_from_counts(counts), folds)

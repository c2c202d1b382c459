"""Incremental Hoeffding tree with drift-triggered subtree removal."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .exceptions import ConfigError, DomainError, EmptyModel, SchemaMismatch
from .metrics import DEFAULT_SCHEMA, BuildInstance, BuildOutcome, MetricSchema
from .tree import Leaf, Node, SplitNode, dump_tree, node_at, replace_at, route, tree_shape


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    """Deviation ``eps`` such that the true mean is within ``eps`` of an
    ``n``-sample mean with probability ``1 - delta``."""
    if not value_range > 0:
        raise DomainError(f"value_range must be positive, got {value_range}")
    if not 0 < delta <= 1:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    if not n >= 1:
        raise DomainError(f"n must be at least 1, got {n}")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


@dataclass(frozen=True)
class TreeParams:
    delta: float = 1e-7
    value_range: float = 1.0
    grace_period: int = 25
    tie_threshold: float = 0.1
    n_thresholds: int = 10

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not self.value_range > 0:
            raise ConfigError("value_range must be positive")
        if self.grace_period < 1:
            raise ConfigError("grace_period must be at least 1")
        if not 0 <= self.tie_threshold < 1:
            raise ConfigError(f"tie_threshold must lie in [0, 1), got {self.tie_threshold}")
        if self.n_thresholds < 1:
            raise ConfigError("n_thresholds must be positive")


class AttributeObserver:
    """Per-class running count, mean, variance, min and max for every metric.

    Row ``c`` holds class ``c`` (FAILURE=0, SUCCESS=1); column ``j`` metric ``j``.
    """

    def __init__(self, n_features: int):
        self.count = np.zeros(2)
        self.mean = np.zeros((2, n_features))
        self.m2 = np.zeros((2, n_features))
        self.lo = np.full((2, n_features), np.inf)
        self.hi = np.full((2, n_features), -np.inf)

    @property
    def total(self) -> float:
        return float(self.count.sum())

    def update(self, x: np.ndarray, label: int) -> None:
        self.count[label] += 1
        d = x - self.mean[label]
        self.mean[label] += d / self.count[label]
        self.m2[label] += d * (x - self.mean[label])
        np.minimum(self.lo[label], x, out=self.lo[label])
        np.maximum(self.hi[label], x, out=self.hi[label])

    def std(self) -> np.ndarray:
        n = self.count[:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            var = np.where(n > 1, self.m2 / np.maximum(n - 1, 1), 0.0)
        return np.sqrt(np.maximum(var, 0.0))

    def candidate_thresholds(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``k`` equally spaced interior points between the observed min and max.

        Returns ``(thresholds, usable)``; attributes with a single observed
        value are flagged unusable.
        """
        lo = self.lo.min(axis=0)
        hi = self.hi.max(axis=0)
        usable = np.isfinite(lo) & (hi > lo)
        steps = np.arange(1, k + 1) / (k + 1)
        span = np.where(usable, hi - lo, 0.0)
        base = np.where(usable, lo, 0.0)
        return base[:, None] + span[:, None] * steps[None, :], usable

    def left_counts(self, thresholds: np.ndarray) -> np.ndarray:
        """Estimated per-class counts with value <= threshold, shape (2, d, k)."""
        std = self.std()[:, :, None]
        mean = self.mean[:, :, None]
        t = thresholds[None, :, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(std > 0, ndtr((t - mean) / np.where(std > 0, std, 1.0)),
                            (mean <= t).astype(float))
        frac = np.where(t < self.lo[:, :, None], 0.0, frac)
        frac = np.where(t >= self.hi[:, :, None], 1.0, frac)
        return frac * self.count[:, None, None]


def _entropy(counts: np.ndarray, axis: int = 0) -> np.ndarray:
    total = counts.sum(axis=axis, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        logs = np.where(p > 0, np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -(p * logs).sum(axis=axis)


def split_gains(observer: AttributeObserver, k: int = 10):
    """Information gain of the best candidate threshold for every metric.

    Returns ``(gain, threshold, left)`` arrays; ``left`` has shape (2, d) with
    the estimated class counts on the ``<=`` side.  Unusable metrics get
    gain ``-inf``.
    """
    thresholds, usable = observer.candidate_thresholds(k)
    left = observer.left_counts(thresholds)
    right = observer.count[:, None, None] - left
    n = observer.total
    parent = _entropy(observer.count)
    n_left = left.sum(axis=0)
    n_right = right.sum(axis=0)
    gain = parent - (n_left * _entropy(left) + n_right * _entropy(right)) / n
    best = gain.argmax(axis=1)
    rows = np.arange(gain.shape[0])
    best_gain = np.where(usable, gain[rows, best], -np.inf)
    return best_gain, thresholds[rows, best], left[:, rows, best]


class LearningLeaf(Leaf):
    def __init__(self, votes=None, n_features: int = len(DEFAULT_SCHEMA)):
        super().__init__(np.zeros(2) if votes is None else votes)
        self.observers = AttributeObserver(n_features)
        self.seen_since_attempt = 0


@dataclass(frozen=True)
class SplitAttempt:
    instances_seen: int
    path: tuple[int, ...]
    n_leaf: float
    best_attribute: str | None
    best_gain: float
    second_gain: float
    epsilon: float
    split: bool


class HoeffdingTree:
    """Very fast decision tree over the build-metric schema.

    Parameters
    ----------
    schema : MetricSchema
        Metric columns the tree may split on.
    params : TreeParams, optional
        Confidence ``delta``, criterion range, grace period and tie threshold.
    trace : bool
        Keep a :class:`SplitAttempt` record for every split evaluation.
    """

    def __init__(self, schema: MetricSchema = DEFAULT_SCHEMA, params: TreeParams | None = None,
                 trace: bool = False, **kwargs):
        self.schema = schema
        self.params = params if params is not None else TreeParams(**kwargs)
        self.n_features = len(schema)
        self.root: Node = LearningLeaf(n_features=self.n_features)
        self.instances_seen = 0
        self.trace = trace
        self.attempts: list[SplitAttempt] = []

    def _vector(self, metrics) -> np.ndarray:
        x = np.asarray(metrics, dtype=float)
        if x.shape != (self.n_features,):
            raise SchemaMismatch(f"expected {self.n_features} metrics, got shape {x.shape}")
        return x

    def learn_one(self, instance: BuildInstance) -> "HoeffdingTree":
        return self.learn(instance.metrics, instance.outcome)

    def learn(self, metrics, outcome) -> "HoeffdingTree":
        x = self._vector(metrics)
        y = int(BuildOutcome(outcome))
        leaf, path = route(self.root, x)
        if not isinstance(leaf, LearningLeaf):
            leaf = self._activate(leaf, path)
        leaf.votes[y] += 1.0
        leaf.observers.update(x, y)
        leaf.seen_since_attempt += 1
        self.instances_seen += 1
        if leaf.seen_since_attempt >= self.params.grace_period:
            leaf.seen_since_attempt = 0
            if np.count_nonzero(leaf.observers.count) > 1:
                self._attempt_split(leaf, path)
        return self

    def _activate(self, leaf: Leaf, path) -> LearningLeaf:
        fresh = LearningLeaf(leaf.votes, self.n_features)
        self.root = replace_at(self.root, path, fresh)
        return fresh

    def _attempt_split(self, leaf: LearningLeaf, path) -> None:
        p = self.params
        obs = leaf.observers
        gain, thresholds, left = split_gains(obs, p.n_thresholds)
        order = np.argsort(-gain, kind="stable")
        best = int(order[0])
        g_best = float(gain[best])
        g_second = float(gain[order[1]]) if len(order) > 1 else 0.0
        g_second = max(g_second, 0.0)
        n = obs.total
        eps = hoeffding_bound(p.value_range, p.delta, n)
        do_split = np.isfinite(g_best) and g_best > 0 and (
            g_best - g_second > eps or eps < p.tie_threshold)
        if self.trace:
            self.attempts.append(SplitAttempt(
                self.instances_seen, tuple(path), n,
                self.schema.metrics[best] if np.isfinite(g_best) else None,
                g_best, g_second, eps, bool(do_split)))
        if not do_split:
            return
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(obs.count > 0, left[:, best] / np.maximum(obs.count, 1), 0.5)
        left_votes = leaf.votes * frac
        right_votes = leaf.votes - left_votes
        node = SplitNode(best, self.schema.metrics[best], float(thresholds[best]),
                         LearningLeaf(left_votes, self.n_features),
                         LearningLeaf(right_votes, self.n_features))
        self.root = replace_at(self.root, path, node)

    def predict(self, metrics) -> tuple[BuildOutcome, tuple[float, float]]:
        if self.root is None:
            raise EmptyModel("model has no nodes")
        leaf, _ = route(self.root, self._vector(metrics))
        return leaf.prediction(), (float(leaf.votes[0]), float(leaf.votes[1]))

    def predict_one(self, metrics) -> BuildOutcome:
        return self.predict(metrics)[0]

    def shape(self):
        return tree_shape(self.root)

    def dump(self) -> str:
        return dump_tree(self.root)

    def prune_subtree(self, path) -> "HoeffdingTree":
        """Replace the node at ``path`` with a fresh, empty learning leaf."""
        path = tuple(path)
        node_at(self.root, path)
        self.root = replace_at(self.root, path, LearningLeaf(n_features=self.n_features))
        return self

    def handle_drift(self, metrics) -> tuple[int, ...]:
        """Drop the subtree holding the leaf that ``metrics`` reaches.

        The leaf's parent split is removed (or the leaf itself reset when it
        is the root).  Returns the pruned path.
        """
        _, path = route(self.root, self._vector(metrics))
        target = path[:-1]
        self.prune_subtree(target)
        return target

    def snapshot(self) -> "HoeffdingTree":
        return copy.deepcopy(self)


def tree_from_root(root: Node, schema: MetricSchema = DEFAULT_SCHEMA, **params) -> HoeffdingTree:
    """Wrap a hand-built node structure as a model (e.g. for analysis)."""
    model = HoeffdingTree(schema, **params)
    model.root = root
    return model

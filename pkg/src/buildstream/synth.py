"""Seeded synthetic build streams with scripted abrupt concept drift."""

from __future__ import annotations

import json
import math
import operator
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import InvalidScript
from .metrics import (
    AVG_ATTRIBUTES_PER_CLASS,
    DEFAULT_SCHEMA,
    NUM_INTERFACES,
    BuildInstance,
    BuildOutcome,
    MetricSchema,
)
from .streams import BuildDataset

_OPS = {"<=": operator.le, "<": operator.lt, ">": operator.gt, ">=": operator.ge}

DEFAULT_RANGE = (0.0, 100.0)


@dataclass(frozen=True)
class Rule:
    metric: str
    op: str
    threshold: float
    label: BuildOutcome

    def __post_init__(self):
        if self.op not in _OPS:
            raise InvalidScript(f"unknown comparison {self.op!r}")
        object.__setattr__(self, "label", BuildOutcome(self.label))


@dataclass(frozen=True)
class ConceptSpec:
    """Ordered decision list; the first matching rule labels the build."""

    rules: tuple[Rule, ...]
    default: BuildOutcome = BuildOutcome.SUCCESS

    @property
    def metrics(self) -> frozenset[str]:
        return frozenset(r.metric for r in self.rules)

    def validate(self, schema: MetricSchema) -> None:
        for r in self.rules:
            if r.metric not in schema.categories:
                raise InvalidScript(f"rule references unknown metric {r.metric!r}")

    def label_matrix(self, X: np.ndarray, schema: MetricSchema = DEFAULT_SCHEMA) -> np.ndarray:
        labels = np.full(X.shape[0], int(self.default))
        decided = np.zeros(X.shape[0], dtype=bool)
        for r in self.rules:
            hit = _OPS[r.op](X[:, schema.index(r.metric)], r.threshold) & ~decided
            labels[hit] = int(r.label)
            decided |= hit
        return labels

    def __call__(self, metrics, schema: MetricSchema = DEFAULT_SCHEMA) -> BuildOutcome:
        x = np.asarray(metrics, dtype=float)[None, :]
        return BuildOutcome(int(self.label_matrix(x, schema)[0]))


@dataclass(frozen=True)
class DriftScript:
    segments: tuple[tuple[int, ConceptSpec], ...]
    noise_rate: float = 0.0
    feature_model: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    seed: int = 0
    default_range: tuple[float, float] = DEFAULT_RANGE
    schema: MetricSchema = field(default=DEFAULT_SCHEMA, repr=False)

    def validate(self) -> None:
        if not self.segments:
            raise InvalidScript("script needs at least one segment")
        starts = [s for s, _ in self.segments]
        if starts[0] != 0:
            raise InvalidScript("first segment must start at ordinal 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise InvalidScript("segment starts must be strictly increasing")
        if not 0.0 <= self.noise_rate < 0.5:
            raise InvalidScript(f"noise_rate must lie in [0, 0.5), got {self.noise_rate}")
        for _, concept in self.segments:
            concept.validate(self.schema)
        for name, (lo, hi) in {**self.feature_model, "default": self.default_range}.items():
            if name != "default" and name not in self.schema.categories:
                raise InvalidScript(f"feature model names unknown metric {name!r}")
            if not (math.isfinite(lo) and math.isfinite(hi) and hi >= lo):
                raise InvalidScript(f"bad sampling range for {name!r}: ({lo}, {hi})")

    def ranges(self) -> np.ndarray:
        out = np.empty((len(self.schema), 2))
        for j, name in enumerate(self.schema.metrics):
            out[j] = self.feature_model.get(name, self.default_range)
        return out

    def concept_at(self, ordinal: int) -> ConceptSpec:
        active = self.segments[0][1]
        for start, concept in self.segments:
            if ordinal >= start:
                active = concept
        return active

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "noise_rate": self.noise_rate,
            "default_range": list(self.default_range),
            "feature_model": {k: list(v) for k, v in self.feature_model.items()},
            "segments": [
                {
                    "start": start,
                    "default": str(c.default),
                    "rules": [
                        {"metric": r.metric, "op": r.op, "threshold": r.threshold, "label": str(r.label)}
                        for r in c.rules
                    ],
                }
                for start, c in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping, schema: MetricSchema = DEFAULT_SCHEMA) -> "DriftScript":
        try:
            if "preset" in d:
                if d["preset"] != "jazz-like":
                    raise InvalidScript(f"unknown preset {d['preset']!r}")
                kwargs = {k: v for k, v in d.items() if k != "preset"}
                return jazz_like_script(**kwargs)
            segments = tuple(
                (
                    int(seg["start"]),
                    ConceptSpec(
                        tuple(
                            Rule(r["metric"], r["op"], float(r["threshold"]), BuildOutcome.parse(r["label"]))
                            for r in seg.get("rules", [])
                        ),
                        BuildOutcome.parse(seg.get("default", "success")),
                    ),
                )
                for seg in d["segments"]
            )
            script = cls(
                segments=segments,
                noise_rate=float(d.get("noise_rate", 0.0)),
                feature_model={k: tuple(map(float, v)) for k, v in d.get("feature_model", {}).items()},
                seed=int(d.get("seed", 0)),
                default_range=tuple(map(float, d.get("default_range", DEFAULT_RANGE))),
                schema=schema,
            )
        except InvalidScript:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScript(f"malformed script: {exc}") from None
        script.validate()
        return script


def load_script(path) -> DriftScript:
    """Read a JSON drift script (either explicit segments or ``{"preset": "jazz-like", ...}``)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidScript(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return DriftScript.from_dict(data)


JAZZ_RANGES = {AVG_ATTRIBUTES_PER_CLASS: (0.0, 20.0), NUM_INTERFACES: (0.0, 40.0)}


def jazz_concept(theta_attrs: float, theta_ifaces: float) -> ConceptSpec:
    """FAILURE on many attributes per class, else on many interfaces, else SUCCESS."""
    return ConceptSpec(
        (
            Rule(AVG_ATTRIBUTES_PER_CLASS, ">", theta_attrs, BuildOutcome.FAILURE),
            Rule(NUM_INTERFACES, ">", theta_ifaces, BuildOutcome.FAILURE),
        ),
        BuildOutcome.SUCCESS,
    )


def jazz_like_script(
    seed: int = 0,
    noise_rate: float = 0.0,
    success_prior: float = 0.6,
    drift_at: int | None = 1000,
    drift_prior: float = 0.35,
) -> DriftScript:
    """Two-attribute concept over the 42 metrics with one drift in the first threshold.

    Thresholds sit at the quantiles that give a success fraction of
    ``success_prior`` (split evenly between the two rules).  At ``drift_at``
    the attributes-per-class threshold moves so the success fraction becomes
    ``drift_prior``.  ``drift_at=None`` keeps a single concept.
    """
    if not 0 < success_prior < 1 or not 0 < drift_prior < 1:
        raise InvalidScript("priors must lie in (0, 1)")
    lo_a, hi_a = JAZZ_RANGES[AVG_ATTRIBUTES_PER_CLASS]
    lo_b, hi_b = JAZZ_RANGES[NUM_INTERFACES]
    q = math.sqrt(success_prior)
    theta_b = lo_b + q * (hi_b - lo_b)
    segments = [(0, jazz_concept(lo_a + q * (hi_a - lo_a), theta_b))]
    if drift_at is not None:
        if drift_prior / q >= 1:
            raise InvalidScript("drift_prior too large for the interfaces threshold")
        segments.append((int(drift_at), jazz_concept(lo_a + drift_prior / q * (hi_a - lo_a), theta_b)))
    script = DriftScript(tuple(segments), noise_rate, dict(JAZZ_RANGES), seed)
    script.validate()
    return script


def generate_arrays(script: DriftScript, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(X, labels, clean_labels)``; labels include noise flips."""
    if n < 1:
        raise InvalidScript("n must be at least 1")
    script.validate()
    rng = np.random.default_rng(script.seed)
    ranges = script.ranges()
    X = rng.uniform(ranges[:, 0], ranges[:, 1], size=(n, len(script.schema)))
    flips = rng.random(n) < script.noise_rate
    clean = np.empty(n, dtype=int)
    starts = [s for s, _ in script.segments] + [n]
    for (start, concept), stop in zip(script.segments, starts[1:]):
        a, b = min(start, n), min(stop, n)
        if a < b:
            clean[a:b] = concept.label_matrix(X[a:b], script.schema)
    labels = np.where(flips, 1 - clean, clean)
    return X, labels, clean


def generate_stream(script: DriftScript, n: int) -> BuildDataset:
    X, labels, _ = generate_arrays(script, n)
    width = len(str(max(n - 1, 0)))
    return BuildDataset(
        BuildInstance(f"synth-{i:0{width}d}", i, X[i], BuildOutcome(int(labels[i])))
        for i in range(n)
    )


def dataset_arrays(dataset: Sequence[BuildInstance]) -> tuple[np.ndarray, np.ndarray]:
    X = np.array([inst.metrics for inst in dataset])
    y = np.array([int(inst.outcome) for inst in dataset])
    return X, y

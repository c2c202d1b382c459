"""Build-metric schema, build instances and file-to-build aggregation."""

from __future__ import annotations

import enum
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    EmptyInput,
    MissingMetric,
    NonNumericValue,
    SchemaMismatch,
    UnknownOutcome,
)

CATEGORIES = ("Complexity", "Halstead", "Basic", "Dependency", "Cohesion")

_TABLE = {
    "Complexity": (
        "Average block depth",
        "Weighted methods per class",
        "Maintainability index",
        "Cyclomatic complexity",
    ),
    "Dependency": (
        "Abstractness",
        "Afferent coupling",
        "Efferent coupling",
        "Instability",
        "Normalized Distance",
    ),
    "Cohesion": (
        "Lack of cohesion 1",
        "Lack of cohesion 2",
        "Lack of cohesion 3",
    ),
    "Halstead": (
        "Number of operands",
        "Number of operators",
        "Number of unique operands",
        "Number of unique operators",
        "Number of delivered bugs",
        "Difficulty level",
        "Effort to implement",
        "Time to implement",
        "Program length",
        "Program level",
        "Program vocabulary size",
        "Program volume",
    ),
    "Basic": (
        "Depth of Inheritance",
        "Number of attributes",
        "Average number of attributes per class",
        "Average number of constructors per class",
        "Average number of comments",
        "Average lines of code per method",
        "Average number of methods",
        "Average number of parameters",
        "Number of types per package",
        "Comment/Code Ratio",
        "Number of constructors",
        "Number of import statements",
        "Number of interfaces",
        "Lines of code",
        "Number of comments",
        "Number of methods",
        "Number of parameters",
        "Number of lines",
    ),
}

AVG_ATTRIBUTES_PER_CLASS = "Average number of attributes per class"
NUM_INTERFACES = "Number of interfaces"


class BuildOutcome(enum.IntEnum):
    """Binary build result. The integer value doubles as the vote index."""

    FAILURE = 0
    SUCCESS = 1

    @classmethod
    def parse(cls, text: str) -> "BuildOutcome":
        key = str(text).strip().lower()
        if key == "success":
            return cls.SUCCESS
        if key == "failure":
            return cls.FAILURE
        raise UnknownOutcome(f"unknown build outcome {text!r}")

    def __str__(self) -> str:
        return self.name.lower()


class AggregationStrategy(enum.Enum):
    MAX = "max"
    MEAN = "mean"
    MEDIAN = "median"
    SUM = "sum"


@dataclass(frozen=True)
class MetricSchema:
    """Ordered metric names with their category.

    The default schema holds the 42 software metrics grouped into the
    Complexity, Halstead, Basic, Dependency and Cohesion families.
    """

    metrics: tuple[str, ...]
    categories: Mapping[str, str]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.metrics)) != len(self.metrics):
            raise ValueError("metric names must be unique")
        missing = [m for m in self.metrics if m not in self.categories]
        if missing:
            raise ValueError(f"metrics without a category: {missing}")
        object.__setattr__(self, "_index", {m: i for i, m in enumerate(self.metrics)})

    @classmethod
    def default(cls) -> "MetricSchema":
        names: list[str] = []
        cats: dict[str, str] = {}
        for cat in ("Complexity", "Dependency", "Cohesion", "Halstead", "Basic"):
            for name in _TABLE[cat]:
                names.append(name)
                cats[name] = cat
        return cls(tuple(names), cats)

    @classmethod
    def from_header(cls, names: Sequence[str]) -> "MetricSchema":
        """Build a schema from column names, all of which must be known metrics."""
        known = cls.default().categories
        unknown = [n for n in names if n not in known]
        if unknown:
            raise SchemaMismatch(f"unknown metric columns: {unknown}")
        return cls(tuple(names), {n: known[n] for n in names})

    def __len__(self) -> int:
        return len(self.metrics)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaMismatch(f"{name!r} is not a schema metric") from None

    def category_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(CATEGORIES, 0)
        for name in self.metrics:
            counts[self.categories[name]] += 1
        return counts


DEFAULT_SCHEMA = MetricSchema.default()


def as_metric_vector(values, size: int | None = None) -> np.ndarray:
    """Return a read-only float64 copy of ``values`` after validating it."""
    vec = np.array(values, dtype=float)
    if vec.ndim != 1:
        raise SchemaMismatch("metric vector must be one-dimensional")
    if size is not None and vec.shape[0] != size:
        raise SchemaMismatch(f"expected {size} metric values, got {vec.shape[0]}")
    if not np.all(np.isfinite(vec)):
        raise NonNumericValue("metric values must be finite")
    vec.flags.writeable = False
    return vec


@dataclass(frozen=True)
class BuildInstance:
    build_id: str
    ordinal: int
    metrics: np.ndarray
    outcome: BuildOutcome

    def __post_init__(self):
        if self.ordinal < 0:
            raise ValueError("ordinal must be nonnegative")
        object.__setattr__(self, "metrics", as_metric_vector(self.metrics))
        object.__setattr__(self, "outcome", BuildOutcome(self.outcome))

    def __eq__(self, other):
        if not isinstance(other, BuildInstance):
            return NotImplemented
        return (
            self.build_id == other.build_id
            and self.ordinal == other.ordinal
            and self.outcome == other.outcome
            and np.array_equal(self.metrics, other.metrics)
        )

    __hash__ = None


def _to_float(name: str, raw) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise NonNumericValue(f"metric {name!r} has non-numeric value {raw!r}") from None
    if not math.isfinite(value):
        raise NonNumericValue(f"metric {name!r} is not finite: {raw!r}")
    return value


def parse_build_record(raw: Mapping[str, object], schema: MetricSchema = DEFAULT_SCHEMA) -> BuildInstance:
    """Validate a field map (e.g. a CSV row) into a :class:`BuildInstance`.

    The record must carry ``build_id``, ``ordinal`` (or ``timestamp``),
    ``outcome`` and one field per schema metric.
    """
    for key in ("build_id", "outcome"):
        if key not in raw:
            raise MissingMetric(f"record lacks required field {key!r}")
    order = raw.get("ordinal", raw.get("timestamp"))
    if order is None:
        raise MissingMetric("record lacks 'ordinal' or 'timestamp'")
    try:
        ordinal = int(float(order))
    except (TypeError, ValueError):
        raise NonNumericValue(f"ordinal {order!r} is not numeric") from None
    values = []
    for name in schema.metrics:
        if name not in raw:
            raise MissingMetric(f"record lacks metric {name!r}")
        values.append(_to_float(name, raw[name]))
    return BuildInstance(
        build_id=str(raw["build_id"]),
        ordinal=ordinal,
        metrics=np.asarray(values),
        outcome=BuildOutcome.parse(str(raw["outcome"])),
    )


def aggregate_file_metrics(file_rows, strategy: AggregationStrategy = AggregationStrategy.MEAN) -> np.ndarray:
    """Collapse per-file metric rows into a single build-level vector.

    An even number of rows takes the mean of the two middle values as the
    median.
    """
    rows = np.asarray(file_rows, dtype=float)
    if rows.size == 0:
        raise EmptyInput("no file rows to aggregate")
    if rows.ndim == 1:
        rows = rows[np.newaxis, :]
    strategy = AggregationStrategy(strategy)
    if strategy is AggregationStrategy.MAX:
        out = rows.max(axis=0)
    elif strategy is AggregationStrategy.MEAN:
        out = rows.mean(axis=0)
    elif strategy is AggregationStrategy.MEDIAN:
        out = np.median(rows, axis=0)
    else:
        out = rows.sum(axis=0)
    return as_metric_vector(out)

"""Prequential evaluation, phase statistics, ANOVA, confusion rates and churn."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special
from scipy import stats as sps

from .exceptions import (
    ConfigError,
    DegenerateVariance,
    EmptyCurrentTree,
    EmptyPhase,
    TooFewInstances,
    UndefinedRate,
)
from .metrics import BuildOutcome
from .tree import TreeShape

P_DISPLAY_FLOOR = 1e-6


# ---------------------------------------------------------------- prequential

@dataclass(frozen=True)
class PrequentialRecord:
    stream_index: int
    build_id: str
    predicted: BuildOutcome
    actual: BuildOutcome
    cumulative_accuracy: float
    drift_flag: bool = False

    @property
    def correct(self) -> bool:
        return self.predicted == self.actual

    def to_dict(self) -> dict:
        return {
            "stream_index": self.stream_index,
            "build_id": self.build_id,
            "predicted": str(self.predicted),
            "actual": str(self.actual),
            "cumulative_accuracy": self.cumulative_accuracy,
            "drift_flag": self.drift_flag,
        }


@dataclass
class PrequentialResult:
    records: list[PrequentialRecord]
    drift_log: list[dict]
    snapshots: dict[int, object] = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return self.records[-1].cumulative_accuracy if self.records else float("nan")

    def cumulative_drifts(self) -> list[tuple[int, int]]:
        count, out = 0, []
        for r in self.records:
            count += r.drift_flag
            out.append((r.stream_index, count))
        return out


class MajorityClassLearner:
    """Predicts the most frequent outcome seen so far (ties to FAILURE)."""

    def __init__(self):
        self.counts = np.zeros(2)

    def learn_one(self, instance):
        self.counts[int(instance.outcome)] += 1
        return self

    def predict(self, metrics):
        f, s = self.counts
        label = BuildOutcome.SUCCESS if s > f else BuildOutcome.FAILURE
        return label, (float(f), float(s))


def prequential_run(learner, detector, sequence, checkpoints: Iterable[int] = ()) -> PrequentialResult:
    """Interleaved test-then-train over a sequence.

    The learner is first trained on the sequence's warmup slice.  Each pool
    instance is then predicted, its 0/1 error fed to ``detector`` (may be
    None), and only then learned.  When the detector signals a rise in error
    and the learner exposes ``handle_drift(metrics)``, the affected subtree
    is pruned.  ``checkpoints`` are stream indices (1-based, warmup
    included) after which a learner snapshot is kept.
    """
    if hasattr(sequence, "warmup") and hasattr(sequence, "stream"):
        warmup, stream = list(sequence.warmup), sequence.stream()
    else:
        warmup, stream = sequence
        warmup, stream = list(warmup), list(stream)
    wanted = set(checkpoints)
    snapshots: dict[int, object] = {}
    for inst in warmup:
        learner.learn_one(inst)
    offset = len(warmup)
    if offset in wanted and hasattr(learner, "snapshot"):
        snapshots[offset] = learner.snapshot()
    records: list[PrequentialRecord] = []
    drift_log: list[dict] = []
    correct = 0
    for t, inst in enumerate(stream, 1):
        index = offset + t
        predicted, _ = learner.predict(inst.metrics)
        hit = predicted == inst.outcome
        correct += hit
        flag = False
        if detector is not None:
            event = detector.add_element(0.0 if hit else 1.0)
            if event is not None:
                flag = True
                entry = {"stream_index": index, "build_id": inst.build_id,
                         "discarded_count": event.discarded_count,
                         "retained_mean": event.retained_mean,
                         "discarded_mean": event.discarded_mean,
                         "cumulative_drifts": detector.cumulative_drifts,
                         "pruned_path": None}
                if event.increased and hasattr(learner, "handle_drift"):
                    entry["pruned_path"] = list(learner.handle_drift(inst.metrics))
                drift_log.append(entry)
        learner.learn_one(inst)
        records.append(PrequentialRecord(index, inst.build_id, BuildOutcome(predicted),
                                         inst.outcome, correct / t, flag))
        if index in wanted and hasattr(learner, "snapshot"):
            snapshots[index] = learner.snapshot()
    return PrequentialResult(records, drift_log, snapshots)


# ------------------------------------------------------------ confusion rates

@dataclass(frozen=True)
class ConfusionRates:
    """Per-class true/false positive rates; None where a rate is undefined."""

    tp_success: float | None
    fp_success: float | None
    tp_failure: float | None
    fp_failure: float | None
    counts: tuple[tuple[int, int], tuple[int, int]] = ((0, 0), (0, 0))

    def rate(self, kind: str, outcome: BuildOutcome) -> float:
        value = getattr(self, f"{kind}_{BuildOutcome(outcome).name.lower()}")
        if value is None:
            raise UndefinedRate(f"{kind} rate for {BuildOutcome(outcome)} is undefined")
        return value

    def precision(self, outcome: BuildOutcome) -> float | None:
        c = int(outcome)
        col = self.counts[0][c] + self.counts[1][c]
        return self.counts[c][c] / col if col else None

    def to_dict(self) -> dict:
        return {
            "tp_success": self.tp_success,
            "fp_success": self.fp_success,
            "tp_failure": self.tp_failure,
            "fp_failure": self.fp_failure,
            "counts": [list(row) for row in self.counts],
        }


def rates_from_counts(counts) -> ConfusionRates:
    """``counts[actual][predicted]`` with FAILURE=0, SUCCESS=1."""
    c = [[int(v) for v in row] for row in np.asarray(counts, dtype=int)]
    n_fail, n_succ = sum(c[0]), sum(c[1])
    return ConfusionRates(
        tp_success=c[1][1] / n_succ if n_succ else None,
        fp_success=c[0][1] / n_fail if n_fail else None,
        tp_failure=c[0][0] / n_fail if n_fail else None,
        fp_failure=c[1][0] / n_succ if n_succ else None,
        counts=tuple(tuple(row) for row in c),
    )


def confusion_rates(records: Sequence, window: int | None = None) -> ConfusionRates:
    if not records:
        raise TooFewInstances("no records")
    if window is not None:
        if window < 1:
            raise ConfigError("window must be positive")
        records = records[-window:]
    counts = np.zeros((2, 2), dtype=int)
    for r in records:
        counts[int(r.actual), int(r.predicted)] += 1
    return rates_from_counts(counts)


def cumulative_rate_series(records: Sequence) -> list[tuple[int, ConfusionRates]]:
    counts = np.zeros((2, 2), dtype=int)
    out = []
    for r in records:
        counts[int(r.actual), int(r.predicted)] += 1
        out.append((r.stream_index, rates_from_counts(counts)))
    return out


# ----------------------------------------------------------------- phases

@dataclass(frozen=True)
class Phase:
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class PhaseSpec:
    """Contiguous, non-overlapping, inclusive instance-number ranges."""

    phases: tuple[Phase, ...]

    def __post_init__(self):
        if not self.phases:
            raise ConfigError("at least one phase is required")
        for p in self.phases:
            if p.end < p.start:
                raise ConfigError(f"phase {p.label!r} ends before it starts")
        for a, b in zip(self.phases, self.phases[1:]):
            if b.start != a.end + 1:
                raise ConfigError(f"phases {a.label!r} and {b.label!r} are not contiguous")

    @classmethod
    def from_cuts(cls, warmup: int, cuts: Sequence[int], end: int) -> "PhaseSpec":
        """Phases (warmup, c1], (c1, c2], ..., (ck, end]; cuts at or past ``end`` are dropped."""
        edges = [warmup] + [c for c in cuts if warmup < c < end] + [end]
        if list(cuts) != sorted(cuts):
            raise ConfigError("phase cuts must be increasing")
        return cls(tuple(Phase(f"Phase {i + 1}", lo + 1, hi)
                         for i, (lo, hi) in enumerate(zip(edges, edges[1:]))))

    def to_list(self) -> list:
        return [[p.label, p.start, p.end] for p in self.phases]


DEFAULT_PHASE_CUTS = (40, 80, 180)


@dataclass(frozen=True)
class GroupStats:
    label: str
    count: int
    mean: float
    std: float
    std_error: float
    ci_lower: float
    ci_upper: float
    reliable: bool

    def to_dict(self) -> dict:
        return asdict(self)


def describe(label: str, values) -> GroupStats:
    """Mean, sample std, std error and t-based 95% CI of one group."""
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        raise EmptyPhase(f"group {label!r} has no values")
    mean = float(v.mean())
    if n == 1:
        return GroupStats(label, 1, mean, 0.0, 0.0, mean, mean, False)
    if np.all(v == v[0]):
        # flat phase: report exactly, summation would leave ulp-level residue
        c = float(v[0])
        return GroupStats(label, n, c, 0.0, 0.0, c, c, True)
    std = float(v.std(ddof=1))
    se = std / math.sqrt(n)
    half = float(sps.t.ppf(0.975, n - 1)) * se
    return GroupStats(label, n, mean, std, se, mean - half, mean + half, True)


def phase_stats(series: Iterable[tuple[int, float]], phases: PhaseSpec) -> list[GroupStats]:
    pairs = list(series)
    out = []
    for p in phases.phases:
        vals = [v for i, v in pairs if p.start <= i <= p.end and v is not None]
        if not vals:
            raise EmptyPhase(f"{p.label} ({p.start}-{p.end}) has no values")
        out.append(describe(p.label, vals))
    return out


# ------------------------------------------------------------------ ANOVA

@dataclass(frozen=True)
class Contrast:
    group_a: str
    group_b: str
    mean_difference: float
    t: float
    df: int
    p_value: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p_display"] = format_p(self.p_value)
        return d


@dataclass(frozen=True)
class AnovaResult:
    f: float
    df_between: int
    df_within: int
    p_value: float
    groups: tuple[GroupStats, ...]
    ms_within: float

    def contrast(self, a: int | str, b: int | str) -> Contrast:
        """Planned two-group t-test using the pooled within-group variance."""
        ga, gb = self._group(a), self._group(b)
        diff = ga.mean - gb.mean
        se = math.sqrt(self.ms_within * (1.0 / ga.count + 1.0 / gb.count))
        t = diff / se
        p = float(2.0 * special.stdtr(self.df_within, -abs(t)))
        return Contrast(ga.label, gb.label, diff, t, self.df_within, p)

    def _group(self, key) -> GroupStats:
        if isinstance(key, int):
            return self.groups[key]
        for g in self.groups:
            if g.label == key:
                return g
        raise KeyError(key)

    def to_dict(self) -> dict:
        return {
            "f": self.f,
            "df_between": self.df_between,
            "df_within": self.df_within,
            "p_value": self.p_value,
            "p_display": format_p(self.p_value),
            "groups": [g.to_dict() for g in self.groups],
        }


def format_p(p: float) -> str:
    if p < P_DISPLAY_FLOOR:
        return "≈0"
    return f"{p:.4f}" if p >= 1e-4 else f"{p:.1e}"


def one_way_anova(groups: Sequence, labels: Sequence[str] | None = None) -> AnovaResult:
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if len(arrays) < 2:
        raise TooFewInstances("ANOVA needs at least two groups")
    if any(a.size < 2 for a in arrays):
        raise TooFewInstances("every ANOVA group needs at least two values")
    labels = list(labels) if labels is not None else [f"Group {i + 1}" for i in range(len(arrays))]
    n_total = sum(a.size for a in arrays)
    grand = sum(a.sum() for a in arrays) / n_total
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_within = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    df_b, df_w = len(arrays) - 1, n_total - len(arrays)
    if ss_within <= 0:
        raise DegenerateVariance("within-group sum of squares is zero")
    ms_w = ss_within / df_w
    f = float((ss_between / df_b) / ms_w)
    p = float(special.fdtrc(df_b, df_w, f))
    desc = tuple(describe(lab, a) for lab, a in zip(labels, arrays))
    return AnovaResult(f, df_b, df_w, p, desc, float(ms_w))


# ------------------------------------------------------------------ churn

@dataclass(frozen=True)
class ChurnResult:
    added: int
    deleted: int
    total: int
    churn_percent: float

    def to_dict(self) -> dict:
        return asdict(self)


def attribute_churn(previous_attrs, current_attrs) -> ChurnResult:
    """(added + deleted) / attributes-in-current-tree, as a percentage."""
    prev, cur = set(previous_attrs), set(current_attrs)
    if not cur:
        raise EmptyCurrentTree("current tree uses no attributes")
    added, deleted = len(cur - prev), len(prev - cur)
    return ChurnResult(added, deleted, len(cur), (added + deleted) / len(cur) * 100.0)


@dataclass(frozen=True)
class ComparisonRow:
    label: str
    shape: TreeShape
    churn: ChurnResult | None

    def to_dict(self) -> dict:
        return {"label": self.label, "shape": self.shape.to_dict(),
                "churn": None if self.churn is None else self.churn.to_dict()}


@dataclass(frozen=True)
class ModelComparison:
    rows: tuple[ComparisonRow, ...]

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d) -> "ModelComparison":
        rows = []
        for r in d["rows"]:
            churn = None if r["churn"] is None else ChurnResult(**r["churn"])
            rows.append(ComparisonRow(r["label"], TreeShape.from_dict(r["shape"]), churn))
        return cls(tuple(rows))

    def table(self) -> str:
        """Plain-text layout with one column per snapshot."""
        heads = [r.label for r in self.rows]
        lines = [("", heads)]
        lines.append(("Size (depth of tree)", [str(r.shape.depth) for r in self.rows]))
        lines.append(("Size (no. tests needed)", [str(r.shape.test_count) for r in self.rows]))
        lines.append(("Size (no. of leaf nodes)", [str(r.shape.leaf_count) for r in self.rows]))
        lines.append(("No. Attributes (total)", [str(r.shape.attribute_count) for r in self.rows]))
        lines.append(("Attribute Churn", ["-" if r.churn is None else format(r.churn.churn_percent, "g")
                                          for r in self.rows]))
        width0 = max(len(name) for name, _ in lines)
        widths = [max(len(h), *(len(cells[i]) for _, cells in lines)) for i, h in enumerate(heads)]
        out = []
        for name, cells in lines:
            out.append("  ".join([name.ljust(width0)] + [c.rjust(w) for c, w in zip(cells, widths)]))
        return "\n".join(out) + "\n"


def compare_models(snapshots: Sequence[tuple[str, TreeShape]]) -> ModelComparison:
    """Shape rows plus churn against the preceding snapshot.

    Churn is None for the first snapshot, and also when a snapshot has no
    split attributes (the ratio is undefined).
    """
    if not snapshots:
        raise ConfigError("need at least one snapshot")
    rows = []
    prev = None
    for label, shape in snapshots:
        churn = None
        if prev is not None and shape.attribute_set:
            churn = attribute_churn(prev.attribute_set, shape.attribute_set)
        rows.append(ComparisonRow(label, shape, churn))
        prev = shape
    return ModelComparison(tuple(rows))

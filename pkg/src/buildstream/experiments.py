"""End-to-end runs: chronological evaluation, ordering experiment, batch-vs-stream comparison."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .adwin import AdwinDetector, normalize_signal
from .batch import BatchTreeParams, cross_validate, fit_batch_tree
from .evaluation import (
    DEFAULT_PHASE_CUTS,
    PhaseSpec,
    attribute_churn,
    compare_models,
    cumulative_rate_series,
    describe,
    one_way_anova,
    phase_stats,
    prequential_run,
    rates_from_counts,
)
from .exceptions import (
    DegenerateVariance,
    EmptyCurrentTree,
    EmptyPhase,
    SingleClass,
    TooFewInstances,
)
from .hoeffding import HoeffdingTree, TreeParams
from .metrics import AVG_ATTRIBUTES_PER_CLASS, DEFAULT_SCHEMA, NUM_INTERFACES, MetricSchema
from .streams import make_sequences, replay_chronological
from .synth import DriftScript, dataset_arrays, generate_stream

RATE_KEYS = ("tp_success", "fp_success", "tp_failure", "fp_failure")


def _pipeline(tree_params: TreeParams | None, confidence: float, schema: MetricSchema):
    return HoeffdingTree(schema, tree_params or TreeParams()), AdwinDetector.from_confidence(confidence)


def feature_drift_trajectory(values, confidence: float = 0.99) -> list[int]:
    """Cumulative ADWIN detections over a min-max normalised feature series."""
    det = AdwinDetector.from_confidence(confidence)
    out = []
    for v in normalize_signal(values):
        det.add_element(v)
        out.append(det.cumulative_drifts)
    return out


def evaluate_chronological(dataset, tree_params: TreeParams | None = None, confidence: float = 0.99,
                           warmup: int = 20, phase_cuts: Sequence[int] = DEFAULT_PHASE_CUTS,
                           schema: MetricSchema = DEFAULT_SCHEMA) -> dict:
    warm, rest = replay_chronological(dataset, warmup)
    stream = list(rest)
    tree, det = _pipeline(tree_params, confidence, schema)
    run = prequential_run(tree, det, (warm, stream))
    end = warmup + len(stream)
    phases = PhaseSpec.from_cuts(warmup, phase_cuts, end)

    acc_series = [(r.stream_index, r.cumulative_accuracy) for r in run.records]
    rate_series = cumulative_rate_series(run.records)
    phase_report = {"accuracy": [g.to_dict() for g in phase_stats(acc_series, phases)]}
    anova = {}
    for key in ("accuracy",) + RATE_KEYS:
        if key == "accuracy":
            series = acc_series
        else:
            series = [(i, getattr(rates, key)) for i, rates in rate_series]
            try:
                phase_report[key] = [g.to_dict() for g in phase_stats(series, phases)]
            except EmptyPhase as exc:  # a class absent early on leaves a phase empty
                phase_report[key] = {"error": str(exc)}
                anova[key] = {"error": str(exc)}
                continue
        groups = [[v for i, v in series if p.start <= i <= p.end and v is not None] for p in phases.phases]
        try:
            result = one_way_anova(groups, [p.label for p in phases.phases])
        except (DegenerateVariance, TooFewInstances) as exc:
            anova[key] = {"error": str(exc)}
            continue
        anova[key] = result.to_dict()
        anova[key]["contrasts"] = [
            result.contrast(b.label, a.label).to_dict()
            for a, b in zip(phases.phases, phases.phases[1:])
        ]

    confusion_by_phase = {}
    for p in phases.phases:
        recs = [r for r in run.records if p.start <= r.stream_index <= p.end]
        counts = np.zeros((2, 2), dtype=int)
        for r in recs:
            counts[int(r.actual), int(r.predicted)] += 1
        confusion_by_phase[p.label] = rates_from_counts(counts).to_dict()

    tracked = sorted(tree.shape().attribute_set) or [AVG_ATTRIBUTES_PER_CLASS, NUM_INTERFACES]
    full = list(warm) + stream
    feature_drifts = {
        name: feature_drift_trajectory([inst.metrics[schema.index(name)] for inst in full], confidence)
        for name in tracked
    }
    return {
        "records": run.records,
        "rate_series": rate_series,
        "drift_log": run.drift_log,
        "phases": phases,
        "phase_report": phase_report,
        "anova": anova,
        "confusion_by_phase": confusion_by_phase,
        "final_tree": tree.dump(),
        "final_shape": tree.shape(),
        "feature_drifts": feature_drifts,
        "accuracy": run.accuracy,
    }


def sequence_experiment(dataset, k: int = 10, warmup: int = 20, tail: int = 21,
                        tree_params: TreeParams | None = None, confidence: float = 0.99,
                        schema: MetricSchema = DEFAULT_SCHEMA) -> dict:
    """Accuracy over the final ``tail`` arrivals of each ordering, with ANOVA.

    Contrasts compare the chronological ordering (the last one) with the
    next-to-last and with the first ordering.
    """
    groups, labels, finals = [], [], []
    for seq in make_sequences(dataset, k, warmup):
        tree, det = _pipeline(tree_params, confidence, schema)
        run = prequential_run(tree, det, seq)
        values = [r.cumulative_accuracy for r in run.records[-tail:]]
        groups.append(values)
        labels.append(f"S{seq.sequence_id}")
        finals.append(run.accuracy)
    table = [describe(lab, g).to_dict() for lab, g in zip(labels, groups)]
    result = {"table": table, "final_accuracy": dict(zip(labels, finals))}
    try:
        anova = one_way_anova(groups, labels)
        result["anova"] = anova.to_dict()
        contrasts = []
        if k >= 2:
            contrasts.append(anova.contrast(labels[-1], labels[-2]).to_dict())
        if k >= 3:
            contrasts.append(anova.contrast(labels[-1], labels[0]).to_dict())
        result["contrasts"] = contrasts
    except (DegenerateVariance, TooFewInstances) as exc:
        result["anova"] = {"error": str(exc)}
        result["contrasts"] = []
    return result


def compare_batch_stream(dataset, checkpoints: Sequence[int] = (160, 180), warmup: int = 20,
                         tree_params: TreeParams | None = None, confidence: float = 0.99,
                         batch_params: BatchTreeParams | None = None, folds: int = 10, seed: int = 0,
                         schema: MetricSchema = DEFAULT_SCHEMA) -> dict:
    """Snapshot the stream tree and refit the batch tree at each checkpoint (build count)."""
    warm, rest = replay_chronological(dataset, warmup)
    stream = list(rest)
    n = warmup + len(stream)
    cps = sorted(c for c in set(checkpoints) if warmup <= c <= n)
    tree, det = _pipeline(tree_params, confidence, schema)
    run = prequential_run(tree, det, (warm, stream), checkpoints=cps)
    data = list(warm) + stream
    stream_snaps, batch_snaps, details = [], [], []
    for c in cps:
        snap = run.snapshots[c]
        batch = fit_batch_tree(data[:c], batch_params, schema)
        entry = {"checkpoint": c, "hoeffding_tree": snap.dump(), "batch_tree": batch.dump()}
        try:
            entry["batch_cv"] = cross_validate(data[:c], folds, seed, batch_params, schema).to_dict()
        except (TooFewInstances, SingleClass) as exc:
            entry["batch_cv"] = {"error": str(exc)}
        details.append(entry)
        stream_snaps.append((f"Hoeffding Tree ({c} builds)", snap.shape()))
        batch_snaps.append((f"J48 ({c} builds)", batch.shape()))
    return {
        "checkpoints": cps,
        "batch": compare_models(batch_snaps) if cps else None,
        "stream": compare_models(stream_snaps) if cps else None,
        "details": details,
    }


def _mean_churn(shapes) -> tuple[float, int]:
    values = []
    for prev, cur in zip(shapes, shapes[1:]):
        try:
            values.append(attribute_churn(prev.attribute_set, cur.attribute_set).churn_percent)
        except EmptyCurrentTree:
            continue
    return (float(np.mean(values)) if values else 0.0), len(values)


def churn_stability(script: DriftScript, n: int = 3000, every: int = 500, warmup: int = 20,
                    tree_params: TreeParams | None = None, confidence: float = 0.99,
                    batch_params: BatchTreeParams | None = None) -> dict:
    """Mean attribute churn between consecutive checkpoints for both learners.

    Checkpoints fall every ``every`` builds.  Pairs whose later tree has no
    split attributes are skipped (churn undefined).
    """
    data = generate_stream(script, n)
    cps = list(range(every, n + 1, every))
    tree, det = _pipeline(tree_params, confidence, script.schema)
    run = prequential_run(tree, det, (list(data[:warmup]), list(data[warmup:])), checkpoints=cps)
    stream_shapes = [run.snapshots[c].shape() for c in cps]
    X, y = dataset_arrays(data)
    batch_shapes = [fit_batch_tree((X[:c], y[:c]), batch_params, script.schema).shape() for c in cps]
    s_mean, s_pairs = _mean_churn(stream_shapes)
    b_mean, b_pairs = _mean_churn(batch_shapes)
    return {
        "checkpoints": cps,
        "stream_mean_churn": s_mean,
        "batch_mean_churn": b_mean,
        "stream_pairs": s_pairs,
        "batch_pairs": b_pairs,
        "stream_shapes": stream_shapes,
        "batch_shapes": batch_shapes,
    }

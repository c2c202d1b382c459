"""Streaming prediction of build outcomes from software metrics.

Hoeffding-tree learner with ADWIN drift detection, a batch C4.5 baseline,
prequential evaluation and model-stability measures.
"""

from .adwin import AdwinDetector, DriftEvent
from .batch import BatchTreeModel, BatchTreeParams, cross_validate, fit_batch_tree
from .evaluation import (
    PhaseSpec,
    attribute_churn,
    compare_models,
    confusion_rates,
    one_way_anova,
    phase_stats,
    prequential_run,
)
from .hoeffding import HoeffdingTree, TreeParams, hoeffding_bound
from .metrics import (
    DEFAULT_SCHEMA,
    AggregationStrategy,
    BuildInstance,
    BuildOutcome,
    MetricSchema,
    aggregate_file_metrics,
    parse_build_record,
)
from .streams import BuildDataset, make_sequences, replay_chronological, window_update
from .synth import DriftScript, generate_stream, jazz_like_script
from .tree import TreeShape, dump_tree, tree_shape

__version__ = "0.1.0"

__all__ = [
    "AdwinDetector",
    "AggregationStrategy",
    "BatchTreeModel",
    "BatchTreeParams",
    "BuildDataset",
    "BuildInstance",
    "BuildOutcome",
    "DEFAULT_SCHEMA",
    "DriftEvent",
    "DriftScript",
    "HoeffdingTree",
    "MetricSchema",
    "PhaseSpec",
    "TreeParams",
    "TreeShape",
    "aggregate_file_metrics",
    "attribute_churn",
    "compare_models",
    "confusion_rates",
    "cross_validate",
    "dump_tree",
    "fit_batch_tree",
    "generate_stream",
    "hoeffding_bound",
    "jazz_like_script",
    "make_sequences",
    "one_way_anova",
    "parse_build_record",
    "phase_stats",
    "prequential_run",
    "replay_chronological",
    "tree_shape",
    "window_update",
]

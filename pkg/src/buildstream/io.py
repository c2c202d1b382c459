"""Canonical build CSV reading and writing.

Header: ``build_id,ordinal,outcome`` followed by the metric names.  A
``timestamp`` column may stand in for ``ordinal``; builds are then ordered
by timestamp (file order breaks ties) and renumbered from 0.  Several rows
sharing a ``build_id`` are per-file rows and get aggregated into one build.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from pathlib import Path

from .exceptions import DataError, ParseError
from .metrics import (
    DEFAULT_SCHEMA,
    AggregationStrategy,
    BuildInstance,
    MetricSchema,
    aggregate_file_metrics,
    parse_build_record,
)
from .streams import BuildDataset

ID_COLUMNS = ("build_id", "ordinal", "outcome")


def dataset_to_csv(dataset: Sequence[BuildInstance], schema: MetricSchema = DEFAULT_SCHEMA) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(ID_COLUMNS) + list(schema.metrics))
    for inst in dataset:
        writer.writerow([inst.build_id, inst.ordinal, str(inst.outcome)]
                        + [repr(float(v)) for v in inst.metrics])
    return buf.getvalue()


def write_dataset(dataset, path, schema: MetricSchema = DEFAULT_SCHEMA) -> None:
    Path(path).write_text(dataset_to_csv(dataset, schema), encoding="utf-8")


def read_dataset(path, schema: MetricSchema = DEFAULT_SCHEMA,
                 aggregate: AggregationStrategy = AggregationStrategy.MEAN) -> BuildDataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_dataset(fh, schema, aggregate)


def parse_dataset(lines, schema: MetricSchema = DEFAULT_SCHEMA,
                  aggregate: AggregationStrategy = AggregationStrategy.MEAN) -> BuildDataset:
    reader = csv.DictReader(lines)
    header = reader.fieldnames
    if not header:
        raise ParseError("empty input, no header row", 1)
    if "ordinal" not in header and "timestamp" not in header:
        raise ParseError("header needs an 'ordinal' or 'timestamp' column", 1)
    by_timestamp = "ordinal" not in header
    groups: dict[str, list[tuple[int, BuildInstance, float]]] = {}
    for position, row in enumerate(reader):
        line = reader.line_num
        if None in row:
            raise ParseError("row has more fields than the header", line)
        try:
            record = dict(row)
            key = None
            if by_timestamp:
                key = float(record["timestamp"])
                record["ordinal"] = position
            inst = parse_build_record(record, schema)
        except DataError as exc:
            raise ParseError(str(exc), line) from None
        except ValueError as exc:
            raise ParseError(str(exc), line) from None
        groups.setdefault(inst.build_id, []).append((line, inst, key))

    builds = []
    for build_id, rows in groups.items():
        outcomes = {inst.outcome for _, inst, _ in rows}
        if len(outcomes) > 1:
            raise ParseError(f"build {build_id!r} has conflicting outcomes", rows[-1][0])
        first_line, first, key = rows[0]
        metrics = first.metrics
        if len(rows) > 1:
            metrics = aggregate_file_metrics([inst.metrics for _, inst, _ in rows], aggregate)
        order = (key, first.ordinal) if by_timestamp else (first.ordinal, 0)
        builds.append((order, first_line, BuildInstance(build_id, first.ordinal, metrics, first.outcome)))

    if by_timestamp:
        builds.sort(key=lambda b: b[0])
        instances = [BuildInstance(b.build_id, i, b.metrics, b.outcome) for i, (_, _, b) in enumerate(builds)]
    else:
        seen: dict[int, int] = {}
        for _, line, b in builds:
            if b.ordinal in seen:
                raise ParseError(f"ordinal {b.ordinal} repeats the build on line {seen[b.ordinal]}", line)
            seen[b.ordinal] = line
        instances = [b for _, _, b in builds]
    return BuildDataset(instances)

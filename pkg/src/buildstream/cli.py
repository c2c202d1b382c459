"""Command-line entry point.

Subcommands: ``generate``, ``evaluate``, ``sequences`` and ``compare``.
Exit codes: 0 ok, 1 usage or bad parameter, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import __version__
from .batch import BatchTreeParams
from .evaluation import DEFAULT_PHASE_CUTS
from .exceptions import ConfigError, DataError
from .experiments import compare_batch_stream, evaluate_chronological, sequence_experiment
from .hoeffding import TreeParams
from .io import dataset_to_csv, read_dataset
from .metrics import AggregationStrategy
from .synth import generate_stream, jazz_like_script, load_script

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

DEFAULTS = {
    "input": None,
    "output": None,
    "delta": 1e-7,
    "grace": 25,
    "tau": 0.1,
    "drift_confidence": 0.99,
    "warmup": 20,
    "phases": list(DEFAULT_PHASE_CUTS),
    "sequences": 10,
    "aggregate": "mean",
    "seed": None,
    "checkpoints": [160, 180],
    "count": 200,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="buildstream", description="Stream mining of build outcomes from code metrics.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="JSON config (or a report whose 'config' echo is reused)")
        p.add_argument("--input", help="input CSV (for generate: optional JSON drift script)")
        p.add_argument("--output", help="output directory (for generate: CSV path)")
        p.add_argument("--seed", type=int)
        return p

    gen = common(sub.add_parser("generate", help="write a synthetic build CSV"))
    gen.add_argument("--count", type=int, help="number of builds")

    for name, help_text in (("evaluate", "chronological prequential run"),
                            ("sequences", "instance-ordering experiment"),
                            ("compare", "batch vs stream model comparison")):
        p = common(sub.add_parser(name, help=help_text))
        p.add_argument("--delta", type=float)
        p.add_argument("--grace", type=int)
        p.add_argument("--tau", type=float)
        p.add_argument("--drift-confidence", type=float, dest="drift_confidence")
        p.add_argument("--warmup", type=int)
        p.add_argument("--aggregate", choices=[s.value for s in AggregationStrategy])
        if name == "evaluate":
            p.add_argument("--phases", type=_int_list, help="phase cut points, e.g. 40,80,180")
        if name == "sequences":
            p.add_argument("--sequences", type=int, help="number of orderings k")
        if name == "compare":
            p.add_argument("--checkpoints", type=_int_list, help="build counts to snapshot at")
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the --config file, then explicit flags; BSM_SEED fills an unset seed."""
    config = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno}: {exc.msg}") from None
        loaded = loaded.get("config", loaded)
        unknown = set(loaded) - set(DEFAULTS) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config.update({k: v for k, v in loaded.items() if k != "command"})
    if os.environ.get("BSM_SEED") and args.seed is None and config["seed"] is None:
        try:
            config["seed"] = int(os.environ["BSM_SEED"])
        except ValueError:
            raise ConfigError(f"BSM_SEED must be an integer, got {os.environ['BSM_SEED']!r}") from None
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    config["command"] = args.command
    _validate(config)
    return {k: config[k] for k in ["command", *DEFAULTS]}


def echo(cfg: dict) -> dict:
    """Config as echoed in reports; the output location is not a run parameter."""
    return {k: v for k, v in cfg.items() if k != "output"}


def _validate(cfg: dict) -> None:
    if not cfg.get("output"):
        raise ConfigError("--output is required")
    if cfg["command"] != "generate" and not cfg.get("input"):
        raise ConfigError("--input is required")
    if cfg["warmup"] < 0:
        raise ConfigError("--warmup must be nonnegative")
    if cfg["sequences"] < 1:
        raise ConfigError("--sequences must be positive")
    if cfg["count"] < 1:
        raise ConfigError("--count must be positive")
    if not 0 < cfg["drift_confidence"] < 1:
        raise ConfigError("--drift-confidence must lie in (0, 1)")
    if cfg["phases"] != sorted(set(cfg["phases"])):
        raise ConfigError("--phases must be strictly increasing")
    AggregationStrategy(cfg["aggregate"])
    tree_params(cfg)


def tree_params(cfg: dict) -> TreeParams:
    try:
        return TreeParams(delta=cfg["delta"], grace_period=cfg["grace"], tie_threshold=cfg["tau"])
    except ConfigError as exc:
        flag = {"delta": "--delta", "grace": "--grace", "tie": "--tau"}
        for key, name in flag.items():
            if key in str(exc):
                raise ConfigError(f"{name}: {exc}") from None
        raise


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _num(v):
    return "" if v is None else repr(float(v))


def write_outputs(files: dict[str, str], directory: Path) -> None:
    """Write every file to a temporary sibling first, then rename into place."""
    directory.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, directory / name))
    except BaseException:
        for tmp, _ in staged:
            Path(tmp).unlink(missing_ok=True)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)


def _load(cfg):
    path = Path(cfg["input"])
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return read_dataset(path, aggregate=AggregationStrategy(cfg["aggregate"]))


def cmd_generate(cfg) -> dict[str, str]:
    if cfg["input"]:
        path = Path(cfg["input"])
        if not path.is_file():
            raise FileNotFoundError(f"script file not found: {path}")
        script = load_script(path)
        if cfg["seed"] is not None:
            script = replace(script, seed=cfg["seed"])
    else:
        script = jazz_like_script(seed=cfg["seed"] or 0, drift_at=cfg["count"] // 2)
    return {"__file__": dataset_to_csv(generate_stream(script, cfg["count"]))}


def cmd_evaluate(cfg) -> dict[str, str]:
    data = _load(cfg)
    res = evaluate_chronological(data, tree_params(cfg), cfg["drift_confidence"],
                                 cfg["warmup"], cfg["phases"])
    records = res["records"]
    report = {
        "config": echo(cfg),
        "summary": {
            "instances": len(data),
            "stream_length": len(records),
            "final_accuracy": res["accuracy"],
            "cumulative_drifts": len(res["drift_log"]),
            "final_shape": res["final_shape"].to_dict(),
        },
        "phases": res["phases"].to_list(),
        "phase_report": res["phase_report"],
        "anova": res["anova"],
        "confusion_by_phase": res["confusion_by_phase"],
        "drift_log": res["drift_log"],
        "model": {"tree": res["final_tree"], "shape": res["final_shape"].to_dict()},
        "prequential": [r.to_dict() for r in records],
    }
    drift_rows, count = [], 0
    flagged = {d["stream_index"] for d in res["drift_log"]}
    for r in records:
        count += r.stream_index in flagged
        drift_rows.append([r.stream_index, count])
    offset = cfg["warmup"]
    feature_rows = []
    names = list(res["feature_drifts"])
    for i in range(len(records) + offset):
        feature_rows.append([i + 1] + [res["feature_drifts"][n][i] for n in names])
    return {
        "report.json": _dumps(report),
        "accuracy.csv": _csv([[r.stream_index, repr(r.cumulative_accuracy)] for r in records],
                             ["index", "cumulative_accuracy"]),
        "rates.csv": _csv([[i, _num(x.tp_success), _num(x.fp_success), _num(x.tp_failure), _num(x.fp_failure)]
                           for i, x in res["rate_series"]],
                          ["index", "tp_success", "fp_success", "tp_failure", "fp_failure"]),
        "drifts.csv": _csv(drift_rows, ["index", "cumulative_drifts"]),
        "feature_drifts.csv": _csv(feature_rows, ["index"] + names),
    }


def cmd_sequences(cfg) -> dict[str, str]:
    data = _load(cfg)
    res = sequence_experiment(data, cfg["sequences"], cfg["warmup"], tree_params=tree_params(cfg),
                              confidence=cfg["drift_confidence"])
    report = {"config": echo(cfg), **res}
    rows = [[g["label"], g["count"], repr(g["mean"]), repr(g["std"]), repr(g["std_error"]),
             repr(g["ci_lower"]), repr(g["ci_upper"])] for g in res["table"]]
    return {
        "report.json": _dumps(report),
        "sequences.csv": _csv(rows, ["sequence", "count", "mean", "std", "std_error", "ci_lower", "ci_upper"]),
    }


def cmd_compare(cfg) -> dict[str, str]:
    data = _load(cfg)
    res = compare_batch_stream(data, cfg["checkpoints"], cfg["warmup"], tree_params(cfg),
                               cfg["drift_confidence"], BatchTreeParams(), seed=cfg["seed"] or 0)
    if not res["checkpoints"]:
        raise ConfigError("--checkpoints: no checkpoint falls within the dataset")
    report = {
        "config": echo(cfg),
        "checkpoints": res["checkpoints"],
        "batch": res["batch"].to_dict(),
        "stream": res["stream"].to_dict(),
        "details": res["details"],
    }
    rows = []
    for family in ("batch", "stream"):
        for row in res[family].rows:
            rows.append([family, row.label, row.shape.depth, row.shape.test_count, row.shape.leaf_count,
                         row.shape.attribute_count, "" if row.churn is None else repr(row.churn.churn_percent)])
    return {
        "report.json": _dumps(report),
        "comparison.txt": res["batch"].table() + "\n" + res["stream"].table(),
        "churn.csv": _csv(rows, ["family", "label", "depth", "tests", "leaves", "attributes", "churn"]),
    }


COMMANDS = {"generate": cmd_generate, "evaluate": cmd_evaluate,
            "sequences": cmd_sequences, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        files = COMMANDS[cfg["command"]](cfg)
        out = Path(cfg["output"])
        if "__file__" in files:
            write_outputs({out.name: files["__file__"]}, out.parent if str(out.parent) else Path("."))
        else:
            write_outputs(files, out)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

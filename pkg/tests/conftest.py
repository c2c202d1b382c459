import numpy as np
import pytest

from buildstream.metrics import AVG_ATTRIBUTES_PER_CLASS, DEFAULT_SCHEMA, NUM_INTERFACES, BuildInstance, BuildOutcome
from buildstream.tree import Leaf, make_split


def two_split_root():
    """Two-split tree: attributes-per-class at the root, interfaces below its <= side."""
    return make_split(
        AVG_ATTRIBUTES_PER_CLASS, 8.0,
        make_split(NUM_INTERFACES, 20.0, Leaf([4.0, 60.0]), Leaf([9.0, 3.0])),
        Leaf([30.0, 2.0]),
    )


def one_split_root():
    return make_split(AVG_ATTRIBUTES_PER_CLASS, 8.0, Leaf([10.0, 50.0]), Leaf([25.0, 5.0]))


def vector(**named):
    x = np.zeros(len(DEFAULT_SCHEMA))
    for name, value in named.items():
        x[DEFAULT_SCHEMA.index(name)] = value
    return x


def make_instances(X, y, start=0):
    return [BuildInstance(f"b{start + i}", start + i, X[i], BuildOutcome(int(y[i]))) for i in range(len(y))]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion and assert on it."""

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

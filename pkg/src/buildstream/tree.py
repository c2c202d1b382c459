"""Binary decision-tree nodes shared by the stream and batch learners.

Dump format, one node per line, two spaces of indent per depth level::

    Average number of attributes per class <= 4.5
      Number of interfaces <= 12
        leaf SUCCESS 3 | 41
        leaf FAILURE 6 | 2
      leaf FAILURE 17 | 1

A split line is followed by its ``<=`` child and then its ``>`` child.
Leaf votes are written as ``failed | successful``.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidPath, ParseError
from .metrics import DEFAULT_SCHEMA, BuildOutcome, MetricSchema


@dataclass(eq=False)
class Leaf:
    votes: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        self.votes = np.asarray(self.votes, dtype=float).copy()

    @property
    def is_leaf(self) -> bool:
        return True

    def prediction(self) -> BuildOutcome:
        return majority(self.votes)


@dataclass(eq=False)
class SplitNode:
    attribute: int
    name: str
    threshold: float
    left: "Node"
    right: "Node"

    @property
    def is_leaf(self) -> bool:
        return False

    def child(self, x) -> "Node":
        return self.left if x[self.attribute] <= self.threshold else self.right


Node = Leaf | SplitNode


def majority(votes) -> BuildOutcome:
    """Arg-max vote; ties (including an empty leaf) go to FAILURE."""
    failed, successful = float(votes[0]), float(votes[1])
    return BuildOutcome.SUCCESS if successful > failed else BuildOutcome.FAILURE


def route(root: Node, x) -> tuple[Leaf, tuple[int, ...]]:
    """Sort ``x`` to its leaf; the path uses 0 for ``<=`` and 1 for ``>``."""
    node, path = root, []
    while not node.is_leaf:
        go_right = x[node.attribute] > node.threshold
        path.append(int(go_right))
        node = node.right if go_right else node.left
    return node, tuple(path)


def node_at(root: Node, path: Sequence[int]) -> Node:
    node = root
    for step in path:
        if node.is_leaf or step not in (0, 1):
            raise InvalidPath(f"path {tuple(path)} does not address a node")
        node = node.right if step else node.left
    return node


def replace_at(root: Node, path: Sequence[int], new: Node) -> Node:
    """Return the root after putting ``new`` at ``path`` (in place below the root)."""
    if not path:
        return new
    parent = node_at(root, path[:-1])
    if parent.is_leaf or path[-1] not in (0, 1):
        raise InvalidPath(f"path {tuple(path)} does not address a node")
    if path[-1]:
        parent.right = new
    else:
        parent.left = new
    return root


def iter_nodes(root: Node, depth: int = 0) -> Iterator[tuple[Node, int]]:
    stack = [(root, depth)]
    while stack:
        node, d = stack.pop()
        yield node, d
        if not node.is_leaf:
            stack.append((node.right, d + 1))
            stack.append((node.left, d + 1))


def leaves(root: Node) -> list[Leaf]:
    return [n for n, _ in iter_nodes(root) if n.is_leaf]


@dataclass(frozen=True)
class TreeShape:
    depth: int
    test_count: int
    leaf_count: int
    attribute_set: frozenset[str]

    @property
    def attribute_count(self) -> int:
        return len(self.attribute_set)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "test_count": self.test_count,
            "leaf_count": self.leaf_count,
            "attributes": sorted(self.attribute_set),
        }

    @classmethod
    def from_dict(cls, d) -> "TreeShape":
        return cls(d["depth"], d["test_count"], d["leaf_count"], frozenset(d["attributes"]))


def tree_shape(root: Node) -> TreeShape:
    depth = tests = n_leaves = 0
    attrs = set()
    for node, d in iter_nodes(root):
        depth = max(depth, d)
        if node.is_leaf:
            n_leaves += 1
        else:
            tests += 1
            attrs.add(node.name)
    return TreeShape(depth, tests, n_leaves, frozenset(attrs))


def _num(x: float) -> str:
    return format(float(x), ".10g")


def dump_tree(root: Node) -> str:
    lines = []
    for node, d in iter_nodes(root):
        pad = "  " * d
        if node.is_leaf:
            f, s = node.votes
            lines.append(f"{pad}leaf {node.prediction().name} {_num(f)} | {_num(s)}")
        else:
            lines.append(f"{pad}{node.name} <= {_num(node.threshold)}")
    return "\n".join(lines) + "\n"


def parse_tree_dump(text: str, schema: MetricSchema = DEFAULT_SCHEMA) -> Node:
    """Inverse of :func:`dump_tree` (leaf labels are recomputed from votes)."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip():
            continue
        stripped = raw.lstrip(" ")
        indent = len(raw) - len(stripped)
        if indent % 2:
            raise ParseError("odd indentation", lineno)
        rows.append((lineno, indent // 2, stripped))
    if not rows:
        raise ParseError("empty tree dump")
    pos = 0

    def build(depth):
        nonlocal pos
        if pos >= len(rows):
            raise ParseError("truncated tree dump")
        lineno, d, body = rows[pos]
        if d != depth:
            raise ParseError(f"expected depth {depth}, found {d}", lineno)
        pos += 1
        if body.startswith("leaf "):
            try:
                _, _label, f, _bar, s = body.split(" ")
                return Leaf(np.array([float(f), float(s)]))
            except ValueError:
                raise ParseError(f"malformed leaf {body!r}", lineno) from None
        name, sep, thr = body.rpartition(" <= ")
        if not sep:
            raise ParseError(f"malformed split {body!r}", lineno)
        try:
            attr = schema.index(name)
            threshold = float(thr)
        except Exception:
            raise ParseError(f"malformed split {body!r}", lineno) from None
        left = build(depth + 1)
        right = build(depth + 1)
        return SplitNode(attr, name, threshold, left, right)

    root = build(0)
    if pos != len(rows):
        raise ParseError("trailing lines after tree", rows[pos][0])
    return root


def make_split(name: str, threshold: float, left: Node, right: Node,
               schema: MetricSchema = DEFAULT_SCHEMA) -> SplitNode:
    """Convenience constructor resolving a metric name to its column."""
    return SplitNode(schema.index(name), name, float(threshold), left, right)

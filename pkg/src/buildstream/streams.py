"""Stream construction: chronological replay, ordering experiments and window models."""

from __future__ import annotations

import enum
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

from .exceptions import ConfigError, InsufficientData, PoolTooSmall
from .metrics import BuildInstance


class BuildDataset(Sequence):
    """Instances sorted ascending by ordinal, ordinals unique."""

    def __init__(self, instances):
        items = sorted(instances, key=lambda inst: inst.ordinal)
        ordinals = [inst.ordinal for inst in items]
        if len(set(ordinals)) != len(ordinals):
            raise ValueError("duplicate ordinals in dataset")
        self.instances: tuple[BuildInstance, ...] = tuple(items)

    def __getitem__(self, i):
        return self.instances[i]

    def __len__(self):
        return len(self.instances)

    def __eq__(self, other):
        return isinstance(other, BuildDataset) and self.instances == other.instances

    __hash__ = None


def replay_chronological(dataset, warmup: int = 20) -> tuple[list[BuildInstance], Iterator[BuildInstance]]:
    data = dataset if isinstance(dataset, BuildDataset) else BuildDataset(dataset)
    if warmup < 0:
        raise ConfigError("warmup must be nonnegative")
    if len(data) <= warmup:
        raise InsufficientData(f"dataset has {len(data)} instances, needs more than warmup={warmup}")
    return list(data[:warmup]), iter(data[warmup:])


def group_sizes(pool_size: int, k: int) -> list[int]:
    """Chronological group sizes; the first ``pool_size % k`` groups get one extra."""
    base, extra = divmod(pool_size, k)
    return [base + (1 if g < extra else 0) for g in range(k)]


@dataclass(frozen=True)
class StreamSequence:
    """One ordering of the post-warmup pool.

    ``order`` indexes into ``pool`` (the chronological post-warmup instances).
    """

    sequence_id: int
    order: tuple[int, ...]
    warmup: tuple[BuildInstance, ...]
    pool: tuple[BuildInstance, ...] = field(repr=False)

    def stream(self) -> list[BuildInstance]:
        return [self.pool[i] for i in self.order]

    def __iter__(self):
        return iter(self.stream())

    def __len__(self):
        return len(self.order)


def make_sequences(dataset, k: int = 10, warmup: int = 20) -> list[StreamSequence]:
    """Build the k group-rotation orderings.

    The pool after warmup is cut into chronological groups G1..Gk.  Sequence
    j moves group G(k+1-j) to the front and keeps the rest chronological, so
    S1 = (Gk, G1, ..., Gk-1) and Sk is the plain chronological order.
    """
    if k < 1:
        raise ConfigError("k must be positive")
    warm, rest = replay_chronological(dataset, warmup)
    pool = tuple(rest)
    if len(pool) < k:
        raise PoolTooSmall(f"pool of {len(pool)} cannot form {k} groups")
    bounds = []
    start = 0
    for size in group_sizes(len(pool), k):
        bounds.append(range(start, start + size))
        start += size
    sequences = []
    for j in range(1, k + 1):
        lead = k - j  # zero-based index of G(k+1-j)
        order = list(bounds[lead])
        for g, idx in enumerate(bounds):
            if g != lead:
                order.extend(idx)
        sequences.append(StreamSequence(j, tuple(order), tuple(warm), pool))
    return sequences


class WindowKind(enum.Enum):
    FIXED_SLIDING = "fixed_sliding"
    JUMPING = "jumping"
    LANDMARK = "landmark"


@dataclass(frozen=True)
class WindowModel:
    kind: WindowKind
    size: int | None = None
    update_interval: int = 1

    def __post_init__(self):
        if self.update_interval < 1:
            raise ConfigError("update_interval must be positive")
        if self.kind is not WindowKind.LANDMARK:
            if self.size is None or self.size < 1:
                raise ConfigError(f"{self.kind.name} window needs a positive size")
        if self.kind is WindowKind.JUMPING and self.update_interval <= self.size:
            raise ConfigError("jumping windows need update_interval > size")

    @property
    def eager(self) -> bool:
        return self.update_interval == 1


@dataclass(frozen=True)
class Window:
    """Window contents plus arrivals buffered for a lazy update."""

    elements: tuple = ()
    pending: tuple = ()
    landmark_start: int = 0

    def __len__(self):
        return len(self.elements)


def window_update(window: Window, model: WindowModel, arrivals) -> Window:
    elements = list(window.elements)
    pending = list(window.pending)
    for item in arrivals:
        pending.append(item)
        if len(pending) < model.update_interval:
            continue
        if model.kind is WindowKind.JUMPING:
            elements = pending[-model.size:]
        else:
            elements.extend(pending)
            if model.kind is WindowKind.FIXED_SLIDING and len(elements) > model.size:
                del elements[: len(elements) - model.size]
        pending = []
    return Window(tuple(elements), tuple(pending), window.landmark_start)

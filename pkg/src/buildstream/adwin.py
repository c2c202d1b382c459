"""Adaptive windowing (ADWIN) change detector with an exact prefix scan.

Every arrival tests all splits of the current window into an older and a
newer sub-window.  A split is significant when the sub-window means differ
by at least ``eps_cut``::

    eps_cut = sqrt(ln(4 W / delta) / (2 m))

with ``W`` the window length and ``m = 1 / (1/n0 + 1/n1)`` built from the
two sub-window sizes.  The earliest significant split wins and everything
before it is dropped.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, SignalOutOfRange


@dataclass(frozen=True)
class DriftEvent:
    stream_index: int
    discarded_count: int
    retained_mean: float
    discarded_mean: float

    @property
    def increased(self) -> bool:
        """True when the newer sub-window has the larger mean."""
        return self.retained_mean > self.discarded_mean

    def to_dict(self) -> dict:
        return {
            "stream_index": self.stream_index,
            "discarded_count": self.discarded_count,
            "retained_mean": self.retained_mean,
            "discarded_mean": self.discarded_mean,
        }


class AdwinDetector:
    def __init__(self, delta: float = 0.01, bound: str = "hoeffding"):
        if not 0 < delta < 1:
            raise ConfigError(f"drift delta must lie in (0, 1), got {delta}")
        if bound not in ("hoeffding", "bernstein"):
            raise ConfigError(f"unknown bound {bound!r}")
        self.delta = delta
        self.bound = bound
        self.cumulative_drifts = 0
        self.last_cut_index: int | None = None
        self.n_seen = 0
        # _prefix[i] = sum of the first i window values; _sq likewise for squares
        self._prefix = np.zeros(64)
        self._sq = np.zeros(64)
        self._width = 0

    @classmethod
    def from_confidence(cls, confidence: float = 0.99, **kwargs) -> "AdwinDetector":
        return cls(delta=1.0 - confidence, **kwargs)

    @classmethod
    def from_window(cls, values, delta: float = 0.01, **kwargs) -> "AdwinDetector":
        """Restore a detector holding ``values`` without testing them for cuts."""
        det = cls(delta, **kwargs)
        for v in values:
            v = float(v)
            if not 0.0 <= v <= 1.0:
                raise SignalOutOfRange(f"signal value {v} outside [0, 1]")
            det._append(v)
        det.n_seen = det._width
        return det

    @property
    def width(self) -> int:
        return self._width

    @property
    def window(self) -> np.ndarray:
        return np.diff(self._prefix[: self._width + 1])

    @property
    def mean(self) -> float:
        return self._prefix[self._width] / self._width if self._width else 0.0

    def _append(self, x: float) -> None:
        w = self._width
        if w + 1 >= self._prefix.shape[0]:
            self._prefix = np.concatenate([self._prefix, np.zeros_like(self._prefix)])
            self._sq = np.concatenate([self._sq, np.zeros_like(self._sq)])
        self._prefix[w + 1] = self._prefix[w] + x
        self._sq[w + 1] = self._sq[w] + x * x
        self._width = w + 1

    def thresholds(self) -> np.ndarray:
        """``eps_cut`` for every split point 1..W-1 of the current window."""
        w = self._width
        n0 = np.arange(1, w, dtype=float)
        n1 = w - n0
        m = n0 * n1 / w
        if self.bound == "hoeffding":
            return np.sqrt(math.log(4.0 * w / self.delta) / (2.0 * m))
        total = self._prefix[w]
        var = max(self._sq[w] / w - (total / w) ** 2, 0.0)
        log_term = math.log(2.0 * w / self.delta)
        return np.sqrt(2.0 * var * log_term / m) + 2.0 * log_term / (3.0 * m)

    def find_cut(self) -> int | None:
        """Earliest split index whose sub-window means differ significantly."""
        w = self._width
        if w < 2:
            return None
        left = self._prefix[1:w]
        n0 = np.arange(1, w, dtype=float)
        diff = np.abs(left / n0 - (self._prefix[w] - left) / (w - n0))
        hits = np.flatnonzero(diff >= self.thresholds())
        return int(hits[0]) + 1 if hits.size else None

    def add_element(self, x: float) -> DriftEvent | None:
        x = float(x)
        if not 0.0 <= x <= 1.0:
            raise SignalOutOfRange(f"signal value {x} outside [0, 1]")
        self.n_seen += 1
        self._append(x)
        cut = self.find_cut()
        if cut is None:
            return None
        w = self._width
        head = self._prefix[cut]
        event = DriftEvent(
            stream_index=self.n_seen,
            discarded_count=cut,
            retained_mean=float((self._prefix[w] - head) / (w - cut)),
            discarded_mean=float(head / cut),
        )
        self._prefix[: w - cut + 1] = self._prefix[cut : w + 1] - head
        self._sq[: w - cut + 1] = self._sq[cut : w + 1] - self._sq[cut]
        self._width = w - cut
        self.cumulative_drifts += 1
        self.last_cut_index = self.n_seen - self._width
        return event

    def update(self, values) -> list[DriftEvent]:
        events = []
        for v in values:
            ev = self.add_element(v)
            if ev is not None:
                events.append(ev)
        return events

    def copy(self) -> "AdwinDetector":
        return copy.deepcopy(self)


def normalize_signal(values, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Min-max scale a raw feature trajectory into [0, 1] for detection."""
    arr = np.asarray(values, dtype=float)
    lo = float(arr.min()) if lo is None else lo
    hi = float(arr.max()) if hi is None else hi
    if hi <= lo:
        return np.zeros_like(arr)
    return np.clip((arr - lo) / (hi - lo), 0.0, 1.0)

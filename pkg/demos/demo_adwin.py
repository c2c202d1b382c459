"""
Detecting a change with ADWIN
=============================

ADWIN keeps every value since the last change and drops the older part of
the window as soon as two sub-windows disagree by more than a
confidence-dependent threshold.
"""

import numpy as np

from buildstream import AdwinDetector

rng = np.random.default_rng(1)
# error indicator of a classifier: 20% errors, then 80% after t=1000
signal = np.concatenate([rng.random(1000) < 0.2, rng.random(1000) < 0.8]).astype(float)

det = AdwinDetector.from_confidence(0.99)
for t, x in enumerate(signal):
    event = det.add_element(x)
    if event is not None:
        print(f"t={t}: dropped {event.discarded_count} values, "
              f"mean {event.discarded_mean:.2f} -> {event.retained_mean:.2f}")

print("cumulative drifts:", det.cumulative_drifts, " window width:", det.width)

# a stationary signal should stay quiet
flat = (rng.random(10000) < 0.5).astype(float)
quiet = AdwinDetector.from_confidence(0.99)
alarms = sum(quiet.add_element(x) is not None for x in flat)
print("false alarms on 10k stationary values:", alarms)

# the variance-aware variant reacts faster on low-variance signals
fast = AdwinDetector(0.01, bound="bernstein")
first = next(t for t, x in enumerate(signal) if fast.add_element(x) is not None)
print("bernstein bound, first detection at t =", first)

"""
Synthetic build streams and the CSV format
==========================================

Streams are generated from a drift script: segments of decision-list
concepts over uniformly drawn metrics, with optional label noise.
"""

import io
import json

import numpy as np

from buildstream import generate_stream, jazz_like_script
from buildstream.io import dataset_to_csv, parse_dataset
from buildstream.synth import generate_arrays

script = jazz_like_script(seed=4, noise_rate=0.1, drift_at=500)
print(json.dumps(script.to_dict()["segments"], indent=1))

X, labels, clean = generate_arrays(script, 1000)
print("success rate before/after drift:", labels[:500].mean(), labels[500:].mean())
print("noise flips:", int((labels != clean).sum()), "of 1000")

# round trip through the canonical CSV
data = generate_stream(script, 50)
text = dataset_to_csv(data)
print(text.splitlines()[0][:80], "...")
back = parse_dataset(io.StringIO(text))
print("round trip exact:", all(np.array_equal(a.metrics, b.metrics) for a, b in zip(data, back)))

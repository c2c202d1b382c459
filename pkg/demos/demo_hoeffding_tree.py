"""
Growing a Hoeffding tree on a build stream
==========================================

The tree only commits to a split once the Hoeffding bound says the best
attribute is ahead of the runner-up with high confidence.  Here it learns a
two-rule build-outcome concept hidden among 42 code metrics.
"""

import numpy as np

from buildstream import HoeffdingTree, generate_stream, jazz_like_script
from buildstream.hoeffding import hoeffding_bound

# the bound shrinks like 1/sqrt(n): more evidence, tighter decisions
for n in (25, 100, 1000, 10000):
    print(f"n={n:>6}  eps={hoeffding_bound(1.0, 1e-7, n):.4f}")

# a single concept, no label noise
data = generate_stream(jazz_like_script(seed=0, drift_at=None), 3000)

tree = HoeffdingTree(trace=True)
hits = []
for inst in data:
    hits.append(tree.predict_one(inst.metrics) == inst.outcome)
    tree.learn_one(inst)

# accuracy in blocks of 500 instances: the tree catches up with the concept
blocks = np.array(hits).reshape(-1, 500).mean(axis=1)
print("block accuracy:", np.round(blocks, 3))

print(tree.dump())
shape = tree.shape()
print(f"depth {shape.depth}, tests {shape.test_count}, leaves {shape.leaf_count}")
print("split attributes:", sorted(shape.attribute_set))

# the first few split decisions, with the evidence they rested on
for attempt in [a for a in tree.attempts if a.split][:3]:
    print(attempt)

"""
Batch refits versus an evolving stream tree
===========================================

A batch decision tree refit at each checkpoint can change shape entirely,
while the stream tree mostly extends what it already has.  Attribute churn
measures how much the set of split attributes moves between snapshots.
"""

from buildstream import generate_stream, jazz_like_script
from buildstream.experiments import churn_stability, compare_batch_stream

data = generate_stream(jazz_like_script(seed=2, noise_rate=0.1, drift_at=600), 1200)
res = compare_batch_stream(data, checkpoints=(400, 800, 1200))
print(res["batch"].table())
print()
print(res["stream"].table())

# averaged over a longer stream with one drift
stab = churn_stability(jazz_like_script(seed=2, noise_rate=0.1, drift_at=1500), n=3000, every=500)
print(f"\nmean churn: stream {stab['stream_mean_churn']:.1f}%  batch {stab['batch_mean_churn']:.1f}%")

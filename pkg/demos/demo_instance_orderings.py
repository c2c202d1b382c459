"""
Does arrival order matter?
==========================

The post-warmup pool is cut into ten chronological groups.  Ordering S_j
moves one group to the front; S10 is the plain chronological stream.  The
accuracy over the last 21 arrivals of each ordering is compared by ANOVA.
"""

from buildstream import generate_stream, jazz_like_script, make_sequences
from buildstream.evaluation import format_p
from buildstream.experiments import sequence_experiment

data = generate_stream(jazz_like_script(seed=5, noise_rate=0.05, drift_at=400), 800)

# group structure: S1 leads with G10, S10 is chronological
seqs = make_sequences(data, k=10)
print("S1 starts with build", seqs[0].stream()[0].build_id, "; S10 starts with", seqs[-1].stream()[0].build_id)

res = sequence_experiment(data, k=10)
for row in res["table"]:
    print(f"{row['label']:>4}: {row['mean']:.3f} +/- {row['std']:.3f}")
print("ANOVA p =", format_p(res["anova"]["p_value"]))

"""
Prequential evaluation in phases
================================

Each build is predicted before it is learned.  After a 20-build warmup the
running accuracy is split into phases and compared with a one-way ANOVA.
The default cuts (40, 80, 180) suit a couple of hundred builds; this longer
synthetic stream uses wider ones.
"""

from buildstream import generate_stream, jazz_like_script
from buildstream.evaluation import format_p
from buildstream.experiments import evaluate_chronological

data = generate_stream(jazz_like_script(seed=3, noise_rate=0.05, drift_at=1500), 3000)
res = evaluate_chronological(data, phase_cuts=(500, 1000, 1500))

print("final cumulative accuracy:", round(res["accuracy"], 3))
print("drift events:", len(res["drift_log"]))

for row in res["phase_report"]["accuracy"]:
    print(f"{row['label']}: mean {row['mean']:.3f}  95% CI [{row['ci_lower']:.3f}, {row['ci_upper']:.3f}]")

anova = res["anova"]["accuracy"]
print(f"ANOVA F={anova['f']:.2f} p={format_p(anova['p_value'])}")
for c in anova["contrasts"]:
    print(f"  {c['group_a']} vs {c['group_b']}: diff {c['mean_difference']:+.3f}, p={format_p(c['p_value'])}")

# true/false positive rates per class, with complements summing to one
for phase, rates in res["confusion_by_phase"].items():
    print(phase, rates)

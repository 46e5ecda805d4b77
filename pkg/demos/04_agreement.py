# How much do annotation rounds agree with each other?
#
# Run with: python3 demos/04_agreement.py

# %%
import numpy as np

from vadeval import agreement, synth

manifest, rounds = synth.synthesize_dataset(n_videos=10, frames_per_video=300, n_rounds=4, seed=4, jitter=0.2)

# %%
rep = agreement.agreement_report(rounds, manifest)
print("pairwise Cohen kappa:")
print(np.round(rep.pairwise_kappa, 3))
print("Fleiss kappa:", round(rep.fleiss_kappa, 4))

# %%
# Boundary spread per video, in seconds (population standard deviation).
for d in rep.deviations[:5]:
    print(f"{d.video_id}: start {d.start_std:.3f} duration {d.duration_std:.3f} end {d.end_std:.3f}")
print("medians:", round(rep.median_start_std, 3), round(rep.median_duration_std, 3), round(rep.median_end_std, 3))

# %%
# Category relabelling: share of each class kept, moved to another class, or moved to Normal.
original = {"a": "Burglary", "b": "Burglary", "c": "Fighting", "d": "Fighting"}
relabeled = {"a": "Burglary", "b": "Normal", "c": "Robbery", "d": "Fighting"}
conf = agreement.category_confusion(original, relabeled)
for cat, row in zip(conf.categories, conf.buckets):
    print(cat, row)

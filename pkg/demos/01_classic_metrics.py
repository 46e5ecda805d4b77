# Frame-level AUC, AP and false alarm rate on a small synthetic dataset.
#
# Run with: python3 demos/01_classic_metrics.py

# %%
import numpy as np

from vadeval import classic, synth
from vadeval.laap import event_intervals
from vadeval.model import expand_round

manifest, rounds = synth.synthesize_dataset(n_videos=20, frames_per_video=300, seed=1)
intervals = event_intervals(rounds, manifest)
profile = synth.DetectorProfile(onset_lag=0.1, rise_width=0.6, peak_score=0.9, background_noise=0.3)
preds = synth.synthesize(profile, manifest, intervals, seed=7)
print(len(manifest), "videos,", sum(m.is_abnormal for m in manifest), "abnormal")

# %%
# Concatenate every video in manifest order against the first round's labels.
labels = expand_round(rounds[0], manifest)
scores, y = classic.concat(preds, labels)
print("auc =", round(classic.auc(scores, y), 4))
print("ap  =", round(classic.ap(scores, y), 4))

# %%
# The area functions agree with brute-force oracles that enumerate thresholds.
print("auc oracle =", round(classic.auc_oracle(scores, y), 4))
print("ap oracle  =", round(classic.ap_oracle(scores, y), 4))

# %%
# ROC points: one per distinct score, plus the (0, 0) start.
roc = classic.roc_curve(scores, y)
print("roc points:", len(roc.x), "from", (float(roc.x[0]), float(roc.y[0])), "to", (float(roc.x[-1]), float(roc.y[-1])))

# %%
# False alarm rate uses normal videos only; it never increases with the threshold.
normal = np.concatenate([p.scores for p, m in zip(preds, manifest) if not m.is_abnormal])
for tau in (0.1, 0.3, 0.5, 0.8):
    print(f"far@{tau} = {classic.far(normal, tau):.4f}")

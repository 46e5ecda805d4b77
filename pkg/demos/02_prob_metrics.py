# Soft labels from several annotation rounds, and the normalised ProbAUC/ProbAP.
#
# Run with: python3 demos/02_prob_metrics.py

# %%
import numpy as np

from vadeval import classic, prob, synth
from vadeval.laap import event_intervals
from vadeval.model import expand_round

manifest, rounds = synth.synthesize_dataset(n_videos=12, frames_per_video=200, seed=3)
intervals = event_intervals(rounds, manifest)
preds = synth.synthesize(synth.DetectorProfile(background_noise=0.35), manifest, intervals, seed=5)

# %%
# Each frame's soft label is the fraction of rounds that mark it abnormal.
soft = prob.make_prob_labels(rounds, manifest)
ysoft = np.concatenate([t.probs for t in soft])
print("distinct soft levels:", np.unique(ysoft))

# %%
scores = np.concatenate([p.scores for p in preds])
print("prob_auc =", round(prob.prob_auc(scores, ysoft), 4))
print("prob_ap  =", round(prob.prob_ap(scores, ysoft), 4))

# %%
# The scale runs from the worst ordering (0) to the soft labels themselves (1).
print("best  ->", prob.prob_auc(ysoft, ysoft), prob.prob_ap(ysoft, ysoft))
print("worst ->", prob.prob_auc(1 - ysoft, ysoft), prob.prob_ap(1 - ysoft, ysoft))

# %%
# With one round the soft labels are hard and the metrics reduce to AUC/AP.
one = prob.make_prob_labels(rounds[:1], manifest)
y1 = np.concatenate([t.probs for t in one])
s, y = classic.concat(preds, expand_round(rounds[0], manifest))
print("single round:", prob.prob_auc(scores, y1) - classic.auc(s, y), prob.prob_ap(scores, y1) - classic.ap(s, y))

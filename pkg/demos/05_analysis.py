# Where inside events does a detector fire, and do two metrics rank runs alike?
#
# Run with: python3 demos/05_analysis.py

# %%
import numpy as np

from vadeval import analysis, classic, laap, synth

manifest, rounds = synth.synthesize_dataset(n_videos=20, frames_per_video=300, seed=6)
intervals = laap.event_intervals(rounds, manifest)
labels = laap.interval_labels(manifest, intervals)

# %%
# Histogram of positive-frame positions, normalised to [0, 1] across each event.
for lag in (0.0, 0.8):
    preds = synth.synthesize(synth.DetectorProfile(onset_lag=lag, background_noise=0.2), manifest, intervals)
    _, mass = analysis.position_histogram(preds, intervals, tau=0.5, bins=5)
    print(f"onset_lag={lag}:", np.round(mass, 3))

# %%
# Rank correlation between AP and LaAP across a sweep of simulated checkpoints.
aps, laaps = [], []
for k in range(8):
    prof = synth.DetectorProfile(onset_lag=k / 8, rise_width=0.3 + k / 20, background_noise=0.3, seed=k)
    preds = synth.synthesize(prof, manifest, intervals)
    s, y = classic.concat(preds, labels)
    aps.append(classic.ap(s, y))
    laaps.append(laap.laap_from_intervals(preds, intervals, manifest)[0])
print("ap:  ", np.round(aps, 3))
print("laap:", np.round(laaps, 3))
print("srocc(ap, laap) =", round(analysis.srocc(aps, laaps), 4))

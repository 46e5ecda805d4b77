"""Inter-annotator agreement between annotation rounds."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .model import envelope, expand_round

logger = logging.getLogger(__name__)


class AgreementError(ValueError):
    pass


def _abnormal_frames(rnd, manifest):
    labels = expand_round(rnd, manifest)
    parts = [labels[m.video_id] for m in manifest if m.is_abnormal]
    if not parts:
        raise AgreementError("no abnormal videos to compare")
    return np.concatenate(parts)


def cohen_kappa_labels(a, b) -> float:
    a = np.asarray(a).astype(bool)
    b = np.asarray(b).astype(bool)
    if a.shape != b.shape or a.size == 0:
        raise AgreementError("label sequences must be non-empty and equally long")
    p_o = np.mean(a == b)
    pa, pb = a.mean(), b.mean()
    p_e = pa * pb + (1 - pa) * (1 - pb)
    if p_e == 1.0:
        if np.array_equal(a, b):
            return 1.0
        raise AgreementError("degenerate marginals")
    return float((p_o - p_e) / (1 - p_e))


def cohen_kappa(round_a, round_b, manifest) -> float:
    """Frame-level Cohen's kappa over the concatenated abnormal videos."""
    return cohen_kappa_labels(_abnormal_frames(round_a, manifest), _abnormal_frames(round_b, manifest))


def fleiss_kappa_labels(ratings) -> float:
    """Fleiss' kappa for a ``raters x items`` matrix of binary labels."""
    r = np.asarray(ratings).astype(bool)
    if r.ndim != 2 or r.shape[0] < 2:
        raise AgreementError("Fleiss' kappa needs at least two raters")
    n = r.shape[0]
    pos = r.sum(axis=0).astype(float)
    counts = np.stack([n - pos, pos], axis=1)
    p_item = (np.sum(counts * counts, axis=1) - n) / (n * (n - 1))
    p_bar = p_item.mean()
    p_cat = counts.sum(axis=0) / counts.sum()
    p_e = np.sum(p_cat ** 2)
    if p_e == 1.0:
        return 1.0
    return float((p_bar - p_e) / (1 - p_e))


def fleiss_kappa(rounds, manifest) -> float:
    if len(rounds) < 2:
        raise AgreementError("Fleiss' kappa needs at least two rounds")
    return fleiss_kappa_labels(np.stack([_abnormal_frames(r, manifest) for r in rounds]))


@dataclass(frozen=True)
class VideoDeviation:
    video_id: str
    start_std: float
    duration_std: float
    end_std: float
    n_rounds: int


@dataclass(frozen=True)
class AgreementReport:
    round_ids: tuple
    pairwise_kappa: np.ndarray
    fleiss_kappa: float
    deviations: tuple = ()
    median_start_std: float = float("nan")
    median_duration_std: float = float("nan")
    median_end_std: float = float("nan")
    excluded: tuple = field(default=())


def boundary_stats(rounds, manifest):
    """Per-video population std of start, duration and end (seconds) across rounds.

    Returns ``(deviations, medians, excluded_ids)``; videos annotated
    abnormal by fewer than two rounds are excluded.
    """
    if len(rounds) < 2:
        raise AgreementError("boundary statistics need at least two rounds")
    devs, excluded = [], []
    for meta in manifest:
        if not meta.is_abnormal:
            continue
        starts, durations, ends = [], [], []
        for rnd in rounds:
            ivs = rnd.get(meta.video_id)
            env = envelope(ivs)
            if env is None:
                continue
            starts.append(env[0] / meta.fps)
            ends.append((env[1] + 1) / meta.fps)
            durations.append(sum(e - s for s, e in ivs) / meta.fps)
        if len(starts) < 2:
            logger.warning("video %s: abnormal in %d round(s); excluded from boundary statistics",
                           meta.video_id, len(starts))
            excluded.append(meta.video_id)
            continue
        devs.append(VideoDeviation(meta.video_id, float(np.std(starts)), float(np.std(durations)),
                                   float(np.std(ends)), len(starts)))
    if devs:
        medians = tuple(float(np.median([getattr(d, f) for d in devs]))
                        for f in ("start_std", "duration_std", "end_std"))
    else:
        medians = (float("nan"),) * 3
    return devs, medians, excluded


def agreement_report(rounds, manifest) -> AgreementReport:
    if len(rounds) < 2:
        raise AgreementError("agreement analysis needs at least two rounds")
    frames = [_abnormal_frames(r, manifest) for r in rounds]
    k = len(rounds)
    mat = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            mat[i, j] = mat[j, i] = cohen_kappa_labels(frames[i], frames[j])
    devs, (m_start, m_dur, m_end), excluded = boundary_stats(rounds, manifest)
    return AgreementReport(
        round_ids=tuple(r.round_id for r in rounds),
        pairwise_kappa=mat,
        fleiss_kappa=fleiss_kappa_labels(np.stack(frames)),
        deviations=tuple(devs),
        median_start_std=m_start,
        median_duration_std=m_dur,
        median_end_std=m_end,
        excluded=tuple(excluded),
    )


NORMAL = "Normal"


@dataclass(frozen=True)
class CategoryConfusion:
    """``counts[i, j]`` counts videos originally ``categories[i]`` re-labelled
    ``columns[j]``; ``buckets[i]`` holds the row shares of
    (same category, another anomaly category, Normal)."""

    categories: tuple
    counts: np.ndarray
    columns: tuple
    buckets: np.ndarray


def category_confusion(original: dict, relabeled: dict, normal: str = NORMAL) -> CategoryConfusion:
    common = sorted(set(original) & set(relabeled))
    if not common:
        raise AgreementError("no video ids in common between the two label maps")
    mismatch = set(original) ^ set(relabeled)
    if mismatch:
        raise AgreementError("video ids differ between label maps: " + ", ".join(sorted(mismatch)[:10]))
    rows = sorted({original[v] for v in common})
    cols = sorted({relabeled[v] for v in common} | set(rows))
    ri = {c: i for i, c in enumerate(rows)}
    ci = {c: i for i, c in enumerate(cols)}
    counts = np.zeros((len(rows), len(cols)), dtype=np.int64)
    buckets = np.zeros((len(rows), 3))
    for v in common:
        o, n = original[v], relabeled[v]
        counts[ri[o], ci[n]] += 1
        buckets[ri[o], 0 if n == o else 2 if n == normal else 1] += 1
    buckets /= buckets.sum(axis=1, keepdims=True)
    return CategoryConfusion(tuple(rows), counts, tuple(cols), buckets)

"""Latency-aware average precision (LaAP).

For every threshold the per-video LaRecall samples detections greedily
inside the event interval (consecutive picks more than ``phi`` frames
apart), scores each pick with a decreasing sigmoid of its relative position
and averages the scores with weights ``alpha**-k``. LaAP is the area under
the resulting Precision-LaRecall curve.

The fast path never rescans a video per threshold: a video's LaRecall only
changes at its own in-interval score values, and the "next positive after
frame b" lookups for all (video, threshold) pairs are answered together by
descending a range-maximum table over score ranks.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .classic import MetricError, sweep
from .model import Curve, CurveKind, EventInterval, LaApParams, envelope, intervals_to_labels

logger = logging.getLogger(__name__)

TRUNCATION_MASS = 1e-9
CHUNK_FRAMES = 1 << 18


@dataclass(frozen=True)
class SampledDetections:
    video_id: str
    frame_indices: tuple


@dataclass(frozen=True)
class LaRecallPoint:
    tau: float
    larecall: float
    precision: float


# ------------------------------------------------------------ event intervals


def _lower_median(values):
    v = sorted(values)
    return v[(len(v) - 1) // 2]


def median_event_interval(rounds, video_id: str) -> EventInterval:
    """Lower medians of the rounds' first and last abnormal frames.

    Rounds with several segments contribute their overall envelope; rounds
    that leave the video unannotated are skipped.
    """
    envs = [envelope(r.get(video_id)) for r in rounds]
    marked = [e for e in envs if e is not None]
    if not marked:
        raise MetricError(f"no round marks video {video_id!r} abnormal")
    if len(marked) < len(envs):
        logger.warning("video %s: %d of %d rounds mark it normal; excluded from the median",
                       video_id, len(envs) - len(marked), len(envs))
    t_start = _lower_median([s for s, _ in marked])
    t_last = _lower_median([e for _, e in marked])
    return EventInterval(video_id, int(t_start), int(t_last) + 1)


def event_intervals(rounds, manifest) -> dict:
    """Median event interval of every abnormal video, in manifest order."""
    return {m.video_id: median_event_interval(rounds, m.video_id) for m in manifest if m.is_abnormal}


def interval_labels(manifest, intervals) -> dict:
    return {m.video_id: intervals_to_labels(
        [(intervals[m.video_id].t_start, intervals[m.video_id].t_end)] if m.video_id in intervals else [],
        m.frame_count) for m in manifest}


# ------------------------------------------------------------------ LaRecall


def threshold_binarize(scores, tau: float) -> np.ndarray:
    return (np.asarray(scores, dtype=float) >= tau).astype(np.int8)


def sparse_sample(binary, interval: EventInterval, phi: int, max_count=None) -> SampledDetections:
    """Earliest-first picks inside the interval, each more than ``phi`` after the last."""
    b = np.asarray(binary)
    picks = []
    nxt = interval.t_start
    for i in np.flatnonzero(b[interval.t_start:interval.t_end]) + interval.t_start:
        if i >= nxt:
            picks.append(int(i))
            if max_count is not None and len(picks) >= max_count:
                break
            nxt = i + phi + 1
    return SampledDetections(interval.video_id, tuple(picks))


def decay_score(delta, beta: float):
    """``1 - sigmoid(beta * (2 delta - 1))``; equals 0.5 at ``delta = 0.5``."""
    z = beta * (2.0 * np.asarray(delta, dtype=float) - 1.0)
    # 1 - 1/(1+e^-z) == 1/(1+e^z); split by sign to avoid overflow
    out = np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))), 1.0 / (1.0 + np.exp(-np.abs(z))))
    return float(out) if np.ndim(out) == 0 else out


def decay_weights(n: int, alpha: float) -> np.ndarray:
    """Weights ``alpha**-k`` of the first ``n`` sampled detections."""
    return float(alpha) ** -np.arange(n, dtype=float)


def max_samples(alpha: float) -> int:
    """Number of picks kept before the next weight drops below the truncation mass."""
    total, k = 0.0, 0
    while True:
        w = alpha ** -k
        if k > 0 and w < TRUNCATION_MASS * total:
            return k
        total += w
        k += 1


def relative_position(frames, interval: EventInterval):
    span = interval.t_end - 1 - interval.t_start
    f = np.asarray(frames, dtype=float)
    if span == 0:
        return np.zeros_like(f)
    return (f - interval.t_start) / span


def larecall_video(detections: SampledDetections, interval: EventInterval, params: LaApParams = LaApParams()) -> float:
    frames = detections.frame_indices[:max_samples(params.alpha)]
    if not frames:
        return 0.0
    w = decay_weights(len(frames), params.alpha)
    s = decay_score(relative_position(frames, interval), params.beta)
    return float(np.sum(w * s) / np.sum(w))


def _scores_by_video(preds):
    if isinstance(preds, dict):
        return {k: getattr(v, "scores", v) for k, v in preds.items()}
    return {tr.video_id: tr.scores for tr in preds}


def larecall_dataset(preds, intervals, tau: float, params: LaApParams = LaApParams()) -> float:
    """Mean per-video LaRecall over the abnormal videos in ``intervals``."""
    if not intervals:
        raise MetricError("no abnormal events")
    scores = _scores_by_video(preds)
    k_max = max_samples(params.alpha)
    total = 0.0
    for vid, iv in intervals.items():
        det = sparse_sample(threshold_binarize(scores[vid], tau), iv, params.phi, k_max)
        total += larecall_video(det, iv, params)
    return total / len(intervals)


# ------------------------------------------------------- vectorised engine


class _NextAtLeast:
    """Answers "first index >= b whose rank >= r" for many (b, r) at once."""

    def __init__(self, ranks: np.ndarray):
        n = ranks.size
        self.n = n
        self.levels = max(1, int(n).bit_length())
        self.n_pad = 1 << self.levels
        base = np.full(self.n_pad, -1, dtype=np.int32)
        base[:n] = ranks
        table = [base]
        for j in range(1, self.levels + 1):
            prev = table[-1]
            h = 1 << (j - 1)
            cur = prev.copy()
            np.maximum(prev[:-h], prev[h:], out=cur[:-h])
            table.append(cur)
        self.table = table

    def query(self, b: np.ndarray, r: np.ndarray) -> np.ndarray:
        p = b.astype(np.int64)
        base = self.table[0]
        inside = p < self.n
        hit = np.zeros(p.size, dtype=bool)
        hit[inside] = base[p[inside]] >= r[inside]
        miss = np.flatnonzero(~hit & inside)
        if miss.size:
            pm, rm = p[miss], r[miss]
            for j in range(self.levels, -1, -1):
                ok = pm < self.n_pad
                sel = np.flatnonzero(ok)
                if not sel.size:
                    break
                jump = self.table[j][pm[sel]] < rm[sel]
                pm[sel[jump]] += 1 << j
            p[miss] = pm
        return p


def _chunk_larecall(rank_arrays, r_min, params, k_max):
    """Per-video LaRecall at each of the video's own thresholds.

    Returns (query ranks, larecall values, video positions) flattened in
    video order, thresholds descending within a video.
    """
    lengths = np.array([a.size for a in rank_arrays], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    engine = _NextAtLeast(np.concatenate(rank_arrays).astype(np.int32))

    q_rank, q_vid = [], []
    for j, a in enumerate(rank_arrays):
        u = np.unique(a)
        u = u[u >= r_min][::-1]
        q_rank.append(u)
        q_vid.append(np.full(u.size, j, dtype=np.int64))
    q_rank = np.concatenate(q_rank).astype(np.int32)
    q_vid = np.concatenate(q_vid)
    start = offsets[q_vid]
    end = start + lengths[q_vid]
    span = np.maximum(lengths[q_vid] - 1, 1).astype(float)

    num = np.zeros(q_rank.size)
    den = np.zeros(q_rank.size)
    pos = engine.query(start, q_rank)
    idx = np.flatnonzero(pos < end)
    for k in range(k_max):
        if not idx.size:
            break
        w = params.alpha ** -k
        delta = (pos[idx] - start[idx]) / span[idx]
        num[idx] += w * decay_score(delta, params.beta)
        den[idx] += w
        if k + 1 == k_max:
            break
        nxt = engine.query(pos[idx] + params.phi + 1, q_rank[idx])
        pos[idx] = nxt
        idx = idx[nxt < end[idx]]
    lar = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return q_rank, lar, q_vid


def _chunks(sizes, limit):
    out, cur, acc = [], [], 0
    for i, n in enumerate(sizes):
        if cur and acc + n > limit:
            out.append(cur)
            cur, acc = [], 0
        cur.append(i)
        acc += n
    if cur:
        out.append(cur)
    return out


def laap_from_intervals(preds, intervals, manifest, params: LaApParams = LaApParams(), workers: int = 1,
                        order=None):
    """LaAP and its Precision-LaRecall curve for fixed event intervals.

    Thresholds are the distinct positive score values, descending; a zero
    score is never a detection. ``order`` may be a precomputed descending
    order of the manifest-order concatenated scores.
    """
    if not intervals:
        raise MetricError("no abnormal events")
    scores = _scores_by_video(preds)
    labels = interval_labels(manifest, intervals)
    all_scores = np.concatenate([np.asarray(scores[m.video_id], dtype=float) for m in manifest])
    all_labels = np.concatenate([labels[m.video_id] for m in manifest]).astype(float)

    acc = sweep(all_scores, all_labels, order)
    keep = acc.thresholds > 0
    thresholds = acc.thresholds[keep]
    if not thresholds.size:
        return 0.0, Curve([0.0], [1.0], [np.inf], CurveKind.PRECISION_LARECALL)
    precision = acc.pos[keep] / (acc.pos[keep] + acc.neg[keep])

    # ascending ranks: "score >= tau" <=> "rank >= rank(tau)"; tau_n has rank n_u - 1 - n
    uniq = acc.thresholds[::-1]
    n_u = uniq.size
    abnormal = [m.video_id for m in manifest if m.video_id in intervals]
    rank_arrays = []
    for vid in abnormal:
        iv = intervals[vid]
        seg = np.asarray(scores[vid], dtype=float)[iv.t_start:iv.t_end]
        rank_arrays.append(np.searchsorted(uniq, seg).astype(np.int32))
    r_min = 1 if uniq[0] <= 0 else 0

    k_max = max_samples(params.alpha)
    groups = _chunks([a.size for a in rank_arrays], CHUNK_FRAMES)

    def run(group):
        return _chunk_larecall([rank_arrays[i] for i in group], r_min, params, k_max)

    if workers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, groups))
    else:
        results = [run(g) for g in groups]

    delta = np.zeros(n_u)
    for group, (q_rank, lar, q_vid) in zip(groups, results):
        prev = np.concatenate(([0.0], lar[:-1]))
        first = np.concatenate(([True], q_vid[1:] != q_vid[:-1]))
        prev[first] = 0.0
        np.add.at(delta, (n_u - 1 - q_rank.astype(np.int64)), lar - prev)
    larecall = np.clip(np.cumsum(delta)[:thresholds.size] / len(abnormal), 0.0, 1.0)

    value = _area(larecall, precision)
    curve = Curve(
        np.concatenate(([0.0], larecall)),
        np.concatenate(([precision[0]], precision)),
        np.concatenate(([np.inf], thresholds)),
        CurveKind.PRECISION_LARECALL,
    )
    return min(max(value, 0.0), 1.0), curve


def _area(larecall, precision) -> float:
    """Sum of LaRecall increments times interpolated precision.

    Precision at step n is replaced by its maximum over steps n..N, so the
    weights are non-increasing; the area is then monotone in LaRecall at
    every threshold and stays in [0, 1].
    """
    lar = np.asarray(larecall, dtype=float)
    p_hat = np.maximum.accumulate(np.asarray(precision, dtype=float)[::-1])[::-1]
    return float(np.sum(np.diff(np.concatenate(([0.0], lar))) * p_hat))


def laap(preds, rounds, manifest, params: LaApParams = LaApParams(), workers: int = 1, order=None):
    return laap_from_intervals(preds, event_intervals(rounds, manifest), manifest, params, workers, order)


def laap_oracle(preds, intervals, manifest, params: LaApParams = LaApParams()) -> float:
    """Direct evaluation at every threshold with untruncated sampling; small inputs only."""
    scores = _scores_by_video(preds)
    labels = interval_labels(manifest, intervals)
    all_scores = np.concatenate([np.asarray(scores[m.video_id], dtype=float) for m in manifest])
    all_labels = np.concatenate([labels[m.video_id] for m in manifest])
    lars, precs = [], []
    for tau in sorted(set(all_scores.tolist()), reverse=True):
        if tau <= 0:
            continue
        hit = all_scores >= tau
        precision = all_labels[hit].sum() / hit.sum()
        total = 0.0
        for vid, iv in intervals.items():
            picks, last = [], None
            for i in range(iv.t_start, iv.t_end):
                if scores[vid][i] >= tau and (last is None or i - last > params.phi):
                    picks.append(i)
                    last = i
            if picks:
                span = iv.t_end - 1 - iv.t_start
                num = den = 0.0
                for k, a in enumerate(picks):
                    d = 0.0 if span == 0 else (a - iv.t_start) / span
                    s = 1.0 - 1.0 / (1.0 + math.exp(-params.beta * (2 * d - 1)))
                    num += params.alpha ** -k * s
                    den += params.alpha ** -k
                total += num / den
        lars.append(total / len(intervals))
        precs.append(precision)
    area, prev = 0.0, 0.0
    for n, lar in enumerate(lars):
        area += (lar - prev) * max(precs[n:])
        prev = lar
    return area

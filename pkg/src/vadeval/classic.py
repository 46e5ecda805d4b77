"""Frame-level AUC, AP, FAR and their curves over the concatenated dataset.

Labels may be hard (0/1) or probabilistic; a frame with label ``p`` counts
as ``p`` positive mass and ``1 - p`` negative mass. All curves come from a
single descending sort of the scores, with tied scores forming one
threshold group.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConfusionCounts, Curve, CurveKind


class MetricError(ValueError):
    pass


def concat(preds, labels, order=None):
    """Concatenate per-video scores and labels.

    ``preds`` is a sequence of traces (or arrays); ``labels`` is either a
    mapping ``video_id -> labels`` or a sequence aligned with ``preds``.
    """
    if len(preds) == 0:
        raise MetricError("no videos")
    scores, ys = [], []
    for i, tr in enumerate(preds):
        s = getattr(tr, "scores", tr)
        if isinstance(labels, dict):
            y = labels[tr.video_id]
        else:
            y = labels[i]
        y = getattr(y, "probs", y)
        if len(s) != len(y):
            vid = getattr(tr, "video_id", i)
            raise MetricError(f"video {vid}: {len(s)} scores but {len(y)} labels")
        scores.append(np.asarray(s, dtype=float))
        ys.append(np.asarray(y, dtype=float))
    return np.concatenate(scores), np.concatenate(ys)


def _check(scores, labels):
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricError(f"length mismatch: {scores.shape} scores vs {labels.shape} labels")
    if scores.size == 0:
        raise MetricError("no frames")
    return scores, labels


def confusion_at(scores, labels, tau: float) -> ConfusionCounts:
    scores, labels = _check(scores, labels)
    hit = scores >= tau
    return ConfusionCounts(
        tp=float(np.sum(labels[hit])),
        fp=float(np.sum(1.0 - labels[hit])),
        fn=float(np.sum(labels[~hit])),
        tn=float(np.sum(1.0 - labels[~hit])),
    )


@dataclass(frozen=True)
class SweepAccumulator:
    """Cumulative positive/negative mass at each unique threshold, descending."""

    thresholds: np.ndarray
    pos: np.ndarray
    neg: np.ndarray

    @property
    def total_pos(self) -> float:
        return float(self.pos[-1])

    @property
    def total_neg(self) -> float:
        return float(self.neg[-1])


def descending_order(scores) -> np.ndarray:
    return np.argsort(-np.asarray(scores, dtype=float), kind="stable")


def sweep(scores, labels, order=None) -> SweepAccumulator:
    """Group frames by score, highest first; ``order`` may be a precomputed
    :func:`descending_order` of ``scores`` to skip the sort."""
    scores, labels = _check(scores, labels)
    if order is None:
        order = descending_order(scores)
    s = scores[order]
    w = labels[order]
    cum_pos = np.cumsum(w)
    cum_neg = np.cumsum(1.0 - w)
    last = np.flatnonzero(np.append(s[1:] != s[:-1], True))
    return SweepAccumulator(s[last], cum_pos[last], cum_neg[last])


def roc_from_sweep(acc: SweepAccumulator) -> Curve:
    if not acc.total_pos > 0:
        raise MetricError("undefined recall: no positive mass")
    if not acc.total_neg > 0:
        raise MetricError("undefined FPR: no negative mass")
    fpr = np.concatenate(([0.0], acc.neg / acc.total_neg))
    tpr = np.concatenate(([0.0], acc.pos / acc.total_pos))
    tau = np.concatenate(([np.inf], acc.thresholds))
    return Curve(np.minimum(fpr, 1.0), np.minimum(tpr, 1.0), tau, CurveKind.ROC)


def pr_from_sweep(acc: SweepAccumulator) -> Curve:
    # the tau=inf sentinel carries the first group's precision at recall 0
    if not acc.total_pos > 0:
        raise MetricError("undefined recall: no positive mass")
    recall = np.minimum(acc.pos / acc.total_pos, 1.0)
    precision = np.minimum(acc.pos / (acc.pos + acc.neg), 1.0)
    return Curve(
        np.concatenate(([0.0], recall)),
        np.concatenate(([precision[0]], precision)),
        np.concatenate(([np.inf], acc.thresholds)),
        CurveKind.PR,
    )


def roc_curve(scores, labels, order=None) -> Curve:
    return roc_from_sweep(sweep(scores, labels, order))


def pr_curve(scores, labels, order=None) -> Curve:
    return pr_from_sweep(sweep(scores, labels, order))


def trapezoid_area(curve: Curve) -> float:
    x, y = curve.x, curve.y
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) * 0.5))


def step_area(curve: Curve) -> float:
    """Sum of recall increments times the precision of the preceding point."""
    return float(np.sum(np.diff(curve.x) * curve.y[:-1]))


def auc(scores, labels, order=None) -> float:
    return trapezoid_area(roc_curve(scores, labels, order))


def ap(scores, labels, order=None) -> float:
    return step_area(pr_curve(scores, labels, order))


def far(normal_scores, tau: float) -> float:
    """Fraction of frames (all from normal videos) scored at or above ``tau``."""
    s = np.asarray(normal_scores, dtype=float)
    if s.size == 0:
        raise MetricError("FAR needs at least one normal frame")
    return float(np.count_nonzero(s >= tau)) / s.size


# ------------------------------------------------------------------- oracles


def _oracle_points(scores, labels):
    scores, labels = _check(scores, labels)
    if scores.size > 10_000:
        raise MetricError("oracle is quadratic; use at most 10^4 frames")
    taus = np.unique(scores)[::-1]
    return [confusion_at(scores, labels, t) for t in taus]


def auc_oracle(scores, labels) -> float:
    """AUC by evaluating the confusion matrix at every unique threshold."""
    pts = _oracle_points(scores, labels)
    P = pts[-1].tp + pts[-1].fn
    Nn = pts[-1].fp + pts[-1].tn
    if not P > 0:
        raise MetricError("undefined recall: no positive mass")
    if not Nn > 0:
        raise MetricError("undefined FPR: no negative mass")
    area, x0, y0 = 0.0, 0.0, 0.0
    for c in pts:
        x1, y1 = c.fp / (c.fp + c.tn), c.tp / (c.tp + c.fn)
        area += (x1 - x0) * (y0 + y1) / 2
        x0, y0 = x1, y1
    return area


def ap_oracle(scores, labels) -> float:
    pts = _oracle_points(scores, labels)
    if not pts[-1].tp + pts[-1].fn > 0:
        raise MetricError("undefined recall: no positive mass")
    area, r0, p0 = 0.0, 0.0, None
    for c in pts:
        r1, p1 = c.tp / (c.tp + c.fn), c.tp / (c.tp + c.fp)
        area += (r1 - r0) * (p1 if p0 is None else p0)
        r0, p0 = r1, p1
    return area

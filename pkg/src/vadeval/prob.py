"""ProbAUC / ProbAP: AUC and AP against soft labels, rescaled between the
worst and best achievable curve areas for those labels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classic import (
    MetricError,
    SweepAccumulator,
    pr_from_sweep,
    roc_from_sweep,
    step_area,
    sweep,
    trapezoid_area,
)
from .model import CurveKind, ProbLabelTrace, expand_round

NOISE_TOL = 1e-9
COLLAPSE_TOL = 1e-12


def make_prob_labels(rounds, manifest) -> list:
    """Per-frame mean of the rounds' hard labels, one trace per manifest video."""
    if not rounds:
        raise ValueError("at least one annotation round is required")
    expanded = [expand_round(r, manifest) for r in rounds]
    out = []
    for meta in manifest:
        total = np.zeros(meta.frame_count, dtype=np.int64)
        for labels in expanded:
            total += labels[meta.video_id]
        out.append(ProbLabelTrace(meta.video_id, total / len(rounds)))
    return out


@dataclass(frozen=True)
class ProbNormalization:
    raw_area: float
    worst_area: float
    best_area: float

    @property
    def yellow(self) -> float:
        return self.raw_area - self.worst_area

    @property
    def red(self) -> float:
        return self.best_area - self.raw_area

    @property
    def value(self) -> float:
        span = self.best_area - self.worst_area
        if span < COLLAPSE_TOL:
            raise MetricError("normalization collapsed: best and worst areas coincide")
        v = (self.raw_area - self.worst_area) / span
        if v < -NOISE_TOL or v > 1 + NOISE_TOL:
            raise MetricError(f"normalized area {v!r} outside [0, 1]; raw area not between worst and best")
        return min(max(v, 0.0), 1.0)


def _curve_fn(kind):
    kind = CurveKind(kind)
    if kind is CurveKind.ROC:
        return roc_from_sweep, trapezoid_area
    if kind is CurveKind.PR:
        return pr_from_sweep, step_area
    raise ValueError(f"no probabilistic variant for {kind.value} curves")


def reference_sweeps(soft_labels):
    """Sweeps of the best (``score = y~``) and worst (``score = 1 - y~``) classifiers.

    Both rank frames by label level, so the worst sweep is the best one
    with its groups reversed; the direct sweep is used if ``1 - y~``
    merges two levels in floating point.
    """
    y = np.asarray(soft_labels, dtype=float)
    if y.size == 0 or np.all(y == y[0]):
        raise MetricError("degenerate label distribution: soft labels are constant")
    best = sweep(y, y)
    flipped = 1.0 - best.thresholds[::-1]
    if np.any(np.diff(flipped) >= 0):
        return best, sweep(1.0 - y, y)
    pos = np.diff(np.concatenate(([0.0], best.pos)))[::-1]
    neg = np.diff(np.concatenate(([0.0], best.neg)))[::-1]
    return best, SweepAccumulator(flipped, np.cumsum(pos), np.cumsum(neg))


def best_worst_curves(soft_labels, kind):
    """Curves of the reference classifiers ``score = y~`` and ``score = 1 - y~``."""
    build, _ = _curve_fn(kind)
    best, worst = reference_sweeps(soft_labels)
    return build(best), build(worst)


def normalization(scores, soft_labels, kind, order=None, references=None) -> ProbNormalization:
    """Raw, worst and best areas; ``order`` is an optional precomputed
    descending order of ``scores``, ``references`` the output of
    :func:`reference_sweeps`."""
    build, area = _curve_fn(kind)
    best, worst = references or reference_sweeps(soft_labels)
    raw = build(sweep(np.asarray(scores, dtype=float), np.asarray(soft_labels, dtype=float), order))
    return ProbNormalization(area(raw), area(build(worst)), area(build(best)))


def prob_auc(scores, soft_labels, order=None) -> float:
    return normalization(scores, soft_labels, CurveKind.ROC, order).value


def prob_ap(scores, soft_labels, order=None) -> float:
    return normalization(scores, soft_labels, CurveKind.PR, order).value

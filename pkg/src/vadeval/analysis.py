"""Score perturbation, rank correlation and detection-position histograms."""
from __future__ import annotations

import enum

import numpy as np

from .laap import relative_position
from .model import FrameScoreTrace


class PerturbMode(str, enum.Enum):
    DESC = "desc"
    ASC = "asc"
    IDENTITY = "identity"


def perturb_scores(preds, intervals, mode) -> list:
    """Reorder scores inside each event interval, keeping their values.

    ``desc`` moves the highest scores to the interval start (earlier
    detection), ``asc`` to the end. Frames outside intervals are untouched.
    """
    mode = PerturbMode(mode)
    if mode is PerturbMode.IDENTITY:
        return list(preds)
    out = []
    for tr in preds:
        iv = intervals.get(tr.video_id)
        if iv is None:
            out.append(tr)
            continue
        s = np.array(tr.scores, dtype=float)
        seg = np.sort(s[iv.t_start:iv.t_end], kind="stable")
        s[iv.t_start:iv.t_end] = seg[::-1] if mode is PerturbMode.DESC else seg
        out.append(FrameScoreTrace(tr.video_id, s))
    return out


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    starts = np.flatnonzero(np.concatenate(([True], sv[1:] != sv[:-1])))
    ends = np.concatenate((starts[1:], [sv.size]))
    group_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(v.size)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def srocc(series_a, series_b) -> float:
    """Spearman's rank-order correlation (Pearson on average ranks)."""
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ValueError("series must be 1-D, equally long and have at least two points")
    ra, rb = average_ranks(a), average_ranks(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt(np.sum(ra * ra) * np.sum(rb * rb))
    if denom == 0:
        raise ValueError("undefined correlation: a series is constant")
    return float(np.clip(np.sum(ra * rb) / denom, -1.0, 1.0))


def position_histogram(preds, intervals, tau: float = 0.5, bins: int = 10):
    """Distribution of positive-frame positions inside event intervals.

    Positions are normalised to [0, 1] across each interval; the returned
    ``(edges, mass)`` has mass summing to 1, or all zeros when no frame is
    positive.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if not intervals:
        raise ValueError("no abnormal videos")
    positions = []
    for tr in preds:
        iv = intervals.get(tr.video_id)
        if iv is None:
            continue
        seg = np.asarray(tr.scores[iv.t_start:iv.t_end])
        hits = np.flatnonzero(seg >= tau) + iv.t_start
        positions.append(relative_position(hits, iv))
    pos = np.concatenate(positions) if positions else np.zeros(0)
    counts, edges = np.histogram(pos, bins=bins, range=(0.0, 1.0))
    mass = counts / pos.size if pos.size else counts.astype(float)
    return edges, mass

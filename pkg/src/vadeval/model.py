"""Core domain types and dataset validation.

Everything downstream works in frame units with 0-based indices and
half-open ``[start, end)`` intervals. Arrays stored on the dataclasses are
made read-only so instances can be shared freely between workers.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np


class Normality(str, enum.Enum):
    NORMAL = "normal"
    ABNORMAL = "abnormal"


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    frame_count: int
    fps: float
    normality: Normality
    category: Optional[str] = None

    def __post_init__(self):
        if not self.video_id:
            raise ValueError("video_id must be non-empty")
        if int(self.frame_count) != self.frame_count or self.frame_count < 1:
            raise ValueError(f"frame_count must be a positive integer, got {self.frame_count!r}")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps!r}")
        object.__setattr__(self, "normality", Normality(self.normality))

    @property
    def is_abnormal(self) -> bool:
        return self.normality is Normality.ABNORMAL


@dataclass(frozen=True)
class FrameScoreTrace:
    video_id: str
    scores: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scores", _frozen_array(self.scores))


@dataclass(frozen=True)
class AnnotationRound:
    """One annotator's pass: ``intervals[video_id]`` is a sorted list of
    disjoint ``(start, end)`` frame pairs. Videos absent from the map were
    not annotated in this round and count as normal."""

    round_id: str
    intervals: Mapping[str, tuple]

    def __post_init__(self):
        frozen = {vid: tuple((int(s), int(e)) for s, e in ivs) for vid, ivs in self.intervals.items()}
        object.__setattr__(self, "intervals", frozen)

    def get(self, video_id: str) -> tuple:
        return self.intervals.get(video_id, ())


@dataclass(frozen=True)
class ProbLabelTrace:
    video_id: str
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen_array(self.probs))


@dataclass(frozen=True)
class EventInterval:
    video_id: str
    t_start: int
    t_end: int

    def __post_init__(self):
        if not 0 <= self.t_start < self.t_end:
            raise ValueError(f"invalid event interval [{self.t_start}, {self.t_end}) for {self.video_id}")

    @property
    def length(self) -> int:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class ConfusionCounts:
    tp: float
    fp: float
    fn: float
    tn: float

    @property
    def total(self) -> float:
        return self.tp + self.fp + self.fn + self.tn


class CurveKind(str, enum.Enum):
    ROC = "roc"
    PR = "pr"
    PRECISION_LARECALL = "precision_larecall"


@dataclass(frozen=True)
class Curve:
    """Threshold-parameterised curve, points ordered by ``tau`` descending.

    The first point of ROC/PR curves is the ``tau = inf`` sentinel where
    nothing is predicted positive.
    """

    x: np.ndarray
    y: np.ndarray
    tau: np.ndarray
    kind: CurveKind

    def __post_init__(self):
        for name in ("x", "y", "tau"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        object.__setattr__(self, "kind", CurveKind(self.kind))
        if not (len(self.x) == len(self.y) == len(self.tau)):
            raise ValueError("curve coordinate arrays differ in length")

    def __len__(self):
        return len(self.tau)

    @property
    def points(self) -> list:
        return list(zip(self.x.tolist(), self.y.tolist(), self.tau.tolist()))


@dataclass(frozen=True)
class LaApParams:
    phi: int = 16
    alpha: float = 2.0
    beta: float = 7.0

    def __post_init__(self):
        if int(self.phi) != self.phi or self.phi < 1:
            raise ValueError(f"phi must be a positive integer, got {self.phi!r}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, got {self.alpha!r}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta!r}")
        object.__setattr__(self, "phi", int(self.phi))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class FileDigest:
    path: str
    sha256: str
    record_count: int


@dataclass(frozen=True)
class MetricReport:
    auc: Optional[float] = None
    ap: Optional[float] = None
    prob_auc: Optional[float] = None
    prob_ap: Optional[float] = None
    laap: Optional[float] = None
    far: Mapping[float, float] = field(default_factory=dict)
    params: LaApParams = field(default_factory=LaApParams)
    provenance: tuple = ()
    skipped: Mapping[str, str] = field(default_factory=dict)
    warnings: tuple = ()

    METRICS = ("auc", "ap", "prob_auc", "prob_ap", "laap")


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    video_id: Optional[str] = None
    severity: str = "error"

    def __str__(self):
        where = f"[{self.video_id}] " if self.video_id else ""
        return f"{self.severity}: {self.kind}: {where}{self.message}"


def manifest_index(manifest: Sequence[VideoMeta]) -> dict:
    index = {}
    for meta in manifest:
        if meta.video_id in index:
            raise ValueError(f"duplicate video_id {meta.video_id!r} in manifest")
        index[meta.video_id] = meta
    return index


def validate_dataset(
    manifest: Sequence[VideoMeta],
    rounds: Sequence[AnnotationRound] = (),
    preds: Optional[Sequence[FrameScoreTrace]] = None,
) -> list:
    """Collect every consistency problem between manifest, rounds and traces.

    Returns a list of :class:`Violation`; empty means valid. Rounds that
    disagree on whether an abnormal video contains an anomaly at all are
    reported with ``severity="warning"``.
    """
    out = []
    index = {}
    for meta in manifest:
        if meta.video_id in index:
            out.append(Violation("duplicate_video", "video id appears twice in manifest", meta.video_id))
        index[meta.video_id] = meta

    listed_sets = []
    for rnd in rounds:
        listed_sets.append((rnd.round_id, frozenset(rnd.intervals)))
        for vid, ivs in rnd.intervals.items():
            meta = index.get(vid)
            if meta is None:
                out.append(Violation("unknown_video", f"round {rnd.round_id!r} annotates unknown video", vid))
                continue
            if ivs and not meta.is_abnormal:
                out.append(Violation("normal_with_intervals",
                                     f"round {rnd.round_id!r} marks a normal video abnormal", vid))
            prev_end = None
            for s, e in ivs:
                if not (0 <= s < e <= meta.frame_count):
                    out.append(Violation("interval_range",
                                         f"round {rnd.round_id!r}: interval [{s},{e}) outside [0,{meta.frame_count})",
                                         vid))
                if prev_end is not None and s < prev_end:
                    out.append(Violation("interval_order",
                                         f"round {rnd.round_id!r}: intervals overlap or are unsorted at [{s},{e})",
                                         vid))
                prev_end = e

    if listed_sets:
        first_id, first = listed_sets[0]
        for rid, listed in listed_sets[1:]:
            if listed != first:
                diff = sorted(listed ^ first)
                out.append(Violation("round_coverage",
                                     f"rounds {first_id!r} and {rid!r} annotate different videos: {', '.join(diff[:10])}"))
        for meta in manifest:
            if not meta.is_abnormal:
                continue
            marked = [bool(rnd.get(meta.video_id)) for rnd in rounds]
            if not any(marked):
                out.append(Violation("abnormal_unannotated", "abnormal video has no interval in any round",
                                     meta.video_id))
            elif not all(marked):
                missing = [r.round_id for r, m in zip(rounds, marked) if not m]
                out.append(Violation("round_disagreement",
                                     f"rounds {missing} mark the abnormal video as normal",
                                     meta.video_id, severity="warning"))

    if preds is not None:
        seen = set()
        for tr in preds:
            meta = index.get(tr.video_id)
            if meta is None:
                out.append(Violation("unknown_video", "prediction for unknown video", tr.video_id))
                continue
            if tr.video_id in seen:
                out.append(Violation("duplicate_prediction", "video predicted twice", tr.video_id))
            seen.add(tr.video_id)
            if len(tr.scores) != meta.frame_count:
                out.append(Violation("length_mismatch",
                                     f"trace has {len(tr.scores)} scores, manifest says {meta.frame_count} frames",
                                     tr.video_id))
            bad = np.flatnonzero(~((tr.scores >= 0) & (tr.scores <= 1)))
            if bad.size:
                out.append(Violation("score_range",
                                     f"{bad.size} score(s) outside [0,1], first at frame {bad[0]}", tr.video_id))
        missing = [m.video_id for m in manifest if m.video_id not in seen]
        if missing:
            out.append(Violation("missing_prediction", "no trace for: " + ", ".join(missing)))
    return out


def errors_only(violations: Iterable[Violation]) -> list:
    return [v for v in violations if v.severity == "error"]


# ----------------------------------------------------------------- expansion


def intervals_to_labels(intervals, frame_count: int) -> np.ndarray:
    labels = np.zeros(frame_count, dtype=np.int8)
    for s, e in intervals:
        labels[s:e] = 1
    return labels


def labels_to_intervals(labels) -> list:
    """Maximal runs of ones as half-open intervals."""
    y = np.asarray(labels).astype(bool).astype(np.int8)
    edges = np.diff(np.concatenate(([0], y, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


def expand_round(rnd: AnnotationRound, manifest: Sequence[VideoMeta]) -> dict:
    """Hard per-frame labels for every manifest video, in manifest order."""
    index = {m.video_id: m for m in manifest}
    for vid in rnd.intervals:
        if vid not in index:
            raise KeyError(f"round {rnd.round_id!r} references unknown video {vid!r}")
    return {m.video_id: intervals_to_labels(rnd.get(m.video_id), m.frame_count) for m in manifest}


def envelope(intervals) -> Optional[tuple]:
    """``(first_abnormal_frame, last_abnormal_frame)`` of an interval list."""
    if not intervals:
        return None
    return min(s for s, _ in intervals), max(e for _, e in intervals) - 1


def subset(manifest, rounds=(), preds=None, exclude_categories=()):
    """Drop videos whose category is excluded from manifest, rounds and traces."""
    excluded = set(exclude_categories)
    kept = [m for m in manifest if m.category not in excluded] if excluded else list(manifest)
    keep_ids = {m.video_id for m in kept}
    new_rounds = [AnnotationRound(r.round_id, {v: iv for v, iv in r.intervals.items() if v in keep_ids})
                  for r in rounds]
    new_preds = None if preds is None else [t for t in preds if t.video_id in keep_ids]
    return kept, new_rounds, new_preds

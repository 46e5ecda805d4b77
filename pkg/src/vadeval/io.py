"""Readers and writers for manifests, annotations, predictions, reports and curves.

Formats
-------
manifest     CSV, header ``video_id,frame_count,fps,normality,category``
annotations  JSON ``{"time_unit": "frames"|"seconds", "rounds": [{"round_id": ..., "videos": {id: [[s, e], ...]}}]}``
predictions  JSON Lines, one ``{"video_id": ..., "scores": [...]}`` per video
report       JSON, sorted keys, floats rounded to 9 significant digits
curve        CSV ``x,y,tau``
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
from pathlib import Path

import numpy as np

from .model import (
    AnnotationRound,
    Curve,
    CurveKind,
    FileDigest,
    FrameScoreTrace,
    LaApParams,
    MetricReport,
    Normality,
    VideoMeta,
)

logger = logging.getLogger(__name__)

MANIFEST_HEADER = ["video_id", "frame_count", "fps", "normality", "category"]
SIG_DIGITS = 9


class IngestError(ValueError):
    """Malformed input; carries the file and the offending record location."""

    def __init__(self, message, path=None, line=None, column=None):
        self.path = str(path) if path is not None else None
        self.line = line
        self.column = column
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
        self.message = message


def file_digest(path, record_count: int) -> FileDigest:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return FileDigest(str(path), h.hexdigest(), int(record_count))


def fmt_float(x: float) -> float:
    """Round to the fixed report precision; the result re-parses exactly."""
    if x is None:
        return None
    return float(format(float(x), f".{SIG_DIGITS}g"))


def _fmt_cell(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(fmt_float(x))


# ------------------------------------------------------------------ manifest


def load_manifest(path) -> list:
    path = Path(path)
    out, seen = [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise IngestError("empty file, expected header", path, 1)
        header = [h.strip() for h in header]
        if header[:4] != MANIFEST_HEADER[:4] or header[4:] not in ([], ["category"]):
            raise IngestError(f"bad header {header}, expected {','.join(MANIFEST_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) not in (4, 5):
                raise IngestError(f"expected 5 columns, got {len(row)}", path, lineno)
            vid, frames, fps, normality = (c.strip() for c in row[:4])
            category = row[4].strip() if len(row) == 5 and row[4].strip() else None
            if not vid:
                raise IngestError("video_id is empty", path, lineno, 1)
            try:
                frame_count = int(frames)
            except ValueError:
                raise IngestError(f"frame_count {frames!r} is not an integer", path, lineno, 2) from None
            if frame_count < 1:
                raise IngestError("frame_count must be positive", path, lineno, 2)
            try:
                fps_val = float(fps)
            except ValueError:
                raise IngestError(f"fps {fps!r} is not a number", path, lineno, 3) from None
            if not (fps_val > 0 and math.isfinite(fps_val)):
                raise IngestError("fps must be positive", path, lineno, 3)
            try:
                norm = Normality(normality.lower())
            except ValueError:
                raise IngestError(f"normality must be 'normal' or 'abnormal', got {normality!r}",
                                  path, lineno, 4) from None
            if vid in seen:
                raise IngestError(f"duplicate video_id {vid!r}", path, lineno, 1)
            seen.add(vid)
            out.append(VideoMeta(vid, frame_count, fps_val, norm, category))
    return out


def write_manifest(manifest, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        for m in manifest:
            w.writerow([m.video_id, m.frame_count, repr(float(m.fps)), m.normality.value, m.category or ""])


# --------------------------------------------------------------- annotations


def seconds_to_frame(t: float, fps: float) -> int:
    """``round(t * fps)`` with halves rounded away from zero."""
    v = t * fps
    return int(math.copysign(math.floor(abs(v) + 0.5), v))


def _merge(intervals, where):
    merged = []
    for s, e in sorted(intervals):
        if merged and s <= merged[-1][1]:
            logger.warning("%s: merging overlapping/touching intervals [%d,%d) and [%d,%d)",
                           where, merged[-1][0], merged[-1][1], s, e)
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def load_annotations(path, manifest, time_unit=None) -> list:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc.msg}", path, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("rounds"), list):
        raise IngestError("expected an object with a 'rounds' list", path)
    file_unit = doc.get("time_unit", "frames")
    if time_unit is not None and time_unit != file_unit and "time_unit" in doc:
        raise IngestError(f"time_unit {time_unit!r} requested but file declares {file_unit!r}", path)
    unit = time_unit or file_unit
    if unit not in ("frames", "seconds"):
        raise IngestError(f"time_unit must be 'frames' or 'seconds', got {unit!r}", path)
    index = {m.video_id: m for m in manifest}

    rounds = []
    for ri, rdoc in enumerate(doc["rounds"]):
        loc = f"rounds[{ri}]"
        if not isinstance(rdoc, dict) or not isinstance(rdoc.get("videos"), dict):
            raise IngestError(f"{loc}: expected an object with a 'videos' map", path)
        rid = str(rdoc.get("round_id", ri))
        intervals = {}
        for vid, ivs in rdoc["videos"].items():
            vloc = f"{loc}.videos[{vid!r}]"
            meta = index.get(vid)
            if meta is None:
                raise IngestError(f"{vloc}: unknown video id {vid!r}", path)
            if not isinstance(ivs, list):
                raise IngestError(f"{vloc}: expected a list of [start, end] pairs", path)
            frames = []
            for k, iv in enumerate(ivs):
                if (not isinstance(iv, (list, tuple)) or len(iv) != 2
                        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in iv)):
                    raise IngestError(f"{vloc}[{k}]: expected [start, end], got {iv!r}", path)
                s, e = iv
                if unit == "seconds":
                    s, e = seconds_to_frame(s, meta.fps), seconds_to_frame(e, meta.fps)
                elif s != int(s) or e != int(e):
                    raise IngestError(f"{vloc}[{k}]: frame bounds must be integers, got {iv!r}", path)
                s, e = int(s), int(e)
                if e == s:
                    raise IngestError(f"{vloc}[{k}]: empty interval [{s},{e})", path)
                if e < s:
                    raise IngestError(f"{vloc}[{k}]: interval end {e} before start {s}", path)
                frames.append((s, e))
            intervals[vid] = _merge(frames, f"{path.name} {vloc}")
        rounds.append(AnnotationRound(rid, intervals))
    ids = [r.round_id for r in rounds]
    if len(set(ids)) != len(ids):
        raise IngestError(f"duplicate round ids {ids}", path)
    return rounds


def write_annotations(rounds, path) -> None:
    doc = {
        "time_unit": "frames",
        "rounds": [{"round_id": r.round_id, "videos": {v: [list(iv) for iv in ivs] for v, ivs in r.intervals.items()}}
                   for r in rounds],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


# --------------------------------------------------------------- predictions


def load_predictions(path, manifest, clamp: bool = False) -> list:
    """Traces in manifest order. Scores outside [0, 1] are an error unless ``clamp``."""
    path = Path(path)
    index = {m.video_id: m for m in manifest}
    found = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"invalid JSON: {exc.msg}", path, lineno, exc.colno) from None
            if not isinstance(rec, dict) or "video_id" not in rec or not isinstance(rec.get("scores"), list):
                raise IngestError("expected {\"video_id\": ..., \"scores\": [...]}", path, lineno)
            vid = rec["video_id"]
            meta = index.get(vid)
            if meta is None:
                raise IngestError(f"unknown video id {vid!r}", path, lineno)
            if vid in found:
                raise IngestError(f"duplicate record for video {vid!r}", path, lineno)
            try:
                scores = np.asarray(rec["scores"], dtype=float)
            except (TypeError, ValueError):
                raise IngestError(f"video {vid!r}: scores must be numbers", path, lineno) from None
            if scores.ndim != 1 or len(scores) != meta.frame_count:
                raise IngestError(f"video {vid!r}: length mismatch, {scores.size} scores for "
                                  f"{meta.frame_count} frames", path, lineno)
            bad = np.flatnonzero(~((scores >= 0) & (scores <= 1)))
            if bad.size:
                if clamp and np.all(np.isfinite(scores)):
                    scores = np.clip(scores, 0.0, 1.0)
                else:
                    i = int(bad[0])
                    raise IngestError(f"score out of range: video {vid!r} frame {i} has {scores[i]!r}",
                                      path, lineno)
            found[vid] = FrameScoreTrace(vid, scores)
    missing = [m.video_id for m in manifest if m.video_id not in found]
    if missing:
        raise IngestError("missing predictions for: " + ", ".join(missing), path)
    return [found[m.video_id] for m in manifest]


def write_predictions(preds, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tr in preds:
            scores = ", ".join(repr(float(s)) for s in tr.scores)
            fh.write(f'{{"video_id": {json.dumps(tr.video_id)}, "scores": [{scores}]}}\n')


# ------------------------------------------------------------------- reports


def _json_text(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _far_key(tau: float) -> str:
    return repr(fmt_float(tau))


def report_to_dict(report: MetricReport) -> dict:
    return {
        "metrics": {k: fmt_float(getattr(report, k)) for k in MetricReport.METRICS},
        "far": {_far_key(t): fmt_float(v) for t, v in report.far.items()},
        "params": {"phi": report.params.phi, "alpha": fmt_float(report.params.alpha),
                   "beta": fmt_float(report.params.beta)},
        "provenance": [{"path": d.path, "sha256": d.sha256, "record_count": d.record_count}
                       for d in report.provenance],
        "skipped": dict(report.skipped),
        "warnings": list(report.warnings),
    }


def write_json(doc, path) -> None:
    Path(path).write_text(_json_text(doc), encoding="utf-8")


def write_report(report: MetricReport, path) -> None:
    write_json(report_to_dict(report), path)


def load_report(path) -> MetricReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    m = doc["metrics"]
    p = doc["params"]
    return MetricReport(
        **{k: m.get(k) for k in MetricReport.METRICS},
        far={float(k): v for k, v in doc.get("far", {}).items()},
        params=LaApParams(p["phi"], p["alpha"], p["beta"]),
        provenance=tuple(FileDigest(d["path"], d["sha256"], d["record_count"]) for d in doc.get("provenance", [])),
        skipped=doc.get("skipped", {}),
        warnings=tuple(doc.get("warnings", [])),
    )


# -------------------------------------------------------------------- curves


def write_table(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else _fmt_cell(c) for c in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_curve(curve: Curve, path) -> None:
    write_table(path, ["x", "y", "tau"], zip(curve.x.tolist(), curve.y.tolist(), curve.tau.tolist()))


def load_curve(path, kind) -> Curve:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y", "tau"]:
            raise IngestError(f"bad curve header {header}", path, 1)
        rows = [[float(c) for c in row] for row in reader if row]
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    return Curve(arr[:, 0], arr[:, 1], arr[:, 2], CurveKind(kind))

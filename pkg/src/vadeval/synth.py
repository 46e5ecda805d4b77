"""Seeded synthetic datasets and detector traces.

Random numbers come from a 64-bit linear congruential generator so traces
can be reproduced bit-for-bit in any language::

    state_{n+1} = (LCG_MULT * state_n + LCG_INC) mod 2**64
    u_n         = (state_n >> 11) / 2**53                 (n >= 1)

Each video gets its own stream, seeded with
``splitmix64(seed XOR fnv1a64(video_id))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import AnnotationRound, FrameScoreTrace, Normality, VideoMeta

LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(text: str) -> int:
    h = FNV_OFFSET
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def stream_seed(seed: int, key: str) -> int:
    return splitmix64((int(seed) & MASK64) ^ fnv1a64(key))


class LCG:
    """Scalar reference generator; :func:`uniforms` is the vectorised equivalent."""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_uniform(self) -> float:
        self.state = (LCG_MULT * self.state + LCG_INC) & MASK64
        return (self.state >> 11) / float(1 << 53)


def uniforms(state: int, n: int) -> np.ndarray:
    """The first ``n`` outputs of the LCG started at ``state``, in [0, 1)."""
    if n <= 0:
        return np.zeros(0)
    a = np.full(n, LCG_MULT, dtype=np.uint64)
    powers = np.cumprod(a)                      # a^1 .. a^n, wrapping mod 2^64
    geo = np.cumsum(np.concatenate(([np.uint64(1)], powers[:-1])))   # 1 + a + ... + a^(k-1)
    states = powers * np.uint64(state & MASK64) + np.uint64(LCG_INC) * geo
    return (states >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class DetectorProfile:
    """Shape of a synthetic detector response.

    Inside each event interval the detector fires at ``peak_score`` for a
    block covering ``rise_width`` of the interval; ``onset_lag`` slides the
    block from the interval start (0) to its end (1). Everything else is
    uniform background noise in ``[0, background_noise]``.
    """

    onset_lag: float = 0.0
    rise_width: float = 0.3
    peak_score: float = 0.9
    background_noise: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("onset_lag", "rise_width", "peak_score", "background_noise"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.peak_score > self.background_noise:
            raise ValueError("peak_score must exceed the background noise level")


def synthesize(profile: DetectorProfile, manifest, intervals, seed=None) -> list:
    """One trace per manifest video.

    Block, in-interval background and outside background are drawn from
    fixed parts of the video's stream, so profiles that differ only in
    ``onset_lag`` give permutations of each other within every interval.
    """
    seed = profile.seed if seed is None else seed
    out = []
    for meta in manifest:
        u = uniforms(stream_seed(seed, meta.video_id), meta.frame_count)
        scores = np.empty(meta.frame_count)
        iv = intervals.get(meta.video_id)
        if iv is None:
            scores[:] = profile.background_noise * u
        else:
            L = iv.length
            width = min(L, max(1, _round_half_up(profile.rise_width * L)))
            start = iv.t_start + _round_half_up(profile.onset_lag * (L - width))
            # stream layout: block values, in-interval background, outside background
            inside = np.zeros(L, dtype=bool)
            inside[start - iv.t_start:start - iv.t_start + width] = True
            seg = np.empty(L)
            seg[inside] = np.clip(profile.peak_score - profile.background_noise * u[:width], 0.0, 1.0)
            seg[~inside] = profile.background_noise * u[width:L]
            scores[iv.t_start:iv.t_end] = seg
            scores[:iv.t_start] = profile.background_noise * u[L:L + iv.t_start]
            scores[iv.t_end:] = profile.background_noise * u[L + iv.t_start:]
        out.append(FrameScoreTrace(meta.video_id, scores))
    return out


def uniform_scores(manifest, seed: int = 0) -> list:
    """Random-baseline traces: i.i.d. uniform scores."""
    return [FrameScoreTrace(m.video_id, uniforms(stream_seed(seed, "uniform:" + m.video_id), m.frame_count))
            for m in manifest]


CATEGORIES = ("Abuse", "Arrest", "Arson", "Assault", "Explosion", "Fighting", "RoadAccidents", "Robbery")


def synthesize_dataset(n_videos: int, frames_per_video: int, abnormal_fraction: float = 0.5,
                       n_rounds: int = 4, seed: int = 0, fps: float = 30.0,
                       event_fraction=(0.2, 0.5), jitter: float = 0.1):
    """Manifest plus ``n_rounds`` annotation rounds with jittered boundaries.

    Each abnormal video has one true event covering a fraction of the video
    drawn from ``event_fraction``; every round perturbs both boundaries by up
    to ``jitter`` of the event length.
    """
    gen = LCG(stream_seed(seed, "dataset"))
    n_abnormal = _round_half_up(abnormal_fraction * n_videos)
    manifest, truth = [], {}
    for i in range(n_videos):
        vid = f"v{i:05d}"
        abnormal = i < n_abnormal
        cat = CATEGORIES[i % len(CATEGORIES)] if abnormal else "Normal"
        manifest.append(VideoMeta(vid, frames_per_video, fps,
                                  Normality.ABNORMAL if abnormal else Normality.NORMAL, cat))
        if abnormal:
            lo, hi = event_fraction
            length = max(2, _round_half_up((lo + (hi - lo) * gen.next_uniform()) * frames_per_video))
            length = min(length, frames_per_video)
            start = int(gen.next_uniform() * (frames_per_video - length + 1))
            truth[vid] = (start, start + length)
    rounds = []
    for r in range(n_rounds):
        ivs = {}
        for vid, (s, e) in truth.items():
            j = jitter * (e - s)
            s2 = min(max(0, s + _round_half_up((2 * gen.next_uniform() - 1) * j)), frames_per_video - 1)
            e2 = max(min(frames_per_video, e + _round_half_up((2 * gen.next_uniform() - 1) * j)), s2 + 1)
            ivs[vid] = [(s2, e2)]
        rounds.append(AnnotationRound(f"r{r}", ivs))
    return manifest, rounds

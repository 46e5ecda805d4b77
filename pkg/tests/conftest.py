import numpy as np
import pytest

from vadeval.model import AnnotationRound, FrameScoreTrace, Normality, VideoMeta


def video(vid, frames, abnormal=True, fps=30.0, category=None):
    return VideoMeta(vid, frames, fps, Normality.ABNORMAL if abnormal else Normality.NORMAL,
                     category or ("Fighting" if abnormal else "Normal"))


def random_instance(rng, n, tie_levels=None, soft=False):
    """Random (scores, labels) with both classes present.

    ``tie_levels`` quantises the scores to that many values to force ties.
    """
    while True:
        s = rng.random(n)
        if tie_levels:
            s = np.floor(s * tie_levels) / tie_levels
        if soft:
            y = rng.integers(0, 5, n) / 4.0
        else:
            y = (rng.random(n) < rng.uniform(0.1, 0.9)).astype(float)
        if 0 < y.sum() < n and np.any(y < 1) and np.any(y > 0):
            if soft and np.all(y == y[0]):
                continue
            return s, y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def toy():
    """Three videos: two abnormal, one normal; two annotation rounds."""
    manifest = [video("a", 20), video("b", 10), video("n", 10, abnormal=False)]
    rounds = [
        AnnotationRound("r0", {"a": [(5, 12)], "b": [(2, 6)]}),
        AnnotationRound("r1", {"a": [(6, 12)], "b": [(2, 7)]}),
    ]
    rs = np.random.default_rng(0)
    preds = [FrameScoreTrace(m.video_id, rs.random(m.frame_count)) for m in manifest]
    return manifest, rounds, preds


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

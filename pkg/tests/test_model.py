import numpy as np
import pytest
from hypothesis import given, strategies as st

from vadeval.model import (
    AnnotationRound,
    Curve,
    EventInterval,
    FrameScoreTrace,
    LaApParams,
    errors_only,
    expand_round,
    intervals_to_labels,
    labels_to_intervals,
    subset,
    validate_dataset,
)

from conftest import video


def kinds(violations):
    return [v.kind for v in violations]


def test_consistent_dataset_has_no_violations():
    manifest = [video("v1", 100), video("v2", 50, abnormal=False)]
    rounds = [AnnotationRound("r0", {"v1": [(10, 20)]})]
    preds = [FrameScoreTrace("v1", np.zeros(100)), FrameScoreTrace("v2", np.zeros(50))]
    assert validate_dataset(manifest, rounds, preds) == []


def test_length_mismatch():
    manifest = [video("v1", 100, abnormal=False)]
    out = validate_dataset(manifest, preds=[FrameScoreTrace("v1", np.zeros(99))])
    assert kinds(out) == ["length_mismatch"]


def test_interval_out_of_range():
    manifest = [video("v1", 100)]
    out = validate_dataset(manifest, [AnnotationRound("r0", {"v1": [(50, 120)]})])
    assert kinds(out) == ["interval_range"]


def test_other_violations():
    manifest = [video("a", 10), video("n", 10, abnormal=False)]
    rounds = [
        AnnotationRound("r0", {"a": [(0, 4), (3, 6)], "n": [(1, 2)], "zz": [(0, 1)]}),
    ]
    out = kinds(validate_dataset(manifest, rounds))
    assert {"interval_order", "normal_with_intervals", "unknown_video"} <= set(out)

    preds = [FrameScoreTrace("a", np.full(10, 1.5))]
    out = kinds(validate_dataset(manifest, preds=preds))
    assert "score_range" in out and "missing_prediction" in out


def test_round_coverage_and_disagreement():
    manifest = [video("a", 10), video("b", 10)]
    out = validate_dataset(manifest, [AnnotationRound("r0", {"a": [(0, 2)]}),
                                      AnnotationRound("r1", {"b": [(0, 2)]})])
    assert "round_coverage" in kinds(out)

    out = validate_dataset(manifest, [AnnotationRound("r0", {"a": [(0, 2)], "b": [(1, 3)]}),
                                      AnnotationRound("r1", {"a": [(0, 2)], "b": []})])
    assert kinds(out) == ["round_disagreement"]
    assert errors_only(out) == []


def test_abnormal_unannotated():
    manifest = [video("a", 10)]
    out = validate_dataset(manifest, [AnnotationRound("r0", {"a": []})])
    assert kinds(out) == ["abnormal_unannotated"]


@pytest.mark.parametrize("ivs,expected", [
    ([(2, 5)], "0011100000"),
    ([], "0000000000"),
    ([(0, 3), (7, 10)], "1110000111"),
])
def test_expand_round(ivs, expected):
    manifest = [video("v", 10)]
    labels = expand_round(AnnotationRound("r", {"v": ivs}), manifest)["v"]
    assert "".join(map(str, labels.tolist())) == expected


def test_expand_round_unknown_id():
    with pytest.raises(KeyError, match="ghost"):
        expand_round(AnnotationRound("r", {"ghost": [(0, 1)]}), [video("v", 10)])


@st.composite
def interval_lists(draw):
    n = draw(st.integers(1, 200))
    cuts = sorted(set(draw(st.lists(st.integers(0, n), max_size=12))))
    pairs = [(cuts[i], cuts[i + 1]) for i in range(0, len(cuts) - 1, 2)]
    # drop touching neighbours so the list is made of maximal runs
    out = []
    for s, e in pairs:
        if s < e and (not out or s > out[-1][1]):
            out.append((s, e))
    return n, out


@given(interval_lists())
def test_expansion_inverse_consistent(case):
    n, ivs = case
    labels = intervals_to_labels(ivs, n)
    assert labels_to_intervals(labels) == ivs
    assert labels.sum() == sum(e - s for s, e in ivs)


def test_frozen_types():
    tr = FrameScoreTrace("v", [0.1, 0.2])
    with pytest.raises(ValueError):
        tr.scores[0] = 1.0
    with pytest.raises(ValueError):
        LaApParams(phi=0)
    with pytest.raises(ValueError):
        LaApParams(alpha=1.0)
    with pytest.raises(ValueError):
        EventInterval("v", 5, 5)
    with pytest.raises(ValueError):
        Curve([0, 1], [0], [1, 2], "roc")
    with pytest.raises(ValueError):
        video("v", 10, fps=0)


def test_subset_drops_categories():
    manifest = [video("a", 10, category="Burglary"), video("b", 10)]
    rounds = [AnnotationRound("r", {"a": [(0, 2)], "b": [(1, 3)]})]
    preds = [FrameScoreTrace("a", np.zeros(10)), FrameScoreTrace("b", np.zeros(10))]
    m, r, p = subset(manifest, rounds, preds, ["Burglary"])
    assert [x.video_id for x in m] == ["b"]
    assert list(r[0].intervals) == ["b"]
    assert [t.video_id for t in p] == ["b"]

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vadeval import agreement as agr
from vadeval.model import AnnotationRound

from conftest import video


def cohen_by_definition(a, b):
    """Cohen's kappa from the 2x2 contingency table, loop by loop."""
    n = len(a)
    table = [[0, 0], [0, 0]]
    for x, y in zip(a, b):
        table[int(x)][int(y)] += 1
    p_o = (table[0][0] + table[1][1]) / n
    p_e = sum((table[k][0] + table[k][1]) / n * (table[0][k] + table[1][k]) / n for k in (0, 1))
    return (p_o - p_e) / (1 - p_e)


def fleiss_by_definition(ratings):
    """Fleiss' kappa with n raters, N items and two categories, term by term."""
    n, N = len(ratings), len(ratings[0])
    P_i, totals = [], [0, 0]
    for i in range(N):
        n_ij = [0, 0]
        for r in range(n):
            n_ij[int(ratings[r][i])] += 1
        totals[0] += n_ij[0]
        totals[1] += n_ij[1]
        P_i.append((n_ij[0] * (n_ij[0] - 1) + n_ij[1] * (n_ij[1] - 1)) / (n * (n - 1)))
    P_bar = sum(P_i) / N
    p_j = [t / (N * n) for t in totals]
    P_e = p_j[0] ** 2 + p_j[1] ** 2
    return (P_bar - P_e) / (1 - P_e)


def test_cohen_examples():
    assert agr.cohen_kappa_labels([1, 1, 0, 0], [1, 0, 1, 0]) == 0.0
    assert agr.cohen_kappa_labels([1, 0], [0, 1]) == -1.0
    assert agr.cohen_kappa_labels([1, 0, 1], [1, 0, 1]) == 1.0
    assert agr.cohen_kappa_labels([1, 1], [1, 1]) == 1.0
    # opposite constants: p_e = 0, so kappa = p_o = 0
    assert agr.cohen_kappa_labels([1, 1], [0, 0]) == 0.0
    with pytest.raises(agr.AgreementError):
        agr.cohen_kappa_labels([1, 0], [1])


def test_fleiss_examples():
    assert agr.fleiss_kappa_labels([[1, 0, 1, 0]] * 3) == 1.0
    split = [[1, 1, 1], [1, 1, 1], [0, 0, 0], [0, 0, 0]]
    # every item has P_i = (2*1 + 2*1)/(4*3) = 1/3, P_e = 1/2
    assert agr.fleiss_kappa_labels(split) == pytest.approx((1 / 3 - 0.5) / 0.5, abs=1e-15)
    checker = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0]]
    assert agr.fleiss_kappa_labels(checker) == pytest.approx(fleiss_by_definition(checker), abs=1e-12)


def test_random_fixtures_against_definitions(rng):
    for _ in range(150):
        raters = int(rng.integers(2, 6))
        items = int(rng.integers(3, 40))
        r = (rng.random((raters, items)) < rng.uniform(0.2, 0.8)).astype(int)
        if len(set(r.ravel())) < 2:
            continue
        assert abs(agr.fleiss_kappa_labels(r) - fleiss_by_definition(r.tolist())) <= 1e-12
        a, b = r[0], r[1]
        if len(set(a)) == 2 or len(set(b)) == 2:
            assert abs(agr.cohen_kappa_labels(a, b) - cohen_by_definition(a, b)) <= 1e-12


labels = st.lists(st.integers(0, 1), min_size=2, max_size=30)


@given(labels, st.integers(0, 2**32 - 1))
def test_cohen_symmetric_and_bounded(a, seed):
    b = np.random.default_rng(seed).integers(0, 2, len(a))
    a = np.array(a)
    if len(set(a)) < 2 and len(set(b)) < 2:
        return
    k = agr.cohen_kappa_labels(a, b)
    assert abs(k - agr.cohen_kappa_labels(b, a)) <= 1e-12
    assert -1 <= k <= 1


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1))
def test_fleiss_bounded(seed):
    r = np.random.default_rng(seed).integers(0, 2, (3, 10))
    assert -1 <= agr.fleiss_kappa_labels(r) <= 1


def four_round_fixture():
    """Hand-built 4-round, 3-video fixture at 10 fps (bounds in frames, [s, e))."""
    manifest = [video("A", 200, fps=10), video("B", 200, fps=10), video("C", 200, fps=10),
                video("N", 200, abnormal=False, fps=10)]
    a = [(10, 50), (20, 50), (30, 50), (40, 50)]       # starts 1,2,3,4 s; ends 5 s
    b = [(0, 100), (0, 120), (20, 100), (20, 120)]     # starts 0,0,2,2 s; ends 10,12,10,12 s
    c = [(60, 90)] * 4
    rounds = [AnnotationRound(f"r{i}", {"A": [a[i]], "B": [b[i]], "C": [c[i]]}) for i in range(4)]
    return manifest, rounds


def test_table2_shaped_report():
    manifest, rounds = four_round_fixture()
    rep = agr.agreement_report(rounds, manifest)
    devs = {d.video_id: d for d in rep.deviations}
    # A: starts {1,2,3,4} -> std sqrt(1.25); durations {4,3,2,1} -> sqrt(1.25); ends equal
    assert devs["A"].start_std == pytest.approx(np.sqrt(1.25), abs=1e-12)
    assert devs["A"].duration_std == pytest.approx(np.sqrt(1.25), abs=1e-12)
    assert devs["A"].end_std == 0
    # B: starts {0,0,2,2} -> 1; ends {10,12,10,12} -> 1; durations {10,12,8,10} -> sqrt(2)
    assert devs["B"].start_std == pytest.approx(1.0, abs=1e-12)
    assert devs["B"].end_std == pytest.approx(1.0, abs=1e-12)
    assert devs["B"].duration_std == pytest.approx(np.sqrt(2), abs=1e-12)
    assert (devs["C"].start_std, devs["C"].duration_std, devs["C"].end_std) == (0, 0, 0)
    assert rep.median_start_std == pytest.approx(1.0, abs=1e-12)
    assert rep.median_duration_std == pytest.approx(np.sqrt(1.25), abs=1e-12)
    assert rep.median_end_std == 0
    assert rep.pairwise_kappa.shape == (4, 4) and np.all(np.diag(rep.pairwise_kappa) == 1)


def test_boundary_stats_examples():
    manifest = [video("v", 1000, fps=1.0)]
    rounds = [AnnotationRound("r0", {"v": [(10, 20)]}), AnnotationRound("r1", {"v": [(12, 20)]})]
    devs, _, _ = agr.boundary_stats(rounds, manifest)
    assert devs[0].start_std == 1.0
    same = [AnnotationRound(f"r{i}", {"v": [(10, 20)]}) for i in range(3)]
    devs, _, _ = agr.boundary_stats(same, manifest)
    assert (devs[0].start_std, devs[0].duration_std, devs[0].end_std) == (0, 0, 0)


def test_boundary_stats_excludes_single_round_videos():
    manifest = [video("v", 100), video("w", 100)]
    rounds = [AnnotationRound("r0", {"v": [(10, 20)], "w": [(1, 5)]}),
              AnnotationRound("r1", {"v": [(12, 20)], "w": []})]
    devs, _, excluded = agr.boundary_stats(rounds, manifest)
    assert [d.video_id for d in devs] == ["v"] and excluded == ["w"]


def test_boundary_stats_order_invariant():
    manifest, rounds = four_round_fixture()
    base = agr.boundary_stats(rounds, manifest)
    for perm in itertools.permutations(rounds):
        assert agr.boundary_stats(list(perm), manifest) == base


def test_identical_rounds_kappa_one():
    manifest, rounds = four_round_fixture()
    same = [AnnotationRound(f"r{i}", rounds[0].intervals) for i in range(4)]
    rep = agr.agreement_report(same, manifest)
    assert np.all(rep.pairwise_kappa == 1) and rep.fleiss_kappa == 1


def test_category_confusion():
    labels = {f"b{i}": "Burglary" for i in range(4)} | {"f": "Fighting"}
    ident = agr.category_confusion(labels, dict(labels))
    assert np.all(ident.buckets[:, 0] == 1)
    moved = dict(labels, b0="Normal")
    conf = agr.category_confusion(labels, moved)
    row = conf.categories.index("Burglary")
    assert conf.buckets[row].tolist() == [0.75, 0.0, 0.25]
    with pytest.raises(agr.AgreementError):
        agr.category_confusion({"x": "A"}, {"y": "A"})

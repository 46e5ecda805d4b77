import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vadeval import classic, prob
from vadeval.classic import MetricError
from vadeval.model import AnnotationRound

from conftest import random_instance, video


def test_make_prob_labels():
    manifest = [video("v", 12)]
    rounds = [AnnotationRound(f"r{i}", {"v": [(10, 12)] if i == 0 else [(10, 11)]}) for i in range(4)]
    (tr,) = prob.make_prob_labels(rounds, manifest)
    assert tr.probs[10] == 1.0 and tr.probs[11] == 0.25 and tr.probs[0] == 0.0
    (single,) = prob.make_prob_labels(rounds[:1], manifest)
    assert single.probs.tolist() == [0.0] * 10 + [1.0, 1.0]


def test_best_worst_hard_labels():
    y = np.array([0, 1, 1, 0, 1.0])
    best, worst = prob.best_worst_curves(y, "roc")
    assert classic.trapezoid_area(best) == 1.0 and classic.trapezoid_area(worst) == 0.0
    best, worst = prob.best_worst_curves(y, "pr")
    assert classic.step_area(best) == 1.0 and classic.step_area(worst) == 0.0


def test_self_reference_equals_best():
    y = np.array([1, 0.5, 0])
    n = prob.normalization(y, y, "roc")
    assert n.raw_area == n.best_area


def test_best_worst_pr_against_enumeration():
    y = np.array([1, 0.75, 0.5, 0.25, 0])
    best, worst = prob.best_worst_curves(y, "pr")
    assert classic.step_area(best) == pytest.approx(classic.ap_oracle(y, y), abs=1e-12)
    assert classic.step_area(worst) == pytest.approx(classic.ap_oracle(1 - y, y), abs=1e-12)


def test_degenerate():
    with pytest.raises(MetricError, match="degenerate label distribution"):
        prob.prob_auc([0.1, 0.2], [0.5, 0.5])


def test_collapsed_normalization():
    n = prob.ProbNormalization(0.5, 0.5, 0.5)
    with pytest.raises(MetricError, match="normalization collapsed"):
        n.value


def test_degeneration_examples(rng):
    for _ in range(20):
        s, y = random_instance(rng, 200, tie_levels=10)
        assert abs(prob.prob_auc(s, y) - classic.auc(s, y)) <= 1e-9
        assert abs(prob.prob_ap(s, y) - classic.ap(s, y)) <= 1e-9


def test_extremes(rng):
    for _ in range(20):
        _, y = random_instance(rng, 200, soft=True)
        assert prob.prob_auc(y, y) == pytest.approx(1, abs=1e-9)
        assert prob.prob_ap(y, y) == pytest.approx(1, abs=1e-9)
        assert prob.prob_auc(1 - y, y) == pytest.approx(0, abs=1e-9)
        assert prob.prob_ap(1 - y, y) == pytest.approx(0, abs=1e-9)


soft_instances = st.integers(0, 2**32 - 1).map(lambda seed: random_instance(np.random.default_rng(seed), 50, soft=True))


@settings(max_examples=200)
@given(soft_instances)
def test_bounds_and_geometric_identity(inst):
    s, y = inst
    # distinct scores: see the ledger note on tied predictions for ProbAP
    for kind in ("roc", "pr"):
        n = prob.normalization(s, y, kind)
        v = n.value
        assert 0.0 <= v <= 1.0
        assert v == pytest.approx(n.yellow / (n.yellow + n.red), abs=1e-12)


@settings(max_examples=200)
@given(soft_instances, st.floats(0.01, 1.0))
def test_monotone_response(inst, bump):
    s, y = inst
    i = int(np.argmax(y))  # a frame with the highest soft label
    if y[i] <= 0.5:
        return
    s2 = s.copy()
    s2[i] = min(1.0, s2[i] + bump)
    assert prob.prob_auc(s2, y) >= prob.prob_auc(s, y) - 1e-12
    # the oracle agrees on the raw areas
    assert classic.auc(s2, y) == pytest.approx(classic.auc_oracle(s2, y), abs=1e-9)

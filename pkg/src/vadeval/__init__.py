"""Evaluation toolkit for weakly supervised video anomaly detection.

Frame-level AUC/AP, probabilistic ProbAUC/ProbAP over multi-round labels,
latency-aware LaAP, false alarm rate, and inter-annotator agreement.
"""
from .agreement import agreement_report, cohen_kappa, fleiss_kappa
from .classic import MetricError, ap, auc, far, pr_curve, roc_curve
from .laap import event_intervals, laap_from_intervals
from .model import (
    AnnotationRound,
    Curve,
    EventInterval,
    FrameScoreTrace,
    LaApParams,
    MetricReport,
    Normality,
    VideoMeta,
    validate_dataset,
)
from .prob import make_prob_labels, prob_ap, prob_auc

__version__ = "0.1.0"

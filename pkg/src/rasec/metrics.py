"""Precision / recall / F1 of an estimated incision map against the phantom."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .domain import BOUNDARY, INSIDE, GroundTruthPhantom


@dataclass(frozen=True)
class ClassificationReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    tn: int
    excluded: int

    def as_dict(self) -> dict:
        return asdict(self)


def classify_field(posterior_mean, threshold: float) -> np.ndarray:
    """Predict incision (soft, high score) wherever the mean reaches ``threshold``."""
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    return np.asarray(posterior_mean, dtype=float) >= threshold


def confusion_report(predicted, labels) -> ClassificationReport:
    """Score a boolean mask against per-candidate ground-truth labels.

    Boundary-labelled candidates are left out of the confusion matrix.
    """
    predicted = np.asarray(predicted, dtype=bool)
    labels = np.asarray(labels)
    if predicted.shape != labels.shape:
        raise ValueError(f"mask has {predicted.size} entries, expected {labels.size}")
    scored = labels != BOUNDARY
    truth = labels == INSIDE
    tp = int(np.sum(predicted & truth & scored))
    fp = int(np.sum(predicted & ~truth & scored))
    fn = int(np.sum(~predicted & truth & scored))
    tn = int(np.sum(~predicted & ~truth & scored))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return ClassificationReport(precision, recall, f1, tp, fp, fn, tn, int(np.sum(~scored)))


def score(predicted, phantom: GroundTruthPhantom) -> ClassificationReport:
    return confusion_report(predicted, phantom.grid_labels())

"""Classification scores and the analytic benchmark models.

Weighted accuracy is balanced accuracy: the mean per-class recall over the
classes present in the gold labels.  The F1 score is the unweighted macro
mean over those same classes.  Benchmarks are analytic expectations, not
sampled draws, so reports are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .propagation import CLASS_ORDER, class_to_column

BENCHMARK_KINDS = ("random", "weighted_random", "majority")

#: Probabilities are clipped to [PROB_FLOOR, 1] inside the log loss.
PROB_FLOOR = 1e-15


@dataclass
class MetricSet:
    accuracy: float
    weighted_accuracy: float
    f1_macro: float
    log_loss: float

    def as_dict(self) -> dict[str, float]:
        return {
            "accuracy": self.accuracy,
            "weighted_accuracy": self.weighted_accuracy,
            "f1_macro": self.f1_macro,
            "log_loss": self.log_loss,
        }


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def compute_metrics(truth, pred, probs) -> MetricSet:
    """Score predictions against gold classes.

    ``probs`` rows follow the fixed class column order and must be
    normalized; the log loss reads the probability assigned to the true
    class, clipped to [1e-15, 1].
    """
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    probs = np.asarray(probs, dtype=np.float64)
    if truth.shape[0] != pred.shape[0] or probs.shape[0] != truth.shape[0]:
        raise ParameterError("truth, pred and probs must have equal lengths")
    n = truth.shape[0]
    if n == 0:
        raise ParameterError("cannot score an empty evaluation set")

    accuracy = float(np.mean(truth == pred))

    present = [c for c in CLASS_ORDER if np.any(truth == c)]
    recalls = []
    f1s = []
    for c in present:
        truth_c = truth == c
        pred_c = pred == c
        tp = float(np.sum(truth_c & pred_c))
        recall = tp / float(np.sum(truth_c))
        predicted = float(np.sum(pred_c))
        precision = tp / predicted if predicted > 0 else 0.0
        recalls.append(recall)
        f1s.append(_f1(precision, recall))

    cols = np.array([class_to_column(int(c)) for c in truth])
    p_true = np.clip(probs[np.arange(n), cols], PROB_FLOOR, 1.0)
    log_loss = float(-np.mean(np.log(p_true)))

    return MetricSet(
        accuracy=accuracy,
        weighted_accuracy=float(np.mean(recalls)),
        f1_macro=float(np.mean(f1s)),
        log_loss=log_loss,
    )


def class_frequencies(truth) -> np.ndarray:
    """Empirical class frequencies in CLASS_ORDER."""
    truth = np.asarray(truth)
    if truth.shape[0] == 0:
        raise ParameterError("empty truth vector")
    return np.array([np.mean(truth == c) for c in CLASS_ORDER], dtype=np.float64)


def benchmark_scores(truth, kind: str) -> MetricSet:
    """Expected scores of a reference model on the given gold labels.

    * ``random`` assigns each class with probability 1/3.
    * ``weighted_random`` assigns class c with its empirical frequency p_c.
    * ``majority`` assigns every message the most frequent class (ties go to
      the smallest class value).

    All values are closed-form expectations over the model's randomness.
    """
    if kind not in BENCHMARK_KINDS:
        raise ParameterError(f"unknown benchmark {kind!r}; expected one of {BENCHMARK_KINDS}")
    p = class_frequencies(truth)
    present = p > 0
    n_present = int(np.sum(present))

    if kind == "random":
        third = 1.0 / 3.0
        f1s = [_f1(p_c, third) for p_c in p[present]]
        # the classifier reports the uniform row, so every message costs ln 3
        return MetricSet(third, third, float(np.mean(f1s)), float(np.log(3.0)))

    if kind == "weighted_random":
        accuracy = float(np.sum(p * p))
        # recall(c) = precision(c) = p_c, so F1(c) = p_c as well
        weighted = float(np.mean(p[present]))
        f1 = weighted
        entropy = float(-np.sum(p[present] * np.log(p[present])))
        return MetricSet(accuracy, weighted, f1, entropy)

    maj_col = int(np.argmax(p))  # argmax returns the first (smallest class) on ties
    p_m = float(p[maj_col])
    accuracy = p_m
    weighted = 1.0 / n_present
    f1 = _f1(p_m, 1.0) / n_present
    log_loss = float(-(1.0 - p_m) * np.log(PROB_FLOOR))
    return MetricSet(accuracy, weighted, f1, log_loss)

"""One-rumour classification pipeline shared by the CLI, the experiment
harness and the annotation service.

A :class:`RumourClassifier` featurizes the rumour's classifiable messages
once and caches affinity matrices per kernel parameter, so re-classifying
with a new seed set only pays for the diffusion.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .data import Message, Rumour, STANCES
from .errors import DataError, ParameterError, SeedingError
from .features import BrownClusterMap, FeatureMatrix, Lexicons, featurize, featureless_rows
from .propagation import (
    AffinityMatrix,
    LabelDistribution,
    PropagationConfig,
    assign_classes,
    build_knn_affinity,
    build_rbf_affinity,
    run_propagation,
    seed_distribution,
)
from .sigma import FALLBACK_SIGMA, LabeledPointSet, heuristic_sigma

log = logging.getLogger(__name__)

KERNELS = ("rbf", "knn")
SIGMA_MODES = ("fixed", "grid", "heuristic")


@dataclass
class PipelineSettings:
    """Feature space, kernel and diffusion parameters for one classification.

    ``stemmed_variant`` switches preprocessing to the alternative pipeline
    (stemming on, stop-words removed); the default keeps whole words and
    stop-words, which scores better.
    """

    feature_space: str = "brown"
    kernel: str = "rbf"
    sigma: float = 0.85
    k: int = 10
    sigma_mode: str = "fixed"
    algorithm: str = "label_spreading"
    alpha: float = 1.0
    tol: float = 1e-3
    max_iter: int = 1000
    stemmed_variant: bool = False

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ParameterError(f"unknown kernel {self.kernel!r}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ParameterError(f"unknown sigma mode {self.sigma_mode!r}")
        if self.kernel == "knn" and self.sigma_mode == "heuristic":
            raise ParameterError("the sigma heuristic applies to the rbf kernel only")

    def propagation_config(self) -> PropagationConfig:
        return PropagationConfig(
            algorithm=self.algorithm, alpha=self.alpha, tol=self.tol, max_iter=self.max_iter
        )


@dataclass
class ClassifyResult:
    """Propagated stance assignment for one rumour and one seed set."""

    messages: list[Message]
    distribution: LabelDistribution
    classes: np.ndarray
    iterations: int
    converged: bool
    param_used: float
    flags: list[str]

    def by_message(self) -> dict[str, dict]:
        out = {}
        for i, msg in enumerate(self.messages):
            out[msg.id] = {
                "stance": int(self.classes[i]),
                "probs": [float(x) for x in self.distribution.probs[i]],
                "is_seed": bool(self.distribution.labeled_mask[i]),
            }
        return out


class RumourClassifier:
    """Classify one rumour repeatedly under varying seeds and parameters."""

    def __init__(
        self,
        rumour: Rumour,
        settings: PipelineSettings,
        cluster_map: BrownClusterMap | None = None,
        lexicons: Lexicons | None = None,
    ):
        self.rumour = rumour
        self.settings = settings
        self.messages = rumour.classifiable_messages()
        if not self.messages:
            raise ParameterError(f"rumour {rumour.rumour_id!r} has no classifiable messages")
        self.index = {m.id: i for i, m in enumerate(self.messages)}
        self._cluster_map = cluster_map
        self._lexicons = lexicons
        self._features: FeatureMatrix | None = None
        self._affinity: dict[tuple[str, float], AffinityMatrix] = {}

    @property
    def features(self) -> FeatureMatrix:
        if self._features is None:
            from .preprocess import preprocess

            variant = self.settings.stemmed_variant
            tokenized = [
                preprocess(m.text, stem=variant, remove_stopwords=variant)
                for m in self.messages
            ]
            self._features = featurize(
                tokenized, self.settings.feature_space, self._cluster_map, self._lexicons
            )
            n_empty = featureless_rows(self._features).size
            if n_empty:
                log.debug(
                    "%s: %d featureless message(s) in space %s",
                    self.rumour.rumour_id, n_empty, self.settings.feature_space,
                )
        return self._features

    def affinity(self, param: float | None = None) -> AffinityMatrix:
        kernel = self.settings.kernel
        if param is None:
            param = self.settings.sigma if kernel == "rbf" else self.settings.k
        key = (kernel, float(param))
        if key not in self._affinity:
            if kernel == "rbf":
                self._affinity[key] = build_rbf_affinity(self.features, param)
            else:
                self._affinity[key] = build_knn_affinity(self.features, int(param))
        return self._affinity[key]

    def _heuristic_sigma(self, rows: list[int], classes: list[int]) -> float:
        if len(rows) < 2:
            log.warning(
                "%s: need two seeds for the sigma heuristic; using fallback %.2f",
                self.rumour.rumour_id, FALLBACK_SIGMA,
            )
            return FALLBACK_SIGMA
        sub = self.features.values[rows]
        vectors = sub.toarray() if hasattr(sub, "toarray") else sub
        return heuristic_sigma(LabeledPointSet(np.asarray(vectors), np.asarray(classes)))

    def classify(self, seeds: Mapping[str, int], param: float | None = None) -> ClassifyResult:
        """Propagate the given message-id -> stance seeds to every message."""
        if not seeds:
            raise SeedingError("no seed annotations supplied")
        rows, classes = [], []
        for mid, cls in seeds.items():
            if mid not in self.index:
                raise DataError(f"seed id {mid!r} is not classifiable in this rumour")
            if cls not in STANCES:
                raise DataError(f"seed stance {cls!r} must be one of {STANCES}")
            rows.append(self.index[mid])
            classes.append(int(cls))

        flags: list[str] = []
        if len(set(classes)) == 1:
            flags.append("single_class_seeds")

        if param is None and self.settings.kernel == "rbf" and self.settings.sigma_mode == "heuristic":
            param = self._heuristic_sigma(rows, classes)
        W = self.affinity(param)
        dist = seed_distribution(len(self.messages), dict(zip(rows, classes)))
        outcome = run_propagation(W, dist, self.settings.propagation_config())
        if not outcome.converged:
            flags.append("not_converged")
        unresolved = int(outcome.distribution.unresolved_mask().sum())
        if unresolved:
            flags.append(f"unresolved_rows:{unresolved}")
        return ClassifyResult(
            messages=self.messages,
            distribution=outcome.distribution,
            classes=assign_classes(outcome.distribution),
            iterations=outcome.iterations,
            converged=outcome.converged,
            param_used=float(W.sigma_or_k),
            flags=flags,
        )

    def with_settings(self, **changes) -> "RumourClassifier":
        """Classifier on the same rumour with adjusted settings (caches dropped)."""
        return RumourClassifier(
            self.rumour, replace(self.settings, **changes), self._cluster_map, self._lexicons
        )

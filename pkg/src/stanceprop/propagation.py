"""Affinity graphs and the label propagation / label spreading diffusions.

Messages are nodes of a similarity graph; a handful of rows carry one-hot
stance labels and the diffusion spreads them to the rest.  Class columns are
fixed everywhere in the package as ``(against=-1, neutral=0, supporting=+1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import DataError, IsolatedNodeError, ParameterError, SeedingError

#: Column order of every n-by-3 label/probability matrix.
CLASS_ORDER = (-1, 0, 1)

#: Degrees at or below this are treated as isolated nodes.
ISOLATION_EPS = 1e-12

LABEL_PROPAGATION = "label_propagation"
LABEL_SPREADING = "label_spreading"


def class_to_column(cls: int) -> int:
    """Map a stance class in {-1, 0, 1} to its column index."""
    try:
        return CLASS_ORDER.index(cls)
    except ValueError:
        raise ParameterError(f"unknown stance class {cls!r}; expected one of {CLASS_ORDER}")


def column_to_class(col: int) -> int:
    return CLASS_ORDER[col]


@dataclass
class AffinityMatrix:
    """Symmetric non-negative message similarity graph.

    ``weights`` is dense for the Gaussian kernel and CSR-sparse for the
    k-nearest-neighbour kernel.  ``sigma_or_k`` records the hyper-parameter
    the matrix was built with.
    """

    weights: np.ndarray | sp.csr_matrix
    kernel_kind: str  # "rbf" | "knn" | "custom"
    sigma_or_k: float

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def is_sparse(self) -> bool:
        return sp.issparse(self.weights)

    def dense(self) -> np.ndarray:
        return self.weights.toarray() if self.is_sparse() else self.weights

    def with_zero_diagonal(self) -> "AffinityMatrix":
        """Copy with the diagonal zeroed, as label spreading requires."""
        if self.is_sparse():
            w = self.weights - sp.diags(self.weights.diagonal())
            w = sp.csr_matrix(w)
            w.eliminate_zeros()
        else:
            w = self.weights.copy()
            np.fill_diagonal(w, 0.0)
        return AffinityMatrix(w, self.kernel_kind, self.sigma_or_k)


@dataclass
class DegreeMatrix:
    """Row sums of an affinity matrix, kept as a vector."""

    degrees: np.ndarray


@dataclass
class LabelDistribution:
    """Per-message class probabilities plus the seed-row mask.

    Rows are non-negative; after finalization each row that has any positive
    entry sums to one, and all-zero rows mark messages the graph carries no
    evidence about.
    """

    probs: np.ndarray  # (n, 3), columns follow CLASS_ORDER
    labeled_mask: np.ndarray  # (n,) bool

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def unresolved_mask(self) -> np.ndarray:
        """Rows with no positive entry (isolated or unreachable messages)."""
        return ~(self.probs > 0).any(axis=1)


def seed_distribution(n: int, seed_classes: Mapping[int, int]) -> LabelDistribution:
    """One-hot seed matrix from a row-index -> class mapping."""
    probs = np.zeros((n, 3), dtype=np.float64)
    mask = np.zeros(n, dtype=bool)
    for row, cls in seed_classes.items():
        if not 0 <= row < n:
            raise ParameterError(f"seed row {row} outside [0, {n})")
        probs[row, class_to_column(cls)] = 1.0
        mask[row] = True
    return LabelDistribution(probs, mask)


@dataclass
class PropagationConfig:
    """Algorithm choice plus clamping and stopping parameters.

    ``alpha`` is the clamping parameter: 1 means hard clamping (seed rows are
    reset after every sweep, for both algorithms).  ``tol`` is the threshold
    on the maximum absolute entry change per iteration.
    """

    algorithm: str = LABEL_SPREADING
    alpha: float = 1.0
    tol: float = 1e-3
    max_iter: int = 1000

    def __post_init__(self):
        if self.algorithm not in (LABEL_PROPAGATION, LABEL_SPREADING):
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")


class PropagationOutcome(NamedTuple):
    distribution: LabelDistribution
    iterations: int
    converged: bool


def _feature_array(X) -> np.ndarray | sp.csr_matrix:
    """Accept a FeatureMatrix, ndarray or sparse matrix and return its values."""
    values = getattr(X, "values", X)
    if sp.issparse(values):
        return sp.csr_matrix(values, dtype=np.float64)
    return np.asarray(values, dtype=np.float64)


def _squared_distances(X) -> np.ndarray:
    """Dense n-by-n matrix of pairwise squared Euclidean distances."""
    if sp.issparse(X):
        sq = np.asarray(X.multiply(X).sum(axis=1)).ravel()
        gram = np.asarray((X @ X.T).todense())
    else:
        sq = np.einsum("ij,ij->i", X, X)
        gram = X @ X.T
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    np.maximum(d2, 0.0, out=d2)
    # gemm output is not bit-symmetric; the affinity invariant requires it
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return d2


def build_rbf_affinity(X, sigma: float) -> AffinityMatrix:
    """Fully connected Gaussian-kernel graph W_ij = exp(-||x_i - x_j||^2 / 2 sigma^2).

    The diagonal is set to 1 (zero self-distance); label spreading derives a
    zero-diagonal copy via :meth:`AffinityMatrix.with_zero_diagonal`.
    """
    if not (np.isfinite(sigma) and sigma > 0):
        raise ParameterError(f"sigma must be a positive finite real, got {sigma}")
    X = _feature_array(X)
    if X.shape[0] < 1:
        raise DataError("feature matrix must have at least one row")
    data = X.data if sp.issparse(X) else X
    if not np.isfinite(data).all():
        raise DataError("feature matrix contains non-finite values")
    d2 = _squared_distances(X)
    W = np.exp(-d2 / (2.0 * sigma * sigma))
    np.fill_diagonal(W, 1.0)
    return AffinityMatrix(W, "rbf", float(sigma))


def build_knn_affinity(X, k: int) -> AffinityMatrix:
    """Binary k-nearest-neighbour graph, symmetrized by union.

    Entry (i, j) is 1 iff j is among i's k nearest neighbours by Euclidean
    distance or i is among j's.  Equidistant candidates are taken in index
    order so the graph is reproducible.
    """
    X = _feature_array(X)
    n = X.shape[0]
    if not (isinstance(k, (int, np.integer)) and 1 <= k < n):
        raise ParameterError(f"k must satisfy 1 <= k < n (n={n}), got {k}")
    data = X.data if sp.issparse(X) else X
    if not np.isfinite(data).all():
        raise DataError("feature matrix contains non-finite values")
    d2 = _squared_distances(X)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    cols = order[:, :k].ravel()
    rows = np.repeat(np.arange(n), k)
    ones = np.ones(n * k, dtype=np.float64)
    directed = sp.csr_matrix((ones, (rows, cols)), shape=(n, n))
    W = directed.maximum(directed.T)
    return AffinityMatrix(sp.csr_matrix(W), "knn", float(k))


def degree_matrix(W: AffinityMatrix) -> DegreeMatrix:
    """Row sums D_ii = sum_j W_ij; zero rows are permitted here."""
    if W.is_sparse():
        d = np.asarray(W.weights.sum(axis=1)).ravel()
    else:
        d = W.weights.sum(axis=1)
    return DegreeMatrix(np.asarray(d, dtype=np.float64))


def normalized_laplacian(W: AffinityMatrix) -> np.ndarray | sp.csr_matrix:
    """Symmetric normalized graph operator D^{-1/2} W D^{-1/2}.

    Requires a zero diagonal and strictly positive degrees; an isolated node
    raises (run_propagation has its own recovery path instead).
    """
    diag = W.weights.diagonal() if W.is_sparse() else np.diagonal(W.weights)
    if np.any(diag != 0):
        raise ParameterError("normalized_laplacian requires a zero diagonal")
    d = degree_matrix(W).degrees
    bad = np.flatnonzero(d <= ISOLATION_EPS)
    if bad.size:
        raise IsolatedNodeError(int(bad[0]))
    inv_sqrt = 1.0 / np.sqrt(d)
    if W.is_sparse():
        scale = sp.diags(inv_sqrt)
        return sp.csr_matrix(scale @ W.weights @ scale)
    return inv_sqrt[:, None] * W.weights * inv_sqrt[None, :]


def _row_scaled(W, scale: np.ndarray):
    """Multiply each row i of W by scale[i], keeping sparsity."""
    if sp.issparse(W):
        return sp.csr_matrix(sp.diags(scale) @ W)
    return scale[:, None] * W


def _finalize(probs: np.ndarray) -> np.ndarray:
    """Normalize rows with positive mass to probability simplices in place."""
    sums = probs.sum(axis=1)
    positive = sums > 0
    probs[positive] /= sums[positive, None]
    return probs


def run_propagation(
    W: AffinityMatrix,
    seeds: LabelDistribution,
    cfg: PropagationConfig | None = None,
) -> PropagationOutcome:
    """Diffuse seed labels over the graph until the update stabilizes.

    Label propagation sweeps ``Y <- D^-1 W Y``; label spreading sweeps
    ``Y <- alpha * Ls Y + (1 - alpha) * Y0`` with the symmetric normalized
    operator.  Under hard clamping (alpha = 1) the seed rows are reset to
    their one-hot values after every sweep for both algorithms.  Soft
    clamping (alpha < 1) in label propagation blends the propagated value
    of seed rows with their initial labels.

    Isolated nodes (zero degree after the algorithm's diagonal convention)
    never receive mass: unlabeled ones finish as all-zero rows, which
    :func:`assign_classes` maps to neutral.

    Never raises on non-convergence; the outcome carries ``converged=False``
    when ``max_iter`` is exhausted.
    """
    cfg = cfg or PropagationConfig()
    if not seeds.labeled_mask.any():
        raise SeedingError("propagation needs at least one labelled row")
    if seeds.n != W.n:
        raise ParameterError(f"seeds have {seeds.n} rows but graph has {W.n}")

    labeled = seeds.labeled_mask
    Y0 = np.array(seeds.probs, dtype=np.float64, copy=True)
    alpha = cfg.alpha
    hard_clamp = alpha == 1.0

    if cfg.algorithm == LABEL_SPREADING:
        graph = W.with_zero_diagonal()
        d = degree_matrix(graph).degrees
        active = d > ISOLATION_EPS
        inv_sqrt = np.zeros_like(d)
        inv_sqrt[active] = 1.0 / np.sqrt(d[active])
        if sp.issparse(graph.weights):
            scale = sp.diags(inv_sqrt)
            operator = sp.csr_matrix(scale @ graph.weights @ scale)
        else:
            operator = inv_sqrt[:, None] * graph.weights * inv_sqrt[None, :]

        def sweep(Y: np.ndarray) -> np.ndarray:
            Ynew = alpha * (operator @ Y) + (1.0 - alpha) * Y0
            if hard_clamp:
                Ynew[labeled] = Y0[labeled]
            return Ynew

    else:  # label propagation keeps the matrix's own diagonal convention
        d = degree_matrix(W).degrees
        active = d > ISOLATION_EPS
        inv_d = np.zeros_like(d)
        inv_d[active] = 1.0 / d[active]
        operator = _row_scaled(W.weights, inv_d)

        def sweep(Y: np.ndarray) -> np.ndarray:
            Ynew = np.asarray(operator @ Y)
            if hard_clamp:
                Ynew[labeled] = Y0[labeled]
            else:
                Ynew[labeled] = alpha * Ynew[labeled] + (1.0 - alpha) * Y0[labeled]
            return Ynew

    Y = Y0.copy()
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        Ynew = sweep(Y)
        delta = float(np.max(np.abs(Ynew - Y))) if Y.size else 0.0
        Y = Ynew
        if delta < cfg.tol:
            converged = True
            break

    _finalize(Y)
    if hard_clamp:
        Y[labeled] = Y0[labeled]  # bit-for-bit clamp invariance
    return PropagationOutcome(LabelDistribution(Y, labeled.copy()), iterations, converged)


def assign_classes(dist: LabelDistribution) -> np.ndarray:
    """Per-row argmax with a deterministic tie rule.

    Neutral wins any tie it participates in; otherwise the smallest class
    value wins (-1 before +1).  All-zero rows are a three-way tie at zero and
    therefore come out neutral; ``dist.unresolved_mask()`` flags them.
    """
    probs = dist.probs
    out = np.empty(probs.shape[0], dtype=np.int64)
    row_max = probs.max(axis=1)
    tied = probs == row_max[:, None]
    out[tied[:, 1]] = 0
    against = ~tied[:, 1] & tied[:, 0]
    out[against] = -1
    supporting = ~tied[:, 1] & ~tied[:, 0]
    out[supporting] = 1
    return out


def propagation_cost(
    W: AffinityMatrix, seeds: LabelDistribution, result: LabelDistribution
) -> float:
    """Diagnostic objective: seed fitting term plus graph smoothness term.

    ``sum_{i labelled} ||yhat_i - y_i||^2
    + 1/2 sum_{i,j} W_ij ||yhat_i - yhat_j||^2``
    """
    if result.n != W.n or seeds.n != W.n:
        raise ParameterError("shape mismatch between W, seeds and result")
    Yhat = result.probs
    fit = float(np.sum((Yhat[seeds.labeled_mask] - seeds.probs[seeds.labeled_mask]) ** 2))
    d = degree_matrix(W).degrees
    sq_norms = np.einsum("ij,ij->i", Yhat, Yhat)
    cross = (W.weights @ Yhat) if not W.is_sparse() else np.asarray(W.weights @ Yhat)
    # 1/2 sum_ij W_ij (|yi|^2 + |yj|^2 - 2 yi.yj) = sum_i d_i |yi|^2 - tr(Y^T W Y)
    smooth = float(np.dot(d, sq_norms) - np.einsum("ij,ij->", Yhat, cross))
    return fit + max(smooth, 0.0)

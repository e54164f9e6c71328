"""Per-rumour kernel-width selection from the labelled messages.

Builds the Euclidean minimum spanning tree over the labelled points, takes
the shortest MST edge whose endpoints carry different classes, and returns a
third of that distance (three standard deviations separate the classes).
Falls back to the globally tuned width when no inter-class edge exists.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

#: Globally tuned Gaussian width, used when the heuristic is undefined.
FALLBACK_SIGMA = 0.85

_DEGENERATE_EPS = 1e-12


@dataclass
class LabeledPointSet:
    """Feature vectors and classes of the labelled messages."""

    vectors: np.ndarray  # (l, m)
    classes: np.ndarray  # (l,) values in {-1, 0, 1}

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        self.classes = np.asarray(self.classes)
        if self.vectors.shape[0] != self.classes.shape[0]:
            raise ParameterError("vectors and classes must have equal length")
        if self.vectors.shape[0] < 2:
            raise ParameterError("need at least two labelled points")


def _prim_mst_edges(dist: np.ndarray) -> list[tuple[int, int, float]]:
    """Exact MST of a complete graph given its distance matrix (Prim, O(l^2))."""
    l = dist.shape[0]
    in_tree = np.zeros(l, dtype=bool)
    in_tree[0] = True
    best_from = dist[0].copy()
    parent = np.zeros(l, dtype=np.int64)
    edges: list[tuple[int, int, float]] = []
    for _ in range(l - 1):
        candidates = np.where(in_tree, np.inf, best_from)
        nxt = int(np.argmin(candidates))
        edges.append((int(parent[nxt]), nxt, float(best_from[nxt])))
        in_tree[nxt] = True
        closer = dist[nxt] < best_from
        best_from = np.where(closer, dist[nxt], best_from)
        parent = np.where(closer, nxt, parent)
    return edges


def heuristic_sigma(pts: LabeledPointSet) -> float:
    """Shortest different-class MST edge divided by three.

    Returns :data:`FALLBACK_SIGMA` with a warning when all points share one
    class or the closest differently-labelled points coincide.
    """
    X = pts.vectors
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    dist = np.sqrt(0.5 * (d2 + d2.T))

    if len(set(pts.classes.tolist())) < 2:
        warnings.warn(
            f"all labelled points share one class; falling back to sigma={FALLBACK_SIGMA}",
            stacklevel=2,
        )
        return FALLBACK_SIGMA

    edges = _prim_mst_edges(dist)
    inter = [w for i, j, w in edges if pts.classes[i] != pts.classes[j]]
    if not inter:
        # cannot happen for a spanning tree over >=2 classes, kept as a guard
        warnings.warn(
            f"no inter-class MST edge found; falling back to sigma={FALLBACK_SIGMA}",
            stacklevel=2,
        )
        return FALLBACK_SIGMA
    shortest = min(inter)
    if shortest <= _DEGENERATE_EPS:
        warnings.warn(
            "differently-labelled points coincide; "
            f"falling back to sigma={FALLBACK_SIGMA}",
            stacklevel=2,
        )
        return FALLBACK_SIGMA
    return shortest / 3.0

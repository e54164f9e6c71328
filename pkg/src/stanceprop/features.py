"""Feature vectors for rumour messages.

Four strategies are supported:

* ``brown`` - counts over a fixed 1,000-way word clustering (the cluster file
  the package bundles is a small demo; point ``BrownClusterMap.load`` at the
  published 1,000-cluster Twitter word-cluster file for real runs).
* ``ling`` - six hand-picked linguistic statistics.
* ``ngrams`` - word 2- to 6-gram counts with a per-rumour vocabulary.
* ``brown_ling`` - brown counts plus the sentiment and negation components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError
from .preprocess import TokenizedMessage

FEATURE_SPACES = ("brown", "ling", "ngrams", "brown_ling")

#: Component order of the linguistic vector.
LING_COMPONENTS = (
    "token_count",
    "mean_token_length",
    "tentative_count",
    "swear_count",
    "negation_count",
    "sentiment",
)

BROWN_DIM = 1000
#: brown_ling layout: columns 0..999 brown counts, 1000 sentiment, 1001 negation.
BROWN_LING_DIM = BROWN_DIM + 2


@dataclass
class FeatureMatrix:
    """n-by-m message feature matrix plus its feature-space descriptor."""

    values: np.ndarray | sp.csr_matrix
    space: str
    vocabulary: tuple[tuple[str, ...], ...] | None = None  # ngrams only

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def featureless_rows(fm: FeatureMatrix) -> np.ndarray:
    """Indices of messages whose feature vector is entirely zero."""
    values = fm.values
    if sp.issparse(values):
        nonzero = np.asarray((values != 0).sum(axis=1)).ravel()
        return np.flatnonzero(nonzero == 0)
    return np.flatnonzero(~(values != 0).any(axis=1))


class BrownClusterMap:
    """word -> cluster-index mapping read from a tab-separated cluster file.

    File lines are ``bitstring<TAB>word[<TAB>count]``; the cluster index of a
    word is the rank of its bitstring among distinct bitstrings in file
    order.  Lookup is case-insensitive.
    """

    def __init__(self, word_to_cluster: dict[str, int], cluster_count: int = BROWN_DIM):
        bad = [w for w, c in word_to_cluster.items() if not 0 <= c < cluster_count]
        if bad:
            raise DataError(f"cluster index out of range for {bad[0]!r}")
        self.word_to_cluster = word_to_cluster
        self.cluster_count = cluster_count

    @classmethod
    def load(cls, path: str | Path, cluster_count: int = BROWN_DIM) -> "BrownClusterMap":
        word_to_cluster: dict[str, int] = {}
        cluster_of_bits: dict[str, int] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) < 2:
                    raise DataError(f"{path}:{lineno}: expected bitstring<TAB>word")
                bits, word = parts[0], parts[1].lower()
                if bits not in cluster_of_bits:
                    if len(cluster_of_bits) >= cluster_count:
                        raise DataError(
                            f"{path}: more than {cluster_count} distinct clusters"
                        )
                    cluster_of_bits[bits] = len(cluster_of_bits)
                word_to_cluster.setdefault(word, cluster_of_bits[bits])
        return cls(word_to_cluster, cluster_count)

    @classmethod
    def bundled_demo(cls) -> "BrownClusterMap":
        """Small cluster file shipped with the package, for tests and demos."""
        with resources.as_file(
            resources.files("stanceprop.resources") / "brown_clusters_demo.txt"
        ) as p:
            return cls.load(p)

    def lookup(self, token: str) -> int | None:
        return self.word_to_cluster.get(token.lower())

    def __len__(self) -> int:
        return len(self.word_to_cluster)


def _read_word_list(path: str | Path) -> frozenset[str]:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.split("#", 1)[0].strip().lower()
            if word:
                words.add(word)
    return frozenset(words)


def _read_sentiment(path: str | Path) -> dict[str, float]:
    scores: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected word<TAB>score")
            word, raw = parts[0].strip().lower(), parts[1]
            try:
                score = float(raw)
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad score {raw!r}")
            if not -1.0 <= score <= 1.0:
                raise DataError(f"{path}:{lineno}: score {score} outside [-1, 1]")
            scores[word] = score
    return scores


@dataclass
class Lexicons:
    """Word lists backing the linguistic features; all entries lowercase."""

    tentative_words: frozenset[str]
    swear_words: frozenset[str]
    negation_words: frozenset[str]
    sentiment: dict[str, float]

    @classmethod
    def load(cls, tentative: str | Path, swear: str | Path, negation: str | Path,
             sentiment: str | Path) -> "Lexicons":
        return cls(
            tentative_words=_read_word_list(tentative),
            swear_words=_read_word_list(swear),
            negation_words=_read_word_list(negation),
            sentiment=_read_sentiment(sentiment),
        )

    @classmethod
    def bundled(cls) -> "Lexicons":
        root = resources.files("stanceprop.resources")
        with resources.as_file(root / "tentative_words.txt") as t, \
                resources.as_file(root / "swear_words.txt") as s, \
                resources.as_file(root / "negation_words.txt") as n, \
                resources.as_file(root / "sentiment_lexicon.txt") as p:
            return cls.load(t, s, n, p)


def brown_cluster_vector(msg: TokenizedMessage, cmap: BrownClusterMap) -> np.ndarray:
    """Counts of tokens per cluster; out-of-vocabulary tokens contribute nothing."""
    vec = np.zeros(cmap.cluster_count, dtype=np.float64)
    for token in msg.tokens:
        cluster = cmap.lookup(token)
        if cluster is not None:
            vec[cluster] += 1.0
    return vec


def _sentiment_score(tokens: Iterable[str], lex: Lexicons) -> float:
    matched = [lex.sentiment[t] for t in tokens if t in lex.sentiment]
    return float(np.mean(matched)) if matched else 0.0


def linguistic_vector(msg: TokenizedMessage, lex: Lexicons) -> np.ndarray:
    """Six statistics in LING_COMPONENTS order; all zero for an empty message.

    Sentiment is the mean lexicon polarity of matched tokens and is the only
    component that may be negative.
    """
    tokens = msg.tokens
    if not tokens:
        return np.zeros(len(LING_COMPONENTS), dtype=np.float64)
    mean_len = math.fsum(len(t) for t in tokens) / len(tokens)
    return np.array(
        [
            float(len(tokens)),
            mean_len,
            float(sum(t in lex.tentative_words for t in tokens)),
            float(sum(t in lex.swear_words for t in tokens)),
            float(sum(t in lex.negation_words for t in tokens)),
            _sentiment_score(tokens, lex),
        ],
        dtype=np.float64,
    )


def brown_ling_vector(msg: TokenizedMessage, cmap: BrownClusterMap, lex: Lexicons) -> np.ndarray:
    """Brown counts with the sentiment and negation components appended."""
    ling = linguistic_vector(msg, lex)
    vec = np.empty(BROWN_LING_DIM, dtype=np.float64)
    vec[:BROWN_DIM] = brown_cluster_vector(msg, cmap)
    vec[BROWN_DIM] = ling[LING_COMPONENTS.index("sentiment")]
    vec[BROWN_DIM + 1] = ling[LING_COMPONENTS.index("negation_count")]
    return vec


def _message_ngrams(tokens: Sequence[str], n_min: int, n_max: int):
    for n in range(n_min, n_max + 1):
        for i in range(len(tokens) - n + 1):
            yield tuple(tokens[i : i + n])


def ngram_features(
    rumour_messages: Sequence[TokenizedMessage], n_min: int = 2, n_max: int = 6
) -> FeatureMatrix:
    """Per-message n-gram counts over the rumour's own vocabulary.

    The vocabulary index order is fixed by first occurrence, so the matrix is
    reproducible for a given message order.  Messages shorter than ``n_min``
    tokens yield zero rows.
    """
    if not rumour_messages:
        raise DataError("ngram_features needs at least one message")
    index: dict[tuple[str, ...], int] = {}
    rows: list[int] = []
    cols: list[int] = []
    for row, msg in enumerate(rumour_messages):
        for gram in _message_ngrams(msg.tokens, n_min, n_max):
            col = index.setdefault(gram, len(index))
            rows.append(row)
            cols.append(col)
    n, m = len(rumour_messages), len(index)
    values = sp.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, max(m, 1)), dtype=np.float64
    )
    values.sum_duplicates()
    return FeatureMatrix(values, "ngrams", vocabulary=tuple(index.keys()))


def featurize(
    messages: Sequence[TokenizedMessage],
    space: str,
    cluster_map: BrownClusterMap | None = None,
    lexicons: Lexicons | None = None,
) -> FeatureMatrix:
    """Build the feature matrix for one rumour's messages."""
    if space not in FEATURE_SPACES:
        raise DataError(f"unknown feature space {space!r}; expected one of {FEATURE_SPACES}")
    if space == "ngrams":
        return ngram_features(messages)
    if space == "ling":
        if lexicons is None:
            raise DataError("feature space 'ling' needs lexicons")
        values = np.vstack([linguistic_vector(m, lexicons) for m in messages]) if messages \
            else np.zeros((0, len(LING_COMPONENTS)))
        return FeatureMatrix(values, space)
    if cluster_map is None:
        raise DataError(f"feature space {space!r} needs a Brown cluster map")
    if space == "brown":
        values = np.vstack([brown_cluster_vector(m, cluster_map) for m in messages]) if messages \
            else np.zeros((0, BROWN_DIM))
        return FeatureMatrix(values, space)
    if lexicons is None:
        raise DataError("feature space 'brown_ling' needs lexicons")
    values = np.vstack([brown_ling_vector(m, cluster_map, lexicons) for m in messages]) if messages \
        else np.zeros((0, BROWN_LING_DIM))
    return FeatureMatrix(values, space)

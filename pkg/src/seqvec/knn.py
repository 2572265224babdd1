"""Exact nearest-neighbor search and majority-vote classification.

Search is a brute-force scan: every query is scored against every index
row, so results are exact by construction. Euclidean distance is the
default metric; cosine similarity is offered because embedding norms
grow with token frequency. All tie-breaking is deterministic: equal
scores order by id, equal vote counts resolve by summed score and then
by label.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .classify import MetricSummary, stratified_folds
from .errors import ConfigError, DataError

__all__ = [
    "VectorIndex",
    "NeighborResult",
    "neighbors",
    "majority_vote",
    "knn_cross_validate",
]

METRICS = ("euclidean", "cosine")


@dataclass
class VectorIndex:
    matrix: np.ndarray
    ids: list[str]
    labels: list[str] | None = None
    metric: str = "euclidean"

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[1] < 1:
            raise ConfigError("matrix must be (N, d) with d >= 1")
        if len(self.ids) != self.matrix.shape[0]:
            raise ConfigError("one id per matrix row required")
        if len(set(self.ids)) != len(self.ids):
            raise ConfigError("ids must be unique")
        if self.labels is not None and len(self.labels) != len(self.ids):
            raise ConfigError("one label per row required when labels are given")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")

    def __len__(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class NeighborResult:
    """One retrieved neighbor; score is a distance under the Euclidean
    metric and a similarity under cosine (or an alignment score)."""

    id: str
    score: float
    rank: int


def _scores(matrix: np.ndarray, query: np.ndarray, metric: str) -> np.ndarray:
    if metric == "euclidean":
        diff = matrix - query
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(query)
    sims = matrix @ query
    # zero-norm rows have no direction; score them as orthogonal
    return np.divide(sims, norms, out=np.zeros_like(sims), where=norms > 0)


def neighbors(
    index: VectorIndex,
    query: np.ndarray,
    k: int,
    exclude_id: str | None = None,
) -> list[NeighborResult]:
    """Top-k rows by metric; exact, ties broken by smaller id.

    ``exclude_id`` removes one row (self-queries). Asking for more
    neighbors than the index holds returns everything, sorted.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    if len(index) == 0:
        raise DataError("index is empty")
    query = np.asarray(query, dtype=np.float64)
    if query.shape != (index.matrix.shape[1],):
        raise DataError(
            f"query dimension {query.shape} does not match index d={index.matrix.shape[1]}"
        )
    scores = _scores(index.matrix, query, index.metric)
    sign = 1.0 if index.metric == "euclidean" else -1.0
    order = sorted(
        (i for i in range(len(index)) if index.ids[i] != exclude_id),
        key=lambda i: (sign * scores[i], index.ids[i]),
    )
    return [
        NeighborResult(index.ids[i], float(scores[i]), rank)
        for rank, i in enumerate(order[:k], start=1)
    ]


def majority_vote(
    results: Sequence[NeighborResult],
    labels: Mapping[str, str],
    similarity: bool = False,
) -> str:
    """Most frequent label among the neighbors.

    Count ties resolve toward the smaller summed distance (larger summed
    score when ``similarity``), then toward the lexicographically smaller
    label. Every neighbor must be labeled.
    """
    if not results:
        raise DataError("cannot vote over an empty neighbor list")
    votes: dict[str, int] = {}
    sums: dict[str, float] = {}
    for r in results:
        if r.id not in labels:
            raise DataError(f"neighbor {r.id!r} has no family label")
        fam = labels[r.id]
        votes[fam] = votes.get(fam, 0) + 1
        sums[fam] = sums.get(fam, 0.0) + r.score
    top = max(votes.values())
    sign = -1.0 if similarity else 1.0
    return min(
        (fam for fam, n in votes.items() if n == top),
        key=lambda fam: (sign * sums[fam], fam),
    )


def knn_cross_validate(
    index: VectorIndex,
    folds: int,
    k_values: Sequence[int],
    seed: int = 0,
) -> dict[int, MetricSummary]:
    """Stratified cross-validated kNN accuracy for each k.

    Families with fewer members than folds are dropped (with a warning).
    Each test vector is classified by majority vote over its nearest
    training-fold neighbors; the report maps k to accuracy mean +/-
    sample std over folds.
    """
    if index.labels is None:
        raise ConfigError("index has no labels to cross-validate against")
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    if not k_values or min(k_values) < 1:
        raise ConfigError("k_values must be positive")

    labels = np.asarray(index.labels)
    fam_names, fam_counts = np.unique(labels, return_counts=True)
    dropped = [f for f, c in zip(fam_names, fam_counts) if c < folds]
    if dropped:
        warnings.warn(
            f"dropped {len(dropped)} families with fewer than {folds} members: "
            f"{', '.join(map(str, dropped[:5]))}{'...' if len(dropped) > 5 else ''}"
        )
    usable = np.isin(labels, [f for f in fam_names if f not in set(dropped)])
    if len(set(labels[usable].tolist())) < 2:
        raise DataError("need at least 2 usable families")

    rows = np.flatnonzero(usable)
    labels = labels[rows]
    matrix = index.matrix[rows]
    ids = np.asarray(index.ids, dtype=object)[rows]

    fold_of = stratified_folds(labels, folds, np.random.default_rng([seed]))
    maxk = max(k_values)
    correct = {k: np.zeros(folds) for k in k_values}
    for f in range(folds):
        test = fold_of == f
        train = ~test
        train_ids = ids[train]
        train_labels = labels[train]
        label_map = dict(zip(train_ids.tolist(), train_labels.tolist()))
        sign = 1.0 if index.metric == "euclidean" else -1.0
        for row in np.flatnonzero(test):
            scores = _scores(matrix[train], matrix[row], index.metric)
            order = np.lexsort((train_ids, sign * scores))[:maxk]
            ranked = [
                NeighborResult(train_ids[i], float(scores[i]), rank)
                for rank, i in enumerate(order, start=1)
            ]
            for k in k_values:
                pred = majority_vote(
                    ranked[:k], label_map, similarity=index.metric == "cosine"
                )
                correct[k][f] += pred == labels[row]
        n_test = int(test.sum())
        for k in k_values:
            correct[k][f] /= n_test

    out = {}
    for k in k_values:
        acc = correct[k]
        out[k] = MetricSummary(float(acc.mean()),
                               float(acc.std(ddof=1)) if folds > 1 else 0.0)
    return out

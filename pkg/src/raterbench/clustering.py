"""Agglomerative clustering of the agreement methods against the benchmark.

Feature vectors ("profiles") are per-setting Monte Carlo mean estimates, one
coordinate per sweep setting, with the benchmark K included as an eleventh
profile holding its exact per-setting values. Distances are Euclidean across
settings; merging uses the unweighted pair-group average recurrence
(new distance = size-weighted mean of the members' distances) with ties
broken toward the lowest (row, column) index pair, so dendrograms are fully
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .estimators import MethodId

__all__ = [
    "MethodProfile",
    "Dendrogram",
    "BENCHMARK_LABEL",
    "profiles_from_results",
    "distance_matrix",
    "agglomerate",
    "cut",
    "newick",
]

BENCHMARK_LABEL = "K"


class MethodProfile(NamedTuple):
    """One clustering leaf: a label and its per-setting value vector."""

    label: str
    values: np.ndarray


@dataclass(frozen=True)
class Dendrogram:
    """Merge history of the agglomeration.

    ``merges`` lists (left, right, height, new_id) in merge order; ids below
    ``len(labels)`` are leaves, higher ids refer to earlier merges. Heights
    are nondecreasing (average linkage cannot invert).
    """

    labels: Tuple[str, ...]
    merges: Tuple[Tuple[int, int, float, int], ...]


def profiles_from_results(rows) -> Tuple[List[MethodProfile], int]:
    """Clustering profiles from sweep rows: the ten methods plus K.

    Per-setting means are recovered as ``true_k + bias``. Settings where K or
    any method's bias is undefined are dropped from every profile; returns
    (profiles, dropped_setting_count).
    """
    bias_columns = [f"{method.label}_bias" for method in MethodId]
    kept_rows = [
        row
        for row in rows
        if math.isfinite(row["true_k"])
        and all(math.isfinite(row[col]) for col in bias_columns)
    ]
    dropped = len(rows) - len(kept_rows)
    if not kept_rows:
        raise ValueError("no settings with fully defined means to cluster")
    k_values = np.array([row["true_k"] for row in kept_rows])
    profiles = [
        MethodProfile(
            method.label,
            k_values + np.array([row[col] for row in kept_rows]),
        )
        for method, col in zip(MethodId, bias_columns)
    ]
    profiles.append(MethodProfile(BENCHMARK_LABEL, k_values))
    return profiles, dropped


def distance_matrix(profiles: Sequence[MethodProfile]) -> np.ndarray:
    """Symmetric matrix of Euclidean distances between profiles."""
    if len(profiles) < 2:
        raise ValueError("need at least two profiles")
    length = len(profiles[0].values)
    if any(len(p.values) != length for p in profiles):
        raise ValueError("profiles must have equal lengths")
    stacked = np.stack([np.asarray(p.values, dtype=float) for p in profiles])
    diff = stacked[:, np.newaxis, :] - stacked[np.newaxis, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def agglomerate(
    distances: np.ndarray, labels: Optional[Sequence[str]] = None
) -> Dendrogram:
    """Average-linkage agglomeration of a distance matrix."""
    d = np.asarray(distances, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least two items")
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    elif len(labels) != n:
        raise ValueError("labels must match the matrix size")

    pair_dist: Dict[Tuple[int, int], float] = {
        (i, j): float(d[i, j]) for i in range(n) for j in range(i + 1, n)
    }
    size = {i: 1 for i in range(n)}
    active = list(range(n))
    merges = []
    next_id = n
    last_height = -math.inf
    while len(active) > 1:
        best: Optional[Tuple[int, int]] = None
        best_dist = math.inf
        for i_pos in range(len(active)):
            for j_pos in range(i_pos + 1, len(active)):
                pair = (active[i_pos], active[j_pos])
                value = pair_dist[pair]
                # strict < keeps the lowest (row, col) pair on ties
                if value < best_dist:
                    best_dist = value
                    best = pair
        left, right = best
        # average linkage is reducible, so inversions beyond float rounding
        # mean corrupted input
        if best_dist < last_height - 1e-12:
            raise ValueError("merge heights decreased; linkage inverted")
        last_height = best_dist
        merged = next_id
        next_id += 1
        for other in active:
            if other == left or other == right:
                continue
            d_left = pair_dist[(min(left, other), max(left, other))]
            d_right = pair_dist[(min(right, other), max(right, other))]
            weight = size[left] + size[right]
            pair_dist[(other, merged)] = (
                size[left] * d_left + size[right] * d_right
            ) / weight
        size[merged] = size[left] + size[right]
        active = [x for x in active if x not in (left, right)] + [merged]
        merges.append((left, right, best_dist, merged))
    return Dendrogram(tuple(labels), tuple(merges))


def cut(dendrogram: Dendrogram, k: int) -> List[List[str]]:
    """Partition the leaves into ``k`` clusters by dropping the top merges.

    Clusters are returned with their labels in leaf order, ordered by each
    cluster's lowest leaf index.
    """
    n = len(dendrogram.labels)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k!r}")
    members: Dict[int, List[int]] = {i: [i] for i in range(n)}
    for left, right, _, merged in dendrogram.merges[: n - k]:
        members[merged] = members.pop(left) + members.pop(right)
    clusters = [sorted(leaves) for leaves in members.values()]
    clusters.sort(key=lambda leaves: leaves[0])
    return [[dendrogram.labels[i] for i in leaves] for leaves in clusters]


def newick(dendrogram: Dendrogram) -> str:
    """Ultrametric Newick rendering with leaf depth = final height / 2."""
    heights = {i: 0.0 for i in range(len(dendrogram.labels))}
    children = {}
    for left, right, height, merged in dendrogram.merges:
        heights[merged] = height
        children[merged] = (left, right)

    def render(node: int, parent_height: float) -> str:
        branch = (parent_height - heights[node]) / 2.0
        if node in children:
            left, right = children[node]
            inner = f"({render(left, heights[node])},{render(right, heights[node])})"
            return f"{inner}:{branch!r}"
        return f"{dendrogram.labels[node]}:{branch!r}"

    if not dendrogram.merges:
        raise ValueError("dendrogram has no merges")
    root = dendrogram.merges[-1][3]
    left, right = children[root]
    root_height = heights[root]
    return f"({render(left, root_height)},{render(right, root_height)});"

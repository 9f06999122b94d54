"""Brute-force agglomerative clustering oracle.

Recomputes every cluster-pair distance from the raw vectors at every step
(no caching, no reuse of the engine's distance matrix) and replays the
merge sequence.  Kept deliberately plain so it can be checked by eye.
"""

from __future__ import annotations

import math
from typing import Sequence


def oracle_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na2 = sum(x * x for x in a)
    nb2 = sum(y * y for y in b)
    if na2 == 0.0 and nb2 == 0.0:
        return 0.0
    if na2 == 0.0 or nb2 == 0.0:
        return 1.0
    return 1.0 - dot / math.sqrt(na2 * nb2)


def oracle_cluster(vectors: Sequence[Sequence[float]], linkage: str, k: int):
    """Returns (merges, partition) in the engine's shape: merges are
    (a_id, b_id, distance, new_id) with leaves 0..n-1, and the partition is
    the sorted list of sorted member lists present at k clusters."""
    n = len(vectors)
    clusters: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = []
    next_id = n
    partition = None
    if len(clusters) == k:
        partition = sorted((sorted(m) for m in clusters.values()), key=lambda c: c[0])

    def cluster_distance(members_a: list[int], members_b: list[int]) -> float:
        pair_distances = [
            oracle_cosine(vectors[i], vectors[j])
            for i in sorted(members_a)
            for j in sorted(members_b)
        ]
        if linkage == "single":
            return min(pair_distances)
        return sum(pair_distances) / len(pair_distances)

    while len(clusters) > 1:
        best_pair = None
        best_distance = math.inf
        ids = sorted(clusters)
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                a, b = ids[x], ids[y]
                d = cluster_distance(clusters[a], clusters[b])
                if d < best_distance:
                    best_distance = d
                    best_pair = (a, b)
        a, b = best_pair
        merged = sorted(clusters.pop(a) + clusters.pop(b))
        clusters[next_id] = merged
        merges.append((a, b, best_distance, next_id))
        next_id += 1
        if len(clusters) == k:
            partition = sorted((sorted(m) for m in clusters.values()), key=lambda c: c[0])

    return merges, partition

"""Keyword extraction and hierarchical clustering of input text.

Raw text becomes co-occurrence keyword vectors, which agglomerative
clustering (cosine distance, single or average linkage) groups into
weighted theme concepts.  Everything here is deterministic; the only
optional nondeterminism is a text backend phrasing the theme string.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Optional, Sequence

from .backends import TextClient, theme_request, text_complete
from .errors import BadK, EmptyInput
from .scene import ThemeConcept, round6

TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class ExtractionConfig:
    min_freq: int = 1
    max_keywords: int = 40
    window: int = 8


@dataclass(frozen=True)
class KeywordVector:
    keyword: str
    vector: tuple[float, ...]
    frequency: int


class Merge(NamedTuple):
    cluster_a: int
    cluster_b: int
    distance: float
    new_cluster: int


@dataclass(frozen=True)
class Dendrogram:
    merges: tuple[Merge, ...]
    leaf_count: int


def _load_stopwords() -> frozenset[str]:
    text = resources.files("semanticdraw.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


STOPWORDS = _load_stopwords()


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, punctuation stripped."""
    return TOKEN_RE.findall(text.lower())


def extract_keywords(text: str, config: ExtractionConfig = ExtractionConfig()) -> list[KeywordVector]:
    """Stopword-filtered keywords with window co-occurrence vectors.

    Keywords are capped at `max_keywords` by descending frequency then
    lexicographic order; vectors span the full document vocabulary
    (every distinct kept token), counting co-occurrences at distance
    < `window` in the filtered token stream.
    """
    stream = [t for t in tokenize(text) if t not in STOPWORDS]
    if not stream:
        raise EmptyInput("no keywords survive filtering")

    freq: dict[str, int] = {}
    for tok in stream:
        freq[tok] = freq.get(tok, 0) + 1

    vocab = sorted(freq)
    index = {tok: i for i, tok in enumerate(vocab)}

    cooc: dict[str, list[int]] = {tok: [0] * len(vocab) for tok in vocab}
    for i, tok in enumerate(stream):
        lo = max(0, i - (config.window - 1))
        hi = min(len(stream), i + config.window)
        row = cooc[tok]
        for j in range(lo, hi):
            if j != i:
                row[index[stream[j]]] += 1

    kept = [tok for tok in vocab if freq[tok] >= config.min_freq]
    if not kept:
        raise EmptyInput(f"no keyword reaches min_freq={config.min_freq}")
    kept.sort(key=lambda tok: (-freq[tok], tok))
    kept = kept[: config.max_keywords]

    return [
        KeywordVector(keyword=tok, vector=tuple(float(c) for c in cooc[tok]), frequency=freq[tok])
        for tok in kept
    ]


def cosine_distance(a: Sequence[float], b: Sequence[float]) -> float:
    """1 - cosine similarity; zero-norm vectors are treated as maximally
    distant from everything except another zero-norm vector."""
    dot = sum(x * y for x, y in zip(a, b))
    na2 = sum(x * x for x in a)
    nb2 = sum(y * y for y in b)
    if na2 == 0.0 and nb2 == 0.0:
        return 0.0
    if na2 == 0.0 or nb2 == 0.0:
        return 1.0
    return 1.0 - dot / math.sqrt(na2 * nb2)


def _linkage_distance(members_a: Sequence[int], members_b: Sequence[int],
                      dist: list[list[float]], linkage: str) -> float:
    if linkage == "single":
        return min(dist[i][j] for i in members_a for j in members_b)
    total = sum(dist[i][j] for i in members_a for j in members_b)
    return total / (len(members_a) * len(members_b))


def cluster(
    keywords: Sequence[KeywordVector],
    linkage: str = "average",
    k: Optional[int] = None,
) -> tuple[Dendrogram, list[list[int]]]:
    """Agglomerative clustering under cosine distance.

    Returns the full dendrogram plus the partition obtained by cutting
    at `k` clusters (default min(5, n)), as sorted leaf-index lists.
    Ties in minimum distance break toward the smallest (id_a, id_b)
    pair; leaves are ids 0..n-1, merged clusters n, n+1, ...
    """
    if linkage not in ("single", "average"):
        raise ValueError(f"unknown linkage {linkage!r}")
    n = len(keywords)
    if k is None:
        k = min(5, n)
    if not (1 <= k <= n):
        raise BadK(f"k={k} outside 1..{n}")

    dist = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = cosine_distance(keywords[i].vector, keywords[j].vector)
            dist[i][j] = d
            dist[j][i] = d

    active: dict[int, tuple[int, ...]] = {i: (i,) for i in range(n)}
    merges: list[Merge] = []
    next_id = n
    partition: Optional[list[list[int]]] = None
    if len(active) == k:
        partition = [sorted(m) for m in active.values()]

    while len(active) > 1:
        best: Optional[tuple[int, int]] = None
        best_d = math.inf
        ids = sorted(active)
        for ai in range(len(ids)):
            for bi in range(ai + 1, len(ids)):
                a, b = ids[ai], ids[bi]
                d = _linkage_distance(active[a], active[b], dist, linkage)
                if d < best_d:
                    best_d = d
                    best = (a, b)
        assert best is not None
        a, b = best
        merged = tuple(sorted(active.pop(a) + active.pop(b)))
        active[next_id] = merged
        merges.append(Merge(a, b, best_d, next_id))
        next_id += 1
        if len(active) == k:
            partition = sorted(([sorted(m) for m in active.values()]), key=lambda c: c[0])

    if merges:
        dists = [m.distance for m in merges]
        assert all(dists[i + 1] >= dists[i] - 1e-9 for i in range(len(dists) - 1)), \
            "merge distances must be non-decreasing"

    assert partition is not None
    partition = sorted((sorted(c) for c in partition), key=lambda c: c[0])
    return Dendrogram(tuple(merges), n), partition


def normalize_weights(values: Sequence[float]) -> tuple[float, ...]:
    """Normalize to sum 1.0 on the 6dp grid, pushing the residue onto the
    largest entry so serialization cannot break the sum invariant."""
    total = sum(values)
    if total <= 0:
        raise ValueError("weights must have positive total")
    rounded = [round6(v / total) for v in values]
    heaviest = max(range(len(values)), key=lambda i: (values[i], -i))
    residue = 1.0 - (sum(rounded) - rounded[heaviest])
    rounded[heaviest] = round6(residue)
    return tuple(rounded)


def derive_theme(
    clusters: Sequence[Sequence[KeywordVector]],
    text: str = "",
    backend: Optional[TextClient] = None,
) -> tuple[str, list[ThemeConcept]]:
    """One weighted concept per cluster, plus a theme string.

    Labels are the highest-frequency keyword of each cluster; weights
    are proportional to total cluster frequency.  The theme string is
    backend-phrased when a client is given, otherwise the top-3 labels
    joined by " and ".
    """
    if not clusters:
        raise ValueError("clusters must be non-empty")

    raw: list[tuple[str, tuple[str, ...], int]] = []
    for members in clusters:
        ordered = sorted(members, key=lambda kv: (-kv.frequency, kv.keyword))
        label = ordered[0].keyword
        keywords = tuple(sorted(kv.keyword for kv in members))
        total = sum(kv.frequency for kv in members)
        raw.append((label, keywords, total))

    # Canonical cluster order before normalization so the rounding residue
    # lands on the same concept regardless of input order.
    raw.sort(key=lambda t: (-t[2], t[0], t[1]))
    weights = normalize_weights([t[2] for t in raw])
    concepts = [
        ThemeConcept(label=label, keywords=keywords, weight=w)
        for (label, keywords, _), w in zip(raw, weights)
    ]
    concepts.sort(key=lambda c: (-c.weight, c.label))

    labels = [c.label for c in concepts[:3]]
    fallback = " and ".join(labels)
    if backend is None:
        return fallback, concepts
    response = text_complete(backend, theme_request(labels, text))
    theme = response.text.strip()
    return (theme or fallback), concepts

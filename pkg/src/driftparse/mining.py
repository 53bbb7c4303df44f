"""Position-agnostic frequent-pattern mining over preprocessed log lines.

A cluster is an unordered set of tokens that co-occur in many lines.  Token
order within a line is deliberately ignored so that field reordering across
software versions does not split clusters.  Numeric and value tokens are
eligible cluster members: a value that happens to be near-constant (for
example "off") can and will be mined into a cluster, which restricts the
resulting pattern to lines carrying that value.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .preprocess import TokenSequence


@dataclass(frozen=True)
class PatternCluster:
    """An unordered token set plus the number of lines supporting it."""

    tokens: frozenset[str]
    support: int

    def sort_key(self) -> tuple:
        return (-self.support, sorted(self.tokens))


@dataclass(frozen=True)
class MiningConfig:
    """Mining knobs.

    threshold is both the frequent-token cutoff and the cluster support
    cutoff; by convention it is the number of ground-truth KPI rows for
    the training window.  containment_support switches candidate support
    from exact-subset equality to subset containment.
    """

    threshold: int
    expected_kpi_count: int = 1
    containment_support: bool = False

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.expected_kpi_count < 1:
            raise ValueError("expected_kpi_count must be >= 1")


@dataclass(frozen=True)
class ClusterSelection:
    """Reduction result; shortfall is set when fewer clusters existed than requested."""

    clusters: tuple[PatternCluster, ...]
    requested: int
    shortfall: bool


def count_token_frequencies(corpus: list[TokenSequence]) -> Counter:
    """Count, per token, the number of lines containing it at least once."""
    counts = Counter()
    for line in corpus:
        counts.update(line.token_set())
    return counts


def find_frequent_tokens(freqs: Counter, threshold: int) -> frozenset[str]:
    """Tokens whose line count meets the threshold."""
    if threshold < 1:
        raise ValueError("threshold must be >= 1")
    return frozenset(token for token, count in freqs.items() if count >= threshold)


def build_cluster_candidates(
    corpus: list[TokenSequence],
    frequent: frozenset[str],
    containment_support: bool = False,
) -> list[PatternCluster]:
    """One candidate per distinct frequent-token subset seen in a line.

    Support counts lines whose frequent subset equals the candidate's token
    set (default), or contains it when containment_support is on.  Lines
    sharing no token with the frequent set contribute nothing.
    """
    subset_counts = Counter()
    for line in corpus:
        subset = line.token_set() & frequent
        if subset:
            subset_counts[subset] += 1
    if not containment_support:
        return [PatternCluster(frozenset(s), n) for s, n in subset_counts.items()]
    candidates = []
    for subset in subset_counts:
        support = sum(n for other, n in subset_counts.items() if subset <= other)
        candidates.append(PatternCluster(frozenset(subset), support))
    return candidates


def select_clusters(candidates: list[PatternCluster], threshold: int) -> list[PatternCluster]:
    """Keep candidates at or above the support threshold.

    Sorted by support descending; ties broken by the lexicographically
    smallest rendering of the token set.
    """
    kept = [c for c in candidates if c.support >= threshold]
    return sorted(kept, key=PatternCluster.sort_key)


def reduce_to_kpi_clusters(clusters: list[PatternCluster], expected_kpi_count: int) -> ClusterSelection:
    """Top clusters by support, one per expected KPI."""
    if expected_kpi_count < 1:
        raise ValueError("expected_kpi_count must be >= 1")
    ordered = sorted(clusters, key=PatternCluster.sort_key)
    chosen = tuple(ordered[:expected_kpi_count])
    return ClusterSelection(chosen, expected_kpi_count, len(chosen) < expected_kpi_count)


def mine_clusters(corpus: list[TokenSequence], config: MiningConfig) -> ClusterSelection:
    """Full mining pass: frequencies -> frequent tokens -> candidates -> selection."""
    freqs = count_token_frequencies(corpus)
    frequent = find_frequent_tokens(freqs, config.threshold)
    if not frequent:
        return ClusterSelection((), config.expected_kpi_count, True)
    candidates = build_cluster_candidates(corpus, frequent, config.containment_support)
    selected = select_clusters(candidates, config.threshold)
    return reduce_to_kpi_clusters(selected, config.expected_kpi_count)

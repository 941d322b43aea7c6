"""Optimal-matching distances, average-linkage clustering and n-gram motifs."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np
from numba import njit
from scipy.stats import binom

from ._io import fmt, write_csv
from .errors import ConfigError, EmptyInput, InvalidInput


class Normalization(str, enum.Enum):
    NONE = "none"
    BY_LONGER_LENGTH = "by_longer_length"


@dataclass(frozen=True)
class CostScheme:
    substitution: float = 2.0
    indel: float = 1.0
    normalization: Normalization = Normalization.BY_LONGER_LENGTH

    def __post_init__(self) -> None:
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if self.substitution <= 0 or self.indel <= 0:
            raise ConfigError("costs must be positive")
        if self.substitution > 2 * self.indel:
            raise ConfigError("substitution must not exceed two indels")


@njit(cache=True)
def _om_dp(a, b, sub, indel):
    m, n = a.shape[0], b.shape[0]
    prev = np.empty(n + 1)
    cur = np.empty(n + 1)
    for j in range(n + 1):
        prev[j] = j * indel
    for i in range(1, m + 1):
        cur[0] = i * indel
        ai = a[i - 1]
        for j in range(1, n + 1):
            best = prev[j - 1] + (0.0 if ai == b[j - 1] else sub)
            x = prev[j] + indel
            if x < best:
                best = x
            x = cur[j - 1] + indel
            if x < best:
                best = x
            cur[j] = best
        prev, cur = cur, prev
    return prev[n]


def _as_codes(seqs: Sequence[Sequence[Hashable]]) -> list[np.ndarray]:
    table: dict = {}
    return [np.array([table.setdefault(s, len(table)) for s in seq], dtype=np.int64) for seq in seqs]


def om_distance(a: Sequence[Hashable], b: Sequence[Hashable], scheme: CostScheme = CostScheme()) -> float:
    """Minimal insert/delete/substitute cost between two symbol sequences."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyInput("om_distance needs non-empty sequences")
    ca, cb = _as_codes([a, b])
    d = float(_om_dp(ca, cb, float(scheme.substitution), float(scheme.indel)))
    if scheme.normalization is Normalization.BY_LONGER_LENGTH:
        d /= scheme.indel * max(len(a), len(b))
    return d


def distance_matrix(seqs: Sequence[Sequence[Hashable]], scheme: CostScheme = CostScheme()) -> np.ndarray:
    if any(len(s) == 0 for s in seqs):
        raise EmptyInput("om_distance needs non-empty sequences")
    codes = _as_codes(seqs)
    n = len(codes)
    out = np.zeros((n, n))
    sub, indel = float(scheme.substitution), float(scheme.indel)
    for i in range(n):
        for j in range(i + 1, n):
            d = _om_dp(codes[i], codes[j], sub, indel)
            if scheme.normalization is Normalization.BY_LONGER_LENGTH:
                d /= indel * max(len(codes[i]), len(codes[j]))
            out[i, j] = out[j, i] = d
    return out


@dataclass
class Clustering:
    labels: np.ndarray
    merges: list[tuple[int, int, float, int]]  # (kept id, absorbed id, linkage distance, new size)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def members(self) -> list[list[int]]:
        return [np.flatnonzero(self.labels == c).tolist() for c in range(self.n_clusters)]


def cluster_users(dist: np.ndarray, k: int) -> Clustering:
    """Average-linkage agglomeration stopped at ``k`` clusters.

    Clusters are identified by their lowest member index; ties in linkage
    distance merge the lexicographically smallest (i, j) pair. Labels are
    numbered by each cluster's lowest member.
    """
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise InvalidInput("distance matrix must be square")
    n = dist.shape[0]
    if not np.allclose(dist, dist.T, rtol=0, atol=1e-12):
        raise InvalidInput("distance matrix is not symmetric")
    if np.any(np.diag(dist) != 0):
        raise InvalidInput("distance matrix must have a zero diagonal")
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in 1..{n}")
    work = dist.copy()
    np.fill_diagonal(work, np.inf)
    size = np.ones(n)
    active = np.ones(n, dtype=bool)
    owner = np.arange(n)
    merges = []
    for _ in range(n - k):
        idx = np.flatnonzero(active)
        sub = np.where(np.triu(np.ones((len(idx), len(idx)), dtype=bool), 1), work[np.ix_(idx, idx)], np.inf)
        flat = int(np.argmin(sub))  # first minimum in row-major order = smallest (i, j)
        a, b = idx[flat // len(idx)], idx[flat % len(idx)]
        d = work[a, b]
        row = (size[a] * work[a] + size[b] * work[b]) / (size[a] + size[b])
        work[a, :] = row
        work[:, a] = row
        work[a, a] = np.inf
        work[b, :] = np.inf
        work[:, b] = np.inf
        size[a] += size[b]
        active[b] = False
        owner[owner == b] = a
        merges.append((int(a), int(b), float(d), int(size[a])))
    _, labels = np.unique(owner, return_inverse=True)
    return Clustering(labels.astype(np.int64), merges)


@dataclass(frozen=True)
class MotifRow:
    ngram: tuple
    observed: int
    expected: float
    p_value: float
    adjusted_p: float
    significant: bool

    @property
    def order(self) -> int:
        return len(self.ngram)


@dataclass
class MotifTable:
    rows: list[MotifRow]
    alpha: float
    slots: dict[int, int] = field(default_factory=dict)

    def significant(self) -> list[MotifRow]:
        return [r for r in self.rows if r.significant]

    def by_order(self, n: int) -> list[MotifRow]:
        return [r for r in self.rows if r.order == n]

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ["order", "subsequence", "observed", "expected", "p_value", "adjusted_p", "significant"],
            ([r.order, " -> ".join(map(str, r.ngram)), r.observed, fmt(r.expected), fmt(r.p_value),
              fmt(r.adjusted_p), int(r.significant)] for r in self.rows),
        )


def count_ngrams(sequences: Sequence[Sequence[Hashable]], n: int) -> Counter:
    counts: Counter = Counter()
    for seq in sequences:
        seq = list(seq)
        for i in range(len(seq) - n + 1):
            counts[tuple(seq[i:i + n])] += 1
    return counts


def mine_motifs(
    sequences: Sequence[Sequence[Hashable]], orders: Sequence[int] = (2, 3, 4), alpha: float = 1e-4
) -> MotifTable:
    """Contiguous within-user n-grams tested against a product-of-marginals null.

    Expected count = slots * prod(symbol frequencies); the p-value is the
    one-sided exact binomial tail P(X >= observed). Bonferroni correction
    runs over the distinct observed n-grams of each order.
    """
    if any(n < 2 for n in orders):
        raise ConfigError("motif order must be >= 2")
    unigrams = Counter(s for seq in sequences for s in seq)
    total = sum(unigrams.values())
    freq = {s: c / total for s, c in unigrams.items()} if total else {}
    rows: list[MotifRow] = []
    slots: dict[int, int] = {}
    for n in sorted(set(orders)):
        counts = count_ngrams(sequences, n)
        n_slots = sum(max(0, len(seq) - n + 1) for seq in sequences)
        slots[n] = n_slots
        tests = len(counts)
        for gram, obs in counts.items():
            prob = float(np.prod([freq[s] for s in gram]))
            p = float(binom.sf(obs - 1, n_slots, prob))
            adj = min(1.0, p * tests)
            rows.append(MotifRow(gram, obs, n_slots * prob, p, adj, adj < alpha))
    rows.sort(key=lambda r: (-r.observed, r.order, tuple(map(str, r.ngram))))
    return MotifTable(rows, alpha, slots)

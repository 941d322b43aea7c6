"""Weighted transition networks, centralities and CNM communities."""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from ._io import fmt, write_csv, write_text
from .errors import EmptyGraph
from .model import LexiconMode, platform_order, symbols_of


@dataclass
class TransitionGraph:
    nodes: list[str]
    weights: dict[tuple[str, str], int]
    platform: dict[str, str] = field(default_factory=dict)

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())

    def matrix(self) -> np.ndarray:
        """Directed count matrix in ``nodes`` order."""
        index = {v: i for i, v in enumerate(self.nodes)}
        W = np.zeros((len(self.nodes), len(self.nodes)))
        for (a, b), w in self.weights.items():
            W[index[a], index[b]] += w
        return W

    def to_edge_csv(self, path) -> None:
        write_csv(path, ["src", "dst", "weight"], ([a, b, w] for (a, b), w in sorted(self.weights.items())))

    def to_dot(self, path=None, communities: Sequence[Iterable[str]] | None = None) -> str:
        group = {}
        for ci, members in enumerate(communities or []):
            for m in members:
                group[m] = ci
        lines = ["digraph transitions {"]
        for v in self.nodes:
            attrs = [f'label="{_esc(v)}"', f'platform="{_esc(self.platform.get(v, ""))}"']
            if v in group:
                attrs.append(f"community={group[v]}")
            lines.append(f'  "{_esc(v)}" [{", ".join(attrs)}];')
        for (a, b), w in sorted(self.weights.items()):
            lines.append(f'  "{_esc(a)}" -> "{_esc(b)}" [weight={w}, label="{w}"];')
        lines.append("}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            write_text(path, text)
        return text


def _esc(s: str) -> str:
    return str(s).replace("\\", "\\\\").replace('"', '\\"')


def build_graph(sequences: Iterable, level: LexiconMode | str = LexiconMode.PLATFORM_ACTIVITY) -> TransitionGraph:
    """Count consecutive pairs within each sequence; no pairs across users."""
    counts: Counter = Counter()
    seen: set = set()
    for item in sequences:
        syms = symbols_of(item, level)
        seen.update(syms)
        counts.update(zip(syms, syms[1:]))
    nodes = sorted(seen, key=lambda v: (platform_order(str(v).split("_", 1)[0]), str(v)))
    return TransitionGraph(nodes, dict(counts), {v: str(v).split("_", 1)[0] for v in nodes})


@dataclass(frozen=True)
class NodeCentrality:
    in_strength: float
    out_strength: float
    closeness: float
    closeness_kind: str  # "closeness", or "harmonic" when some node is unreachable
    reachable: int


def _dijkstra(adj: dict[Hashable, list[tuple[Hashable, float]]], src) -> dict:
    dist = {src: 0.0}
    heap = [(0.0, 0, src)]
    tick = 1
    while heap:
        d, _, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v, length in adj.get(u, ()):
            nd = d + length
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, tick, v))
                tick += 1
    return dist


def shortest_paths(graph: TransitionGraph) -> dict[str, dict[str, float]]:
    """Directed all-pairs distances with edge length 1/weight."""
    adj: dict = {}
    for (a, b), w in sorted(graph.weights.items()):
        if a != b:
            adj.setdefault(a, []).append((b, 1.0 / w))
    return {v: _dijkstra(adj, v) for v in graph.nodes}


def centralities(graph: TransitionGraph) -> dict[str, NodeCentrality]:
    """Weighted in/out strength and outward closeness.

    Closeness of v is (n-1) / sum of distances from v. If some node cannot be
    reached from v, the harmonic form sum(1/d) / (n-1) over reachable nodes is
    reported instead and flagged.
    """
    if not graph.nodes:
        raise EmptyGraph("graph has no nodes")
    ins: Counter = Counter()
    outs: Counter = Counter()
    for (a, b), w in graph.weights.items():
        outs[a] += w
        ins[b] += w
    n = len(graph.nodes)
    dists = shortest_paths(graph)
    out = {}
    for v in graph.nodes:
        others = {u: d for u, d in dists[v].items() if u != v}
        if n == 1:
            clo, kind = 0.0, "closeness"
        elif len(others) == n - 1:
            clo, kind = (n - 1) / sum(others.values()), "closeness"
        else:
            clo, kind = sum(1.0 / d for d in others.values()) / (n - 1), "harmonic"
        out[v] = NodeCentrality(float(ins[v]), float(outs[v]), clo, kind, len(others))
    return out


def symmetrize(graph: TransitionGraph) -> np.ndarray:
    """Undirected weights W = D + D^T (a self-loop's diagonal entry is twice its count)."""
    D = graph.matrix()
    return D + D.T


def modularity(W: np.ndarray, labels: Sequence[int]) -> float:
    """Newman modularity of a partition of an undirected weighted graph."""
    W = np.asarray(W, dtype=float)
    labels = np.asarray(labels)
    two_m = W.sum()
    k = W.sum(axis=1)
    same = labels[:, None] == labels[None, :]
    return float(((W - np.outer(k, k) / two_m) * same).sum() / two_m)


@dataclass
class Communities:
    nodes: list[str]
    labels: np.ndarray
    modularity: float
    merges: list[tuple[int, int, float]] = field(default_factory=list)

    def partition(self) -> list[list[str]]:
        return [[self.nodes[i] for i in np.flatnonzero(self.labels == c)] for c in range(int(self.labels.max()) + 1)]


def communities(graph: TransitionGraph) -> Communities:
    """Clauset-Newman-Moore greedy agglomeration on the symmetrized graph.

    Starting from singletons, repeatedly join the pair of connected
    communities with the largest modularity gain dQ = 2 (e_ij - a_i a_j);
    stop when no join has positive gain. Ties go to the smallest (i, j).
    """
    if not graph.weights:
        raise EmptyGraph("graph has no edges")
    W = symmetrize(graph)
    n = W.shape[0]
    two_m = W.sum()
    e = W / two_m  # e[i, j] for i != j is half the fraction of edge ends joining i and j
    a = e.sum(axis=1)
    active = np.ones(n, dtype=bool)
    owner = np.arange(n)
    merges = []
    while active.sum() > 1:
        idx = np.flatnonzero(active)
        sub = e[np.ix_(idx, idx)]
        gain = 2 * (sub - np.outer(a[idx], a[idx]))
        upper = np.triu(np.ones_like(sub, dtype=bool), 1) & (sub > 0)
        if not upper.any():
            break
        gain = np.where(upper, gain, -np.inf)
        flat = int(np.argmax(gain))
        dq = gain.flat[flat]
        if dq <= 0:
            break
        i, j = idx[flat // len(idx)], idx[flat % len(idx)]
        e[i, :] += e[j, :]
        e[:, i] += e[:, j]
        e[j, :] = 0.0
        e[:, j] = 0.0
        a[i] += a[j]
        a[j] = 0.0
        active[j] = False
        owner[owner == j] = i
        merges.append((int(i), int(j), float(dq)))
    _, labels = np.unique(owner, return_inverse=True)
    return Communities(list(graph.nodes), labels.astype(np.int64), modularity(W, labels), merges)

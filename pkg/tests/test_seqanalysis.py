import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from traceseq.errors import ConfigError, EmptyInput, InvalidInput
from traceseq.seqanalysis import (CostScheme, Normalization, cluster_users, count_ngrams, distance_matrix,
                                  mine_motifs, om_distance)

RAW = CostScheme(normalization=Normalization.NONE)


def alignment_oracle(a, b, sub=2.0, indel=1.0):
    """Minimum over every monotone pairing of positions; unpaired positions cost one indel each."""
    best = math.inf
    for k in range(min(len(a), len(b)) + 1):
        for ia in itertools.combinations(range(len(a)), k):
            for ib in itertools.combinations(range(len(b)), k):
                cost = sum(0.0 if a[i] == b[j] else sub for i, j in zip(ia, ib))
                best = min(best, cost + indel * (len(a) + len(b) - 2 * k))
    return best


def test_trivial_distances():
    assert om_distance("ABCA", "ABCA") == 0
    assert om_distance("AB", "AC", RAW) == 2
    assert om_distance("AB", "AC") == 1.0  # 2 / (1 * 2)
    with pytest.raises(EmptyInput):
        om_distance("", "A")


def test_dp_equals_exhaustive_alignment_search():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = "".join(rng.choice(list("ABC"), size=rng.integers(1, 9)))
        b = "".join(rng.choice(list("ABC"), size=rng.integers(1, 9)))
        assert om_distance(a, b, RAW) == alignment_oracle(a, b)


def test_distance_matrix_matches_pairwise():
    seqs = ["ABCA", "BBA", "C", "ACCA", "AB"]
    D = distance_matrix(seqs)
    for i, j in itertools.product(range(5), repeat=2):
        assert D[i, j] == (0.0 if i == j else om_distance(seqs[i], seqs[j]))


words = st.text(alphabet="ABCD", min_size=1, max_size=10)


@given(words, words, words)
def test_unnormalized_distance_is_a_metric(a, b, c):
    d = lambda x, y: om_distance(x, y, RAW)
    assert d(a, b) == d(b, a) >= 0
    assert (d(a, b) == 0) == (a == b)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


@given(words, words)
def test_normalized_distance_is_a_bounded_semimetric(a, b):
    d = om_distance(a, b)
    assert d == om_distance(b, a)
    assert 0 <= d <= 2.0
    assert (d == 0) == (a == b)


def test_normalized_distance_breaks_triangle_inequality():
    # dividing by the longer length is not a metric: A -> AB -> B
    assert om_distance("A", "B") > om_distance("A", "AB") + om_distance("AB", "B")


def test_cost_scheme_validation():
    with pytest.raises(ConfigError):
        CostScheme(substitution=3.0, indel=1.0)
    with pytest.raises(ConfigError):
        CostScheme(indel=0.0)


def naive_average_linkage(D, k):
    """Recompute every cluster-pair mean distance from scratch after each merge."""
    clusters = [[i] for i in range(len(D))]
    merges = []
    while len(clusters) > k:
        best = None
        for x, y in itertools.combinations(range(len(clusters)), 2):
            d = np.mean([D[i, j] for i in clusters[x] for j in clusters[y]])
            key = (d, min(clusters[x]), min(clusters[y]))
            if best is None or key < best[0]:
                best = (key, x, y)
        (d, a, b), x, y = best
        clusters[x] = sorted(clusters[x] + clusters[y])
        del clusters[y]
        merges.append((a, b, d, len(clusters[x])))
    return sorted(clusters), merges


def test_eight_point_hand_traced_linkage():
    x = np.array([0, 1, 4, 5, 20, 22, 40, 41], dtype=float)
    D = np.abs(x[:, None] - x[None, :])
    res = cluster_users(D, 1)
    expected = [(0, 1, 1.0, 2), (2, 3, 1.0, 2), (6, 7, 1.0, 2), (4, 5, 2.0, 2),
                (0, 2, 4.0, 4), (0, 4, 18.5, 6), (0, 6, 382 / 12, 8)]
    assert [(a, b, s) for a, b, _, s in res.merges] == [(a, b, s) for a, b, _, s in expected]
    assert np.allclose([m[2] for m in res.merges], [m[2] for m in expected], rtol=0, atol=1e-12)
    assert cluster_users(D, 4).members() == [[0, 1], [2, 3], [4, 5], [6, 7]]
    assert cluster_users(D, 3).members() == [[0, 1, 2, 3], [4, 5], [6, 7]]


@pytest.mark.parametrize("seed", range(5))
def test_linkage_matches_naive_oracle_and_scipy(seed):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(14, 3))
    D = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    for k in (1, 3, 6):
        res = cluster_users(D, k)
        clusters, merges = naive_average_linkage(D, k)
        assert res.members() == clusters
        assert [(a, b, s) for a, b, _, s in res.merges] == [(a, b, s) for a, b, _, s in merges]
        ref = fcluster(linkage(squareform(D), "average"), k, "maxclust")
        groups = defaultdict(list)
        for i, g in enumerate(ref):
            groups[g].append(i)
        assert sorted(groups.values()) == clusters


def test_two_blobs_and_singletons():
    D = np.full((6, 6), 10.0)
    D[:3, :3] = D[3:, 3:] = 0.1
    np.fill_diagonal(D, 0)
    assert cluster_users(D, 2).members() == [[0, 1, 2], [3, 4, 5]]
    assert cluster_users(D, 6).labels.tolist() == list(range(6))


@given(st.integers(2, 12), st.data())
def test_clustering_is_a_partition(n, data):
    k = data.draw(st.integers(1, n))
    rng = np.random.default_rng(data.draw(st.integers(0, 1000)))
    D = rng.random((n, n))
    D = D + D.T
    np.fill_diagonal(D, 0)
    labels = cluster_users(D, k).labels
    assert sorted(set(labels.tolist())) == list(range(k))


def test_cluster_input_validation():
    D = np.array([[0, 1], [2, 0]], dtype=float)
    with pytest.raises(InvalidInput):
        cluster_users(D, 1)
    with pytest.raises(InvalidInput):
        cluster_users(np.ones((2, 3)), 1)
    with pytest.raises(InvalidInput):
        cluster_users(np.ones((2, 2)), 1)
    with pytest.raises(ConfigError):
        cluster_users(np.zeros((2, 2)), 3)


def brute_ngrams(sequences, n):
    out = {}
    for seq in sequences:
        s = list(seq)
        for start in range(len(s)):
            if start + n <= len(s):
                key = "\x1f".join(s[start:start + n])
                out[key] = out.get(key, 0) + 1
    return {tuple(k.split("\x1f")): v for k, v in out.items()}


def binom_tail(k, n, p):
    return sum(math.comb(n, i) * p**i * (1 - p) ** (n - i) for i in range(k, n + 1))


def test_motif_counts_match_brute_force_on_50_sessions():
    rng = np.random.default_rng(2)
    symbols = ["IG_likes", "FB_searches", "TT_watch", "YT_watch"]
    sessions = [[symbols[j] for j in rng.integers(0, 4, size=rng.integers(2, 12))] for _ in range(50)]
    table = mine_motifs(sessions)
    for n in (2, 3, 4):
        want = brute_ngrams(sessions, n)
        got = {r.ngram: r.observed for r in table.by_order(n)}
        assert got == want
        assert table.slots[n] == sum(max(0, len(s) - n + 1) for s in sessions)


def test_motif_statistics():
    seqs = [list("ABABABABAB"), list("ABCABC")]
    table = mine_motifs(seqs, orders=(2,), alpha=0.05)
    freq = {"A": 7 / 16, "B": 7 / 16, "C": 2 / 16}
    tests = len(table.rows)
    for r in table.rows:
        p = freq[r.ngram[0]] * freq[r.ngram[1]]
        assert r.expected == pytest.approx(14 * p)
        assert r.p_value == pytest.approx(binom_tail(r.observed, 14, p), rel=1e-9)
        assert r.adjusted_p == pytest.approx(min(1.0, r.p_value * tests))
        assert r.significant == (r.adjusted_p < 0.05)
    obs = [r.observed for r in table.rows]
    assert obs == sorted(obs, reverse=True)


def test_self_repeats_count():
    assert count_ngrams([list("XXX")], 2) == {("X", "X"): 2}
    with pytest.raises(ConfigError):
        mine_motifs([list("XY")], orders=(1,))


@given(st.lists(st.lists(st.sampled_from("ABC"), min_size=1, max_size=15), min_size=1, max_size=8),
       st.randoms(use_true_random=False))
def test_motif_counts_ignore_user_order(seqs, rnd):
    shuffled = list(seqs)
    rnd.shuffle(shuffled)
    a, b = mine_motifs(seqs), mine_motifs(shuffled)
    assert {r.ngram: r.observed for r in a.rows} == {r.ngram: r.observed for r in b.rows}


def test_null_calibration_on_uniform_symbols():
    clean = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        corpus = [list(rng.choice(list("ABCDE"), size=1000)) for _ in range(10)]
        clean += not mine_motifs(corpus).significant()
    assert clean >= 19

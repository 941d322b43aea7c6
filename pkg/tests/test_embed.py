import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from sklearn.metrics import silhouette_score

from traceseq.embed import (EmbeddingSpace, SgnsConfig, cosine, load_text, pca, project_2d, radius_of_gyration,
                            sequence_tokens, sgns_grad, sgns_loss, synthetic_word, token_entropy, train,
                            trajectory_metrics)
from traceseq.errors import ConfigError, EmptyTrajectory, NotInVocabulary
from traceseq.model import Event
from traceseq.synth import desk_config, generate

SMALL = SgnsConfig(dim=16, epochs=8, min_count=1, seed=3)


def test_synthetic_word_construction():
    assert synthetic_word("YouTube", "searches", "lofi beats") == "YouTube_searches_lofi beats"
    assert synthetic_word("TikTok", "likes") == "TikTok_likes"
    assert synthetic_word("TikTok", "likes", "x" * 300) == "TikTok_likes_" + "x" * 120
    e = Event("u", 0, "YouTube", "searches", "cats")
    assert sequence_tokens([e, e]) == ["YouTube_searches_cats"] * 2


@given(st.sets(st.tuples(st.sampled_from(["Facebook", "TikTok"]), st.sampled_from(["likes", "watch"]),
                         st.none() | st.text(alphabet="abc _", min_size=1, max_size=6))))
def test_tokens_injective_on_underscore_free_platforms_and_activities(triples):
    tokens = {synthetic_word(*t) for t in triples}
    assert len(tokens) == len(triples)


def finite_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def test_gradient_matches_finite_differences_on_50_triples():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        d, k = int(rng.integers(3, 12)), int(rng.integers(1, 6))
        v, up, un = rng.normal(size=d), rng.normal(size=d), rng.normal(size=(k, d))
        gv, gp, gn = sgns_grad(v, up, un)
        nv = finite_difference(lambda x: sgns_loss(x, up, un), v)
        npos = finite_difference(lambda x: sgns_loss(v, x, un), up)
        nneg = finite_difference(lambda x: sgns_loss(v, up, x), un)
        for a, n in ((gv, nv), (gp, npos), (gn, nneg)):
            worst = max(worst, np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-12))
    assert worst <= 1e-5


def cooccurrence_corpus(seed=0, n=400):
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n):
        if rng.random() < 0.5:
            corpus.append(list(rng.permutation(["X", "Y", "a", "b"])))
        else:
            corpus.append(list(rng.permutation(["Z", "c", "d", "e"])))
    return corpus


def test_cooccurring_tokens_end_up_closer():
    space = train(cooccurrence_corpus(), SMALL)
    assert space.cosine("X", "Y") > space.cosine("X", "Z")


def test_identical_context_tokens_are_mutual_top_neighbours():
    rng = np.random.default_rng(1)
    corpus = []
    for _ in range(600):
        twin = "P" if rng.random() < 0.5 else "Q"
        if rng.random() < 0.5:
            corpus.append([str(x) for x in rng.permutation(["c1", "c2", twin])])
        else:
            corpus.append([str(x) for x in rng.permutation(["d1", "d2", "d3"])])
    space = train(corpus, SgnsConfig(dim=16, epochs=10, min_count=1, seed=0))
    assert space.neighbors("P", 1)[0][0] == "Q"
    assert space.neighbors("Q", 1)[0][0] == "P"


def test_neighbour_queries():
    space = train(cooccurrence_corpus(), SMALL)
    assert space.neighbors("X", 0) == []
    everything = space.neighbors("X", 100)
    assert sorted(t for t, _ in everything) == sorted(t for t in space.vocab if t != "X")
    sims = [s for _, s in everything]
    assert sims == sorted(sims, reverse=True)
    with pytest.raises(NotInVocabulary):
        space.neighbors("nope", 3)


def test_neighbour_ties_break_by_token():
    vecs = np.array([[1.0, 0], [0.5, 0.5], [0.5, 0.5], [0, 1.0]])
    space = EmbeddingSpace(["q", "b", "a", "z"], np.ones(4), vecs, vecs)
    assert [t for t, _ in space.neighbors("q", 3)] == ["a", "b", "z"]


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=8))
def test_self_cosine_is_one(v):
    v = np.array(v)
    if np.linalg.norm(v) > 1e-6:
        assert cosine(v, v) == pytest.approx(1.0)


def test_training_is_deterministic_finite_and_loss_drops():
    corpus = cooccurrence_corpus(2)
    a, b = train(corpus, SMALL), train(corpus, SMALL)
    assert np.array_equal(a.vectors, b.vectors)
    assert np.all(np.isfinite(a.vectors)) and np.all(np.isfinite(a.context_vectors))
    assert a.vocab == sorted(a.vocab, key=lambda t: (-a.counts[a.vocab.index(t)], t))
    h = a.loss_history
    assert len(h) == SMALL.epochs + 1
    assert h[-1] < h[0]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_heldout_loss_falls_every_epoch_on_trace_corpus(seed):
    corpus = [sequence_tokens(s) for s in generate(desk_config(40, 300, seed=seed))]
    h = train(corpus, SgnsConfig(seed=seed)).loss_history
    assert all(y < x for x, y in zip(h, h[1:]))


def test_min_count_filters_and_empty_vocabulary():
    corpus = [["a", "a", "a", "a", "a", "b"], ["a", "c"]]
    space = train(corpus, SgnsConfig(dim=4, min_count=1, seed=0, epochs=1))
    assert space.vocab == ["a", "b", "c"]
    with pytest.raises(ConfigError):
        train(corpus, SgnsConfig(dim=4, min_count=10))


def test_text_export_round_trip(tmp_path):
    corpus = [["YouTube_searches_lofi beats", "TikTok_likes", "100%_x"]] * 3
    space = train(corpus, SgnsConfig(dim=5, min_count=1, seed=0, epochs=1))
    space.save_text(tmp_path / "v.txt")
    first = (tmp_path / "v.txt").read_text().splitlines()[0]
    assert first == "3 5"
    tokens, vecs = load_text(tmp_path / "v.txt")
    assert tokens == space.vocab
    assert np.array_equal(vecs, space.vectors)


def space_with(tokens, vectors):
    v = np.asarray(vectors, dtype=float)
    return EmbeddingSpace(list(tokens), np.ones(len(tokens)), v, v)


def test_trajectory_examples():
    sp = space_with("abcd", np.eye(4))
    assert trajectory_metrics(sp, list("abcd")).entropy == pytest.approx(2.0)
    one = trajectory_metrics(sp, ["a"] * 5)
    assert one.entropy == 0 and one.radius_of_gyration == 0
    sp2 = space_with("xy", [[0.0, 0.0], [3.0, 4.0]])
    assert trajectory_metrics(sp2, ["x", "y"]).radius_of_gyration == pytest.approx(2.5)
    t = trajectory_metrics(sp, ["a", "oov", "b"], "u1")
    assert (t.n_tokens, t.n_dropped, t.user_id) == (2, 1, "u1")
    with pytest.raises(EmptyTrajectory):
        trajectory_metrics(sp, ["oov"])


@given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=40))
def test_entropy_bounded_by_log_distinct(tokens):
    h = token_entropy(tokens)
    distinct = len(set(tokens))
    assert 0 <= h <= np.log2(distinct) + 1e-12
    counts = [tokens.count(t) for t in set(tokens)]
    if len(set(counts)) == 1:
        assert h == pytest.approx(np.log2(distinct))
    else:
        assert h < np.log2(distinct) - 1e-12


@given(st.integers(1, 20), st.integers(0, 1000), st.floats(-100, 100))
def test_radius_translation_invariant(n, seed, shift):
    pts = np.random.default_rng(seed).normal(size=(n, 3))
    assert radius_of_gyration(pts + shift) == pytest.approx(radius_of_gyration(pts), abs=1e-9)


def test_pca_on_collinear_points():
    rng = np.random.default_rng(0)
    direction = rng.normal(size=10)
    X = rng.normal(size=(30, 1)) * direction + 5.0
    Y = pca(X)
    assert np.var(Y[:, 1]) == pytest.approx(0.0, abs=1e-20)
    assert np.var(Y[:, 0]) > 0
    assert np.array_equal(pca(X), Y)


def test_tsne_separates_three_clusters():
    rng = np.random.default_rng(0)
    X = np.vstack([rng.normal(loc=c, size=(40, 100)) for c in (0.0, 6.0, 12.0)])
    Y = project_2d(X, "tsne", seed=0)
    assert Y.shape == (120, 2) and np.all(np.isfinite(Y))
    assert silhouette_score(Y, np.repeat([0, 1, 2], 40)) > 0.5
    assert np.array_equal(project_2d(X, "tsne", seed=0), Y)


def test_projection_small_inputs():
    X = np.random.default_rng(0).normal(size=(3, 5))
    with pytest.warns(UserWarning):
        Y = project_2d(X, "tsne")
    assert np.array_equal(Y, pca(X))
    with pytest.raises(ConfigError):
        project_2d(X[:2], "pca")
    with pytest.raises(ConfigError):
        project_2d(X, "umap")
    Y = project_2d(np.random.default_rng(1).normal(size=(6, 5)), "tsne", n_iter=300)
    assert Y.shape == (6, 2) and np.all(np.isfinite(Y))

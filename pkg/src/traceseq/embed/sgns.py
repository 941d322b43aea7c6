"""Skip-gram with negative sampling, trained by plain per-pair SGD."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

from .._io import atomic_open
from ..errors import ConfigError, NotInVocabulary

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SgnsConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 0.025 * 1e-4
    min_count: int = 5
    noise_power: float = 0.75
    seed: int = 0
    heldout_pairs: int = 1000


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sgns_loss(v: np.ndarray, u_pos: np.ndarray, u_neg: np.ndarray) -> float:
    """-log s(u_pos . v) - sum_k log s(-u_neg[k] . v)."""
    return float(-np.log(_sigmoid(u_pos @ v)) - np.log(_sigmoid(-(u_neg @ v))).sum())


def sgns_grad(v: np.ndarray, u_pos: np.ndarray, u_neg: np.ndarray):
    """Analytic gradients of :func:`sgns_loss` w.r.t. (v, u_pos, u_neg)."""
    gp = _sigmoid(u_pos @ v) - 1.0
    gn = _sigmoid(u_neg @ v)
    return gp * u_pos + gn @ u_neg, gp * v, gn[:, None] * v[None, :]


@njit(cache=True)
def _sgd_pair(w_in, w_out, center, context, negs, lr, grad_v):
    """One SGD step on the loss of (center, context, negs); updates in place."""
    d = w_in.shape[1]
    for k in range(d):
        grad_v[k] = 0.0
    for n in range(negs.shape[0] + 1):
        if n == 0:
            target, label = context, 1.0
        else:
            target, label = negs[n - 1], 0.0
        dot = 0.0
        for k in range(d):
            dot += w_in[center, k] * w_out[target, k]
        # g = -(dL/d dot)
        g = (label - 1.0 / (1.0 + np.exp(-dot))) * lr
        for k in range(d):
            grad_v[k] += g * w_out[target, k]
            w_out[target, k] += g * w_in[center, k]
    for k in range(d):
        w_in[center, k] += grad_v[k]


@dataclass
class EmbeddingSpace:
    vocab: list[str]
    counts: np.ndarray
    vectors: np.ndarray  # input vectors, V x d
    context_vectors: np.ndarray
    config: SgnsConfig = field(default_factory=SgnsConfig)
    loss_history: list[float] = field(default_factory=list)  # held-out loss before training, then per epoch

    def __post_init__(self) -> None:
        self.index = {t: i for i, t in enumerate(self.vocab)}

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __len__(self) -> int:
        return len(self.vocab)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, token: str) -> np.ndarray:
        try:
            return self.vectors[self.index[token]]
        except KeyError:
            raise NotInVocabulary(token) from None

    def cosine(self, a: str, b: str) -> float:
        return cosine(self.vector(a), self.vector(b))

    def neighbors(self, token: str, k: int = 10) -> list[tuple[str, float]]:
        """Top-k by cosine, excluding the query; ties ordered by token."""
        q = self.vector(token)
        if k <= 0:
            return []
        norms = np.linalg.norm(self.vectors, axis=1) * np.linalg.norm(q)
        with np.errstate(invalid="ignore", divide="ignore"):
            sims = np.where(norms > 0, self.vectors @ q / norms, 0.0)
        ranked = sorted(((float(s), t) for t, s in zip(self.vocab, sims) if t != token), key=lambda x: (-x[0], x[1]))
        return [(t, s) for s, t in ranked[:k]]

    def save_text(self, path) -> None:
        """``V d`` header, then one token and d floats per line (whitespace in tokens escaped)."""
        with atomic_open(path) as fh:
            fh.write(f"{len(self.vocab)} {self.dim}\n")
            for t, v in zip(self.vocab, self.vectors):
                fh.write(escape_token(t) + " " + " ".join(repr(float(x)) for x in v) + "\n")


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(a @ b / (na * nb))


def escape_token(t: str) -> str:
    return t.replace("%", "%25").replace(" ", "%20").replace("\t", "%09").replace("\n", "%0A")


def unescape_token(t: str) -> str:
    return t.replace("%0A", "\n").replace("%09", "\t").replace("%20", " ").replace("%25", "%")


def load_text(path) -> tuple[list[str], np.ndarray]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    v, d = map(int, lines[0].split())
    tokens, rows = [], []
    for line in lines[1: v + 1]:
        parts = line.split(" ")
        tokens.append(unescape_token(parts[0]))
        rows.append([float(x) for x in parts[1: d + 1]])
    return tokens, np.array(rows)


def build_vocab(sentences: Sequence[Sequence[str]], min_count: int) -> tuple[list[str], np.ndarray]:
    counts = Counter(str(t) for s in sentences for t in s)
    kept = sorted((t for t, c in counts.items() if c >= min_count), key=lambda t: (-counts[t], t))
    return kept, np.array([counts[t] for t in kept], dtype=np.int64)


def _heldout(corpus_sents, cum_noise, cfg: SgnsConfig):
    rng = np.random.default_rng([cfg.seed, 1])
    pairs = []
    eligible = [s for s in corpus_sents if len(s) > 1]
    if not eligible:
        return None
    for _ in range(cfg.heldout_pairs):
        s = eligible[int(rng.integers(len(eligible)))]
        i = int(rng.integers(len(s)))
        lo, hi = max(0, i - cfg.window), min(len(s), i + cfg.window + 1)
        j = int(rng.choice([x for x in range(lo, hi) if x != i]))
        negs = np.searchsorted(cum_noise, rng.random(cfg.negatives) * cum_noise[-1], side="right")
        pairs.append((int(s[i]), int(s[j]), negs))
    return pairs


def mean_loss(space_in: np.ndarray, space_out: np.ndarray, batch) -> float:
    return float(np.mean([sgns_loss(space_in[c], space_out[o], space_out[n]) for c, o, n in batch]))


def train(sentences: Sequence[Sequence[str]], config: SgnsConfig = SgnsConfig()) -> EmbeddingSpace:
    """Fit SGNS vectors. Single-threaded and deterministic for a fixed seed."""
    cfg = config
    if cfg.dim < 1 or cfg.window < 1 or cfg.negatives < 1 or cfg.epochs < 1:
        raise ConfigError("dim, window, negatives and epochs must be positive")
    vocab, counts = build_vocab(sentences, cfg.min_count)
    if len(vocab) < 2:
        raise ConfigError(f"vocabulary has {len(vocab)} tokens after min_count={cfg.min_count}")
    index = {t: i for i, t in enumerate(vocab)}
    sents = [np.array([index[str(t)] for t in s if str(t) in index], dtype=np.int64) for s in sentences]
    sents = [s for s in sents if len(s)]
    corpus = np.concatenate(sents)
    lengths = np.array([len(s) for s in sents], dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(np.int64)
    cum_noise = np.cumsum(counts.astype(float) ** cfg.noise_power)

    rng = np.random.default_rng(cfg.seed)
    w_in = (rng.random((len(vocab), cfg.dim)) - 0.5) / cfg.dim
    w_out = np.zeros((len(vocab), cfg.dim))
    batch = _heldout(sents, cum_noise, cfg)
    history = [mean_loss(w_in, w_out, batch)] if batch is not None else []
    for epoch in range(cfg.epochs):
        # learning rate decays linearly over all epochs, not per epoch
        _train_epoch(w_in, w_out, corpus, starts, lengths, cum_noise, cfg, epoch)
        if batch is not None:
            history.append(mean_loss(w_in, w_out, batch))
            log.debug("epoch %d heldout loss %.5f", epoch, history[-1])
    return EmbeddingSpace(vocab, counts, w_in, w_out, cfg, history)


def _train_epoch(w_in, w_out, corpus, starts, lengths, cum_noise, cfg: SgnsConfig, epoch: int):
    total = int(lengths.sum())
    _train_span(w_in, w_out, corpus, starts, lengths, cum_noise, cfg.window, cfg.negatives, cfg.learning_rate,
                cfg.min_learning_rate, cfg.seed * 1_000_003 + epoch, epoch * total, cfg.epochs * total)


@njit(cache=True)
def _train_span(w_in, w_out, corpus, starts, lengths, cum_noise, window, negatives, lr0, lr_min, seed, done,
                total_all):
    np.random.seed(seed)
    grad_v = np.empty(w_in.shape[1])
    negs = np.empty(negatives, dtype=np.int64)
    for s in range(starts.shape[0]):
        a = starts[s]
        L = lengths[s]
        for i in range(L):
            lr = lr0 * (1.0 - done / (total_all + 1.0))
            if lr < lr_min:
                lr = lr_min
            done += 1
            center = corpus[a + i]
            lo = max(0, i - window)
            hi = min(L, i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                context = corpus[a + j]
                n = 0
                while n < negatives:
                    cand = np.searchsorted(cum_noise, np.random.random() * cum_noise[-1], side="right")
                    if cand == context:
                        if cum_noise.shape[0] < 2:
                            break
                        continue
                    negs[n] = cand
                    n += 1
                _sgd_pair(w_in, w_out, center, context, negs[:n], lr, grad_v)

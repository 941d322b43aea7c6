"""Multinomial hidden Markov models: Baum-Welch, AIC/BIC selection, Viterbi."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numba import njit

from ._io import fmt, write_csv, write_text
from .errors import ConfigError, EmptyInput, InvalidInput

log = logging.getLogger(__name__)

EMISSION_SMOOTHING = 1e-10


@dataclass
class HmmModel:
    startprob: np.ndarray  # (K,)
    transmat: np.ndarray  # (K, K) row-stochastic
    emissionprob: np.ndarray  # (K, M) row-stochastic
    loglik: float = float("nan")
    history: list[float] = field(default_factory=list)
    n_obs: int = 0
    converged: bool = False
    restart: int = 0

    @property
    def n_states(self) -> int:
        return self.startprob.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.emissionprob.shape[1]

    def permute(self, order: Sequence[int]) -> "HmmModel":
        o = np.asarray(order)
        return HmmModel(self.startprob[o], self.transmat[np.ix_(o, o)], self.emissionprob[o], self.loglik,
                        list(self.history), self.n_obs, self.converged, self.restart)

    def to_dict(self, labels: Sequence[str] | None = None) -> dict:
        return {
            "n_states": self.n_states,
            "n_symbols": self.n_symbols,
            "startprob": self.startprob.tolist(),
            "transmat": self.transmat.tolist(),
            "emissionprob": self.emissionprob.tolist(),
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "converged": self.converged,
            "lexicon": list(labels) if labels is not None else None,
        }

    def to_json(self, path, labels: Sequence[str] | None = None) -> None:
        write_text(path, json.dumps(self.to_dict(labels), indent=2) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "HmmModel":
        return cls(np.array(d["startprob"]), np.array(d["transmat"]), np.array(d["emissionprob"]),
                   d.get("loglik", float("nan")), n_obs=d.get("n_obs", 0), converged=d.get("converged", False))


def n_parameters(k: int, m: int) -> int:
    return k * (k - 1) + k * (m - 1) + (k - 1)


class _Batch:
    """Sequences concatenated into one array with offsets."""

    def __init__(self, sequences: Sequence[np.ndarray]):
        self.lengths = np.array([len(s) for s in sequences], dtype=np.int64)
        self.starts = np.concatenate([[0], np.cumsum(self.lengths)[:-1]]).astype(np.int64)
        self.obs = np.concatenate(sequences).astype(np.int64)
        self.total = int(self.lengths.sum())


@njit(cache=True)
def _forward_backward(obs, starts, lengths, pi, A, Bt):
    """Scaled forward-backward summed over sequences.

    ``Bt`` is the emission matrix transposed (M x K). Returns log-likelihood,
    expected transition counts, expected emission counts (M x K) and summed
    initial-state posteriors.
    """
    M, K = Bt.shape
    xi = np.zeros((K, K))
    emit = np.zeros((M, K))
    g0 = np.zeros(K)
    loglik = 0.0
    Tmax = 0
    for s in range(lengths.shape[0]):
        Tmax = max(Tmax, lengths[s])
    alpha = np.empty((Tmax, K))
    inv = np.empty(Tmax)
    beta = np.empty(K)
    nxt = np.empty(K)
    for s in range(starts.shape[0]):
        o = obs[starts[s]:starts[s] + lengths[s]]
        T = o.shape[0]
        c = 0.0
        for k in range(K):
            alpha[0, k] = pi[k] * Bt[o[0], k]
            c += alpha[0, k]
        inv[0] = 1.0 / c
        loglik += np.log(c)
        for k in range(K):
            alpha[0, k] *= inv[0]
        for t in range(1, T):
            for j in range(K):
                alpha[t, j] = 0.0
            for i in range(K):
                ai = alpha[t - 1, i]
                for j in range(K):
                    alpha[t, j] += ai * A[i, j]
            c = 0.0
            for j in range(K):
                alpha[t, j] *= Bt[o[t], j]
                c += alpha[t, j]
            inv[t] = 1.0 / c
            loglik += np.log(c)
            for j in range(K):
                alpha[t, j] *= inv[t]
        for k in range(K):
            beta[k] = 1.0
            emit[o[T - 1], k] += alpha[T - 1, k]
        if T == 1:
            for k in range(K):
                g0[k] += alpha[0, k]
        for t in range(T - 2, -1, -1):
            for j in range(K):
                nxt[j] = Bt[o[t + 1], j] * beta[j] * inv[t + 1]
            for i in range(K):
                acc = 0.0
                ai = alpha[t, i]
                for j in range(K):
                    w = A[i, j] * nxt[j]
                    xi[i, j] += ai * w
                    acc += w
                beta[i] = acc
            for k in range(K):
                g = alpha[t, k] * beta[k]
                emit[o[t], k] += g
                if t == 0:
                    g0[k] += g
    return loglik, xi, emit, g0


def _e_step(batch: _Batch, pi, A, B):
    ll, xi, emit, g0 = _forward_backward(batch.obs, batch.starts, batch.lengths, pi, A, np.ascontiguousarray(B.T))
    return ll, xi, emit.T, g0


def _m_step(xi, emit, g0, A_prev):
    pi = g0 / g0.sum()
    rows = xi.sum(axis=1, keepdims=True)
    A = np.where(rows > 0, xi / np.where(rows > 0, rows, 1.0), A_prev)
    emit = emit + EMISSION_SMOOTHING
    B = emit / emit.sum(axis=1, keepdims=True)
    return pi, A, B


def _validate(sequences, n_symbols) -> list[np.ndarray]:
    seqs = [np.asarray(s, dtype=np.int64) for s in sequences]
    seqs = [s for s in seqs if s.size]
    if not seqs:
        raise EmptyInput("no non-empty sequences")
    lo = min(int(s.min()) for s in seqs)
    hi = max(int(s.max()) for s in seqs)
    if lo < 0 or (n_symbols is not None and hi >= n_symbols):
        raise InvalidInput("symbol outside the alphabet")
    return seqs


def baum_welch(sequences, pi, A, B, tol: float = 1e-6, max_iter: int = 500) -> HmmModel:
    """EM from a given start. ``history[i]`` is the log-likelihood of iterate ``i``."""
    seqs = _validate(sequences, B.shape[1])
    batch = _Batch(seqs)
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        ll, xi, emit, g0 = _e_step(batch, pi, A, B)
        if history and ll - history[-1] < tol:
            history.append(ll)
            converged = True
            break
        history.append(ll)
        pi, A, B = _m_step(xi, emit, g0, A)
    else:
        ll = _e_step(batch, pi, A, B)[0]
        history.append(ll)
    return HmmModel(pi, A, B, history[-1], history, batch.total, converged)


def random_start(k: int, m: int, rng: np.random.Generator):
    pi = rng.dirichlet(np.ones(k))
    A = rng.dirichlet(np.ones(k), size=k)
    B = rng.dirichlet(np.ones(m), size=k)
    return pi, A, B


def fit(sequences, n_states: int, n_symbols: int | None = None, seed: int = 0, restarts: int = 5,
        tol: float = 1e-6, max_iter: int = 500) -> HmmModel:
    """Best of ``restarts`` Dirichlet(1) initializations (ties -> lowest restart)."""
    seqs = _validate(sequences, n_symbols)
    if n_symbols is None:
        n_symbols = max(int(s.max()) for s in seqs) + 1
    total = sum(len(s) for s in seqs)
    if n_states < 1:
        raise ConfigError("n_states must be >= 1")
    if n_states > total:
        raise ConfigError(f"n_states={n_states} exceeds the {total} observations")
    best: HmmModel | None = None
    for r in range(max(1, restarts)):
        rng = np.random.default_rng([seed, n_states, r])
        model = baum_welch(seqs, *random_start(n_states, n_symbols, rng), tol=tol, max_iter=max_iter)
        model.restart = r
        log.debug("K=%d restart %d: loglik %.4f after %d iterations", n_states, r, model.loglik,
                  len(model.history))
        if best is None or model.loglik > best.loglik:
            best = model
    assert best is not None
    return best


def loglikelihood(model: HmmModel, sequences) -> float:
    seqs = _validate(sequences, model.n_symbols)
    return _e_step(_Batch(seqs), model.startprob, model.transmat, model.emissionprob)[0]


@dataclass
class SelectionRow:
    k: int
    loglik: float
    n_params: int
    aic: float
    bic: float


@dataclass
class Selection:
    rows: list[SelectionRow]
    chosen: int
    aic_choice: int
    models: dict[int, HmmModel] = field(default_factory=dict, repr=False)

    @property
    def disagreement(self) -> bool:
        return self.chosen != self.aic_choice

    def to_csv(self, path) -> None:
        write_csv(path, ["K", "loglik", "n_params", "AIC", "BIC"],
                  ([r.k, fmt(r.loglik), r.n_params, fmt(r.aic), fmt(r.bic)] for r in self.rows))


def select_states(sequences, k_values: Sequence[int], n_symbols: int | None = None, seed: int = 0,
                  restarts: int = 5, tol: float = 1e-6, max_iter: int = 500) -> Selection:
    """Fit each K; BIC picks, AIC is reported alongside."""
    k_values = list(k_values)
    if not k_values:
        raise ConfigError("empty K range")
    seqs = _validate(sequences, n_symbols)
    if n_symbols is None:
        n_symbols = max(int(s.max()) for s in seqs) + 1
    n = sum(len(s) for s in seqs)
    rows, models = [], {}
    for k in k_values:
        model = fit(seqs, k, n_symbols, seed, restarts, tol, max_iter)
        p = n_parameters(k, n_symbols)
        rows.append(SelectionRow(k, model.loglik, p, -2 * model.loglik + 2 * p, -2 * model.loglik + p * math.log(n)))
        models[k] = model
    chosen = min(rows, key=lambda r: (r.bic, r.k)).k
    aic_choice = min(rows, key=lambda r: (r.aic, r.k)).k
    if chosen != aic_choice:
        log.warning("AIC prefers K=%d, BIC prefers K=%d; using BIC", aic_choice, chosen)
    return Selection(rows, chosen, aic_choice, models)


def decode(model: HmmModel, sequence) -> np.ndarray:
    """Viterbi path in log space."""
    obs = np.asarray(sequence, dtype=np.int64)
    if obs.size == 0:
        return np.zeros(0, dtype=np.int64)
    if obs.min() < 0 or obs.max() >= model.n_symbols:
        raise InvalidInput("symbol outside the model alphabet")
    with np.errstate(divide="ignore"):
        lpi, lA, lB = np.log(model.startprob), np.log(model.transmat), np.log(model.emissionprob)
    T, K = obs.size, model.n_states
    delta = lpi + lB[:, obs[0]]
    back = np.zeros((T, K), dtype=np.int64)
    for t in range(1, T):
        cand = delta[:, None] + lA
        back[t] = np.argmax(cand, axis=0)
        delta = cand[back[t], np.arange(K)] + lB[:, obs[t]]
    path = np.empty(T, dtype=np.int64)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def sample(model: HmmModel, lengths: Sequence[int], rng: np.random.Generator) -> list[np.ndarray]:
    """Draw observation sequences (used by recovery experiments)."""
    K, M = model.n_states, model.n_symbols
    out = []
    for L in lengths:
        s = rng.choice(K, p=model.startprob)
        seq = np.empty(L, dtype=np.int64)
        for t in range(L):
            seq[t] = rng.choice(M, p=model.emissionprob[s])
            s = rng.choice(K, p=model.transmat[s])
        out.append(seq)
    return out

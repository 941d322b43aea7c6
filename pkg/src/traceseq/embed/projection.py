"""Two-dimensional projections: PCA and exact t-SNE."""

from __future__ import annotations

import logging
import warnings

import numpy as np

from ..errors import ConfigError

log = logging.getLogger(__name__)


def pca(X: np.ndarray, n_components: int = 2) -> np.ndarray:
    """Scores on the top principal components, signs fixed so each axis's largest loading is positive."""
    X = np.asarray(X, dtype=float)
    centred = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(centred, full_matrices=False)
    vt = vt[:n_components]
    signs = np.sign(vt[np.arange(vt.shape[0]), np.argmax(np.abs(vt), axis=1)])
    signs[signs == 0] = 1.0
    scores = centred @ (vt * signs[:, None]).T
    if scores.shape[1] < n_components:
        scores = np.hstack([scores, np.zeros((scores.shape[0], n_components - scores.shape[1]))])
    return scores


def _conditional_p(D: np.ndarray, perplexity: float, tol: float = 1e-5, max_steps: int = 100) -> np.ndarray:
    """Row-wise Gaussian affinities whose entropy matches log(perplexity) (binary search on precision)."""
    n = D.shape[0]
    target = np.log(perplexity)
    P = np.zeros((n, n))
    for i in range(n):
        d = np.delete(D[i], i)
        d = d - d.min()
        beta, lo, hi = 1.0, -np.inf, np.inf
        for _ in range(max_steps):
            p = np.exp(-d * beta)
            s = p.sum()
            H = np.log(s) + beta * (d * p).sum() / s
            if abs(H - target) < tol:
                break
            if H > target:
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = beta / 2 if lo == -np.inf else (beta + lo) / 2
        P[i, np.arange(n) != i] = p / s
    return P


def tsne(
    X: np.ndarray,
    perplexity: float = 30.0,
    n_iter: int = 1000,
    early_exaggeration: float = 12.0,
    exaggeration_iters: int = 250,
    learning_rate: float | None = None,
    seed: int = 0,
    init: str = "pca",
) -> np.ndarray:
    """Exact O(n^2) t-SNE with momentum and per-parameter gains.

    ``learning_rate=None`` uses max(n / early_exaggeration / 4, 50).
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if perplexity >= n:
        raise ConfigError(f"perplexity {perplexity} too large for {n} points")
    sq = (X**2).sum(axis=1)
    D = np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0)
    P = _conditional_p(D, perplexity)
    P = (P + P.T) / (2 * n)
    P = np.maximum(P, 1e-12)
    if init == "pca":
        Y = pca(X, 2)
        Y = Y / (np.std(Y[:, 0]) or 1.0) * 1e-4
    else:
        Y = np.random.default_rng(seed).normal(scale=1e-4, size=(n, 2))
    lr = learning_rate if learning_rate is not None else max(n / early_exaggeration / 4, 50.0)
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    for it in range(n_iter):
        exag = early_exaggeration if it < exaggeration_iters else 1.0
        momentum = 0.5 if it < exaggeration_iters else 0.8
        sy = (Y**2).sum(axis=1)
        num = 1.0 / (1.0 + np.maximum(sy[:, None] + sy[None, :] - 2 * Y @ Y.T, 0.0))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)
        W = (exag * P - Q) * num
        grad = 4.0 * (np.diag(W.sum(axis=1)) - W) @ Y
        same = np.sign(grad) == np.sign(update)
        gains = np.maximum(np.where(same, gains * 0.8, gains + 0.2), 0.01)
        update = momentum * update - lr * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)
    return Y


def project_2d(X, method: str = "tsne", seed: int = 0, perplexity: float = 30.0, n_iter: int = 1000) -> np.ndarray:
    """V x 2 coordinates for the rows of ``X`` (or an EmbeddingSpace's vectors)."""
    X = np.asarray(getattr(X, "vectors", X), dtype=float)
    n = X.shape[0]
    if n < 3:
        raise ConfigError("need at least 3 points to project")
    method = method.lower()
    if method == "pca":
        return pca(X, 2)
    if method != "tsne":
        raise ConfigError(f"unknown projection {method!r}")
    if n < 4:
        warnings.warn("too few points for t-SNE; falling back to PCA", stacklevel=2)
        return pca(X, 2)
    perplexity = min(perplexity, (n - 1) / 3)
    return tsne(X, perplexity=perplexity, n_iter=n_iter, seed=seed)

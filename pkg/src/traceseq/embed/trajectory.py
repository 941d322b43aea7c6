"""Mobility-style summaries of a user's path through embedding space."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyTrajectory
from .sgns import EmbeddingSpace


@dataclass(frozen=True)
class TrajectorySummary:
    user_id: str
    entropy: float  # bits
    radius_of_gyration: float
    n_tokens: int
    n_dropped: int


def token_entropy(tokens: Sequence[str]) -> float:
    counts = np.array(list(Counter(tokens).values()), dtype=float)
    p = counts / counts.sum()
    return float(max(0.0, -(p * np.log2(p)).sum()))


def radius_of_gyration(points: np.ndarray) -> float:
    """RMS distance of the points (repeats included) from their centroid."""
    points = np.asarray(points, dtype=float)
    centred = points - points.mean(axis=0)
    return float(np.sqrt((centred**2).sum(axis=1).mean()))


def trajectory_metrics(space: EmbeddingSpace, tokens: Sequence[str], user_id: str = "") -> TrajectorySummary:
    kept = [t for t in tokens if t in space]
    if not kept:
        raise EmptyTrajectory(f"no in-vocabulary tokens for user {user_id!r}")
    vecs = space.vectors[[space.index[t] for t in kept]]
    return TrajectorySummary(user_id, token_entropy(kept), radius_of_gyration(vecs), len(kept),
                             len(tokens) - len(kept))

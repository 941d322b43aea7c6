"""Seeded generator of synthetic trace corpora with the donation dataset's shape.

Each user gets a platform set (by multiplicity), a length from a log-normal,
and a platform-labeled Markov walk: the walk stays on its platform with
probability ``p_stay`` per step and otherwise jumps uniformly to another of
the user's platforms. Activities are drawn i.i.d. from the current
platform's alphabet, so the planted structure is exactly a K-state HMM
(K = number of platforms) with disjoint emission alphabets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np
from scipy.stats import norm

from .errors import ConfigError
from .ingest import parse_timestamp
from .model import PLATFORMS, Event, UserSequence

REFERENCE_MULTIPLICITY = {1: 208, 2: 67, 3: 26, 4: 8}
REFERENCE_PLATFORM_USERS = {"Facebook": 117, "Instagram": 140, "TikTok": 54, "YouTube": 141}
REFERENCE_MAX_LENGTH = 83_372

DEFAULT_ALPHABETS: dict[str, dict[str, float]] = {
    "Facebook": {"likes": 0.35, "comments": 0.15, "searches": 0.30, "shares": 0.20},
    "Instagram": {"likes": 0.50, "comments": 0.10, "saves": 0.15, "shares": 0.25},
    "TikTok": {"watch_history": 0.55, "likes": 0.20, "favorites": 0.10, "login_history": 0.05, "searches": 0.10},
    "YouTube": {"watch_history": 0.60, "searches": 0.30, "comments": 0.10},
}

DEFAULT_GAP_MEAN = {"Facebook": 90.0, "Instagram": 60.0, "TikTok": 30.0, "YouTube": 240.0}

CONTENT_ACTIVITIES = frozenset({"searches", "watch_history"})

TOPICS: dict[str, dict[str, tuple[str, ...]]] = {
    "Facebook": {
        "towns": ("Events - Dachau / Umgebung", "Du kommst aus Olching, wenn...", "Veranstaltungen in Fürstenfeldbruck",
                  "Maisach Flohmarkt", "Germering Stadtfest"),
        "cooking": ("Rezepte Kaiserschmarrn", "Brezen backen", "Obatzda selber machen", "Spargel Rezepte",
                    "Biergarten Brotzeit"),
        "football": ("FC Bayern Tickets", "Bundesliga Tabelle", "TSV 1860 Spielplan", "Amateurfussball Oberbayern",
                     "EM 2024 Public Viewing"),
    },
    "Instagram": {
        "travel": ("Gardasee", "Dolomiten Wanderung", "Chiemsee", "Venedig Tipps", "Alpen Sonnenaufgang"),
        "fitness": ("Home Workout", "Laufplan 10k", "Yoga Morgenroutine", "Proteinrezepte", "Klettern Halle"),
        "fashion": ("Sommeroutfit", "Sneaker Drop", "Vintage Jacke", "Capsule Wardrobe", "Tracht modern"),
    },
    "TikTok": {
        "popculture": ("Japanese Day", "Korean animation", "Disney Plus trailer", "K-pop dance", "Anime edit"),
        "gadgets": ("gaming mouse review", "Samsung watch unboxing", "mechanical keyboard", "phone camera test",
                    "budget earbuds"),
        "comedy": ("office prank", "cat fails", "dad jokes", "sketch comedy", "stand-up clip"),
    },
    "YouTube": {
        "science": ("black holes explained", "how batteries work", "fusion energy", "quantum computing basics",
                    "climate models"),
        "music": ("lofi beats", "piano cover", "live concert 2024", "guitar lesson", "synthwave mix"),
        "diy": ("fix bike chain", "tile a bathroom", "woodworking bench", "repair phone screen", "paint a wall"),
    },
}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_users: int = 309
    multiplicity: dict[int, int] = field(default_factory=lambda: dict(REFERENCE_MULTIPLICITY))
    # exact per-platform user counts; None draws platform sets uniformly
    platform_users: dict[str, int] | None = field(default_factory=lambda: dict(REFERENCE_PLATFORM_USERS))
    length_mu: float = math.log(800.0)
    length_sigma: float = 1.9
    min_length: int = 2
    max_length: int | None = REFERENCE_MAX_LENGTH
    stratified_lengths: bool = True
    start: str | int = "2024-05-01T00:00:00Z"
    end: str | int = "2024-08-01T00:00:00Z"
    alphabets: dict[str, dict[str, float]] = field(default_factory=lambda: {k: dict(v) for k, v in DEFAULT_ALPHABETS.items()})
    p_stay: float = 0.9
    stay_by_platform: dict[str, float] | None = None
    # exponential inter-event gaps; rate = 1 / mean
    gap_mean_seconds: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_GAP_MEAN))
    p_break: float = 0.05
    break_mean_seconds: float = 6 * 3600.0
    topic_fidelity: float = 0.8

    @property
    def start_ts(self) -> int:
        return parse_timestamp(self.start)

    @property
    def end_ts(self) -> int:
        return parse_timestamp(self.end)

    def stay(self, platform: str) -> float:
        if self.stay_by_platform and platform in self.stay_by_platform:
            return self.stay_by_platform[platform]
        return self.p_stay

    def validate(self) -> None:
        if self.n_users < 1:
            raise ConfigError("n_users must be positive")
        if sum(self.multiplicity.values()) != self.n_users:
            raise ConfigError(f"multiplicity counts sum to {sum(self.multiplicity.values())}, not n_users={self.n_users}")
        if any(c < 0 for c in self.multiplicity.values()):
            raise ConfigError("negative multiplicity count")
        if not self.alphabets:
            raise ConfigError("no platform alphabets")
        if max(m for m, c in self.multiplicity.items() if c > 0) > len(self.alphabets) or min(self.multiplicity) < 1:
            raise ConfigError("multiplicity outside 1..number of platforms")
        for p, alpha in self.alphabets.items():
            if not alpha or any(w < 0 for w in alpha.values()) or sum(alpha.values()) <= 0:
                raise ConfigError(f"bad activity weights for {p}")
        for p in [self.p_stay, *(self.stay_by_platform or {}).values()]:
            if not 0.0 < p < 1.0:
                raise ConfigError("p_stay must lie in (0, 1)")
        if self.length_sigma <= 0:
            raise ConfigError("length_sigma must be positive")
        if self.min_length < 1 or (self.max_length is not None and self.max_length < self.min_length):
            raise ConfigError("bad length bounds")
        if self.end_ts - self.start_ts <= 0:
            raise ConfigError("empty date range")
        if not 0.0 <= self.p_break < 1.0 or self.break_mean_seconds <= 0:
            raise ConfigError("bad break parameters")
        if any(self.gap_mean_seconds.get(p, 0) <= 0 for p in self.alphabets):
            raise ConfigError("every platform needs a positive mean gap")
        if self.platform_users is not None:
            if set(self.platform_users) - set(self.alphabets):
                raise ConfigError("platform_users names a platform without an alphabet")
            want = sum(m * c for m, c in self.multiplicity.items())
            if sum(self.platform_users.values()) != want:
                raise ConfigError(f"platform_users sum to {sum(self.platform_users.values())}, multiplicities imply {want}")


def desk_config(n_users: int = 100, median_length: float = 400.0, seed: int = 0, **overrides) -> SynthConfig:
    """A smaller corpus with the reference multiplicity proportions and the same skew."""
    shares = {m: c / 309 for m, c in REFERENCE_MULTIPLICITY.items()}
    counts = {m: int(round(s * n_users)) for m, s in shares.items()}
    counts[1] += n_users - sum(counts.values())
    cfg = SynthConfig(
        seed=seed,
        n_users=n_users,
        multiplicity=counts,
        platform_users=None,
        length_mu=math.log(median_length),
        length_sigma=1.0,
        max_length=int(median_length * 20),
    )
    return replace(cfg, **overrides)


def _platform_sets(cfg: SynthConfig, rng: np.random.Generator) -> list[tuple[str, ...]]:
    platforms = [p for p in PLATFORMS if p in cfg.alphabets] + sorted(p for p in cfg.alphabets if p not in PLATFORMS)
    mults = np.array([m for m, c in sorted(cfg.multiplicity.items()) for _ in range(c)])
    rng.shuffle(mults)
    if cfg.platform_users is None:
        return [tuple(sorted((platforms[j] for j in rng.choice(len(platforms), size=m, replace=False)), key=platforms.index))
                for m in mults]
    # largest-demand users first, each takes the platforms with most remaining quota
    remaining = {p: cfg.platform_users.get(p, 0) for p in platforms}
    out: list[tuple[str, ...] | None] = [None] * len(mults)
    for i in sorted(range(len(mults)), key=lambda i: (-mults[i], i)):
        jitter = rng.random(len(platforms))
        ranked = sorted(range(len(platforms)), key=lambda j: (-remaining[platforms[j]], jitter[j]))
        chosen = [platforms[j] for j in ranked[: mults[i]]]
        if any(remaining[p] <= 0 for p in chosen):
            raise ConfigError("platform_users cannot be met with these multiplicities")
        for p in chosen:
            remaining[p] -= 1
        out[i] = tuple(sorted(chosen, key=platforms.index))
    return out  # type: ignore[return-value]


def _lengths(cfg: SynthConfig, sets, rng: np.random.Generator) -> np.ndarray:
    n = len(sets)
    if cfg.stratified_lengths:
        u = (rng.permutation(n) + rng.random(n)) / n
        z = norm.ppf(u)
    else:
        z = rng.standard_normal(n)
    raw = np.round(np.exp(cfg.length_mu + cfg.length_sigma * z))
    lo = np.array([max(cfg.min_length, len(s)) for s in sets])
    hi = cfg.max_length if cfg.max_length is not None else np.inf
    return np.clip(raw, lo, hi).astype(np.int64)


def _user_events(cfg: SynthConfig, user_id: str, platforms: tuple[str, ...], length: int,
                 rng: np.random.Generator) -> list[Event]:
    k = len(platforms)
    # platform walk, generated run by run
    plat_idx = np.empty(length, dtype=np.int64)
    pos = 0
    cur = int(rng.integers(k))
    while pos < length:
        run = int(rng.geometric(1.0 - cfg.stay(platforms[cur])))
        plat_idx[pos:pos + run] = cur
        pos += run
        if k > 1:
            cur = (cur + int(rng.integers(1, k))) % k
    present = set(plat_idx.tolist())
    for j in range(k):
        if j not in present:
            plat_idx[int(rng.integers(length))] = j
            present = set(plat_idx.tolist())

    favourite = {p: rng.choice(sorted(TOPICS[p])) if p in TOPICS else None for p in platforms}
    activities = np.empty(length, dtype=object)
    contents = np.full(length, None, dtype=object)
    for j, p in enumerate(platforms):
        mask = plat_idx == j
        n = int(mask.sum())
        if not n:
            continue
        names = list(cfg.alphabets[p])
        w = np.array([cfg.alphabets[p][a] for a in names], dtype=float)
        acts = np.array(names, dtype=object)[rng.choice(len(names), size=n, p=w / w.sum())]
        activities[mask] = acts
        if p in TOPICS:
            topics = sorted(TOPICS[p])
            needs = np.array([a in CONTENT_ACTIVITIES for a in acts])
            m = int(needs.sum())
            if m:
                on_topic = rng.random(m) < cfg.topic_fidelity
                other = np.array(topics, dtype=object)[rng.integers(len(topics), size=m)]
                picked = np.where(on_topic, favourite[p], other)
                terms = [TOPICS[p][t][int(rng.integers(len(TOPICS[p][t])))] for t in picked]
                sub = np.full(n, None, dtype=object)
                sub[needs] = terms
                contents[mask] = sub

    means = np.array([cfg.gap_mean_seconds[platforms[j]] for j in plat_idx], dtype=float)
    gaps = rng.exponential(1.0, size=length) * means
    breaks = rng.random(length) < cfg.p_break
    gaps[breaks] = rng.exponential(cfg.break_mean_seconds, size=int(breaks.sum()))
    gaps[0] = 0.0
    span = cfg.end_ts - cfg.start_ts - 1
    if length - 1 > span:
        raise ConfigError(f"{length} events cannot have distinct seconds in the date range")
    steps = np.maximum(1, np.round(gaps[1:]))
    total = steps.sum()
    if total > span:
        # squeeze into the range while keeping at least one second between events
        extra = np.maximum(0.0, gaps[1:] - 1.0)
        steps = 1 + np.floor(extra * ((span - (length - 1)) / max(extra.sum(), 1.0)))
        total = steps.sum()
    offset = cfg.start_ts + int(rng.integers(0, int(span - total) + 1))
    stamps = offset + np.concatenate([[0], np.cumsum(steps)]).astype(np.int64)
    return [
        Event(user_id, int(t), platforms[j], a, c)
        for t, j, a, c in zip(stamps.tolist(), plat_idx.tolist(), activities.tolist(), contents.tolist())
    ]


def plan(config: SynthConfig) -> list[tuple[str, tuple[str, ...], int]]:
    """Per-user (user_id, platforms, length) without generating events."""
    config.validate()
    rng = np.random.default_rng([config.seed, 0xC0FFEE])
    sets = _platform_sets(config, rng)
    lengths = _lengths(config, sets, rng)
    width = max(4, len(str(config.n_users - 1)))
    return [(f"u{i:0{width}d}", s, int(n)) for i, (s, n) in enumerate(zip(sets, lengths))]


def generate(config: SynthConfig) -> list[UserSequence]:
    """Deterministic for a fixed seed; users are independent given (seed, index)."""
    out = []
    for i, (uid, platforms, length) in enumerate(plan(config)):
        rng = np.random.default_rng([config.seed, i])
        out.append(UserSequence(uid, tuple(_user_events(config, uid, platforms, length, rng))))
    return out


def describe_range(config: SynthConfig) -> str:
    a = datetime.fromtimestamp(config.start_ts, tz=timezone.utc)
    b = datetime.fromtimestamp(config.end_ts, tz=timezone.utc)
    return f"{a:%Y-%m-%d}..{b:%Y-%m-%d}"

import numpy as np
import pytest
from hypothesis import given, strategies as st

from traceseq.errors import ConfigError, EmptyInput
from traceseq.model import Event, UserSequence
from traceseq.preprocess import (collapse_platform_sessions, collapse_sessions, percentile_filter, split_daily,
                                 split_daily_sessions)
from traceseq.synth import SynthConfig, generate

from conftest import T0, ev, seq


def hms(h, m, s):
    return h * 3600 + m * 60 + s - 8 * 3600


def test_instagram_likes_example():
    s = seq("u", [(hms(8, 1, 23), "Instagram", "likes"), (hms(8, 7, 26), "Instagram", "likes"),
                  (hms(8, 16, 1), "Instagram", "likes")])
    (only,) = collapse_sessions(s, 10)
    assert only.count == 3
    assert only.start == T0 + hms(8, 1, 23) and only.end == T0 + hms(8, 16, 1)
    # span of 14m38s exceeds the window; only gaps are bounded
    assert only.span == 14 * 60 + 38


def test_gap_over_window_splits():
    s = seq("u", [(0, "TikTok", "likes"), (11 * 60, "TikTok", "likes")])
    assert len(collapse_sessions(s, 10)) == 2
    s = seq("u", [(0, "TikTok", "likes"), (10 * 60, "TikTok", "likes")])
    assert len(collapse_sessions(s, 10)) == 1


def test_alternating_symbols_do_not_merge():
    s = seq("u", [(0, "TikTok", "A"), (20, "TikTok", "B"), (40, "TikTok", "A")])
    assert [x.count for x in collapse_sessions(s, 10)] == [1, 1, 1]
    assert [x.count for x in collapse_platform_sessions(s, 10)] == [3]


def test_platform_sessions():
    s = seq("u", [(0, "Instagram", "likes"), (120, "Instagram", "shares")])
    (one,) = collapse_platform_sessions(s, 10)
    assert one.count == 2 and one.activity is None and one.symbol == "Instagram"
    s = seq("u", [(0, "Instagram", "likes"), (120, "Facebook", "likes")])
    assert len(collapse_platform_sessions(s, 10)) == 2


def test_zero_window_rejected():
    with pytest.raises(ConfigError):
        collapse_sessions(seq("u", [(0, "TikTok", "likes")]), 0)


def scan(events, window, key):
    """Independent oracle: mark where a new session must begin, then group."""
    starts = [i for i in range(len(events))
              if i == 0 or key(events[i]) != key(events[i - 1])
              or events[i].timestamp - events[i - 1].timestamp > window * 60]
    bounds = starts + [len(events)]
    return [(key(events[a]), events[a].timestamp, events[b - 1].timestamp, b - a) for a, b in zip(bounds, bounds[1:])]


def test_twenty_event_fixture_matches_linear_scan():
    rng = np.random.default_rng(11)
    t = np.cumsum(rng.integers(1, 900, size=20))
    plats = rng.choice(["Instagram", "Facebook"], size=20, p=[0.7, 0.3])
    acts = rng.choice(["likes", "shares"], size=20)
    s = seq("u", list(zip(t.tolist(), plats.tolist(), acts.tolist())))
    for fn, key in ((collapse_platform_sessions, lambda e: e.platform),
                    (collapse_sessions, lambda e: (e.platform, e.activity))):
        got = [(key(Event("u", x.start, x.platform, x.activity or "")) if x.activity else x.platform, x.start, x.end,
                x.count) for x in fn(s, 10)]
        assert got == scan(s.events, 10, key)


events_strategy = st.lists(st.tuples(st.integers(1, 2000), st.sampled_from(["TikTok", "YouTube"]),
                                     st.sampled_from(["likes", "searches"])), min_size=1, max_size=80)


@given(events_strategy)
def test_sessions_conserve_events_and_are_monotone_in_window(items):
    t = np.cumsum([g for g, _, _ in items])
    s = seq("u", [(int(x), p, a) for x, (_, p, a) in zip(t, items)])
    prev = None
    for w in (10, 20, 30):
        for fn in (collapse_sessions, collapse_platform_sessions):
            ss = fn(s, w)
            assert sum(x.count for x in ss) == len(s)
        n = len(collapse_sessions(s, w))
        if prev is not None:
            assert n <= prev
        prev = n


def test_percentile_filter_hand_example():
    seqs = [list(range(n)) for n in (1, 2, 3, 4)]
    # P25 = 1.75, P75 = 3.25 under linear interpolation
    assert [len(s) for s in percentile_filter(seqs, 25, 75)] == [2, 3]


@given(st.lists(st.lists(st.integers(), max_size=12), min_size=1, max_size=30))
def test_percentile_filter_full_range_is_identity(seqs):
    assert percentile_filter(seqs, 0, 100) == seqs


def test_percentile_filter_errors():
    with pytest.raises(EmptyInput):
        percentile_filter([], 25, 75)
    with pytest.raises(ConfigError):
        percentile_filter([[1]], 75, 25)


def test_percentile_filter_keeps_about_half():
    cfg = SynthConfig(seed=0)
    from traceseq.synth import plan
    lengths = [n for _, _, n in plan(cfg)]
    kept = percentile_filter([range(n) for n in lengths], 25, 75)
    assert 0.45 <= len(kept) / len(lengths) <= 0.55


def test_split_daily_midnight():
    midnight = 1714608000  # 2024-05-02T00:00:00Z
    s = UserSequence.from_events([Event("u", midnight - 60, "TikTok", "likes"),
                                  Event("u", midnight + 60, "TikTok", "likes")])
    days = split_daily(s)
    assert len(days) == 2 and [len(d) for _, d in days] == [1, 1]
    same = UserSequence.from_events([Event("u", midnight + i, "TikTok", "likes") for i in range(5)])
    ((_, only),) = split_daily(same)
    assert only == same


def test_split_daily_conserves_90_day_user():
    cfg = SynthConfig(seed=5, n_users=1, multiplicity={2: 1}, platform_users=None, length_mu=np.log(3000),
                      length_sigma=0.01, max_length=None, p_break=0.2)
    (s,) = generate(cfg)
    days = split_daily(s)
    assert len(days) > 1
    assert sum(len(d) for _, d in days) == len(s)
    assert [e for _, d in days for e in d] == list(s.events)
    sessions = collapse_sessions(s, 10)
    assert sum(len(x) for _, x in split_daily_sessions(sessions)) == len(sessions)

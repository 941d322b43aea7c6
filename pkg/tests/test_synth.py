import numpy as np
import pytest

from traceseq.errors import ConfigError
from traceseq.ingest import summarize, write_events
from traceseq.synth import (REFERENCE_MULTIPLICITY, REFERENCE_PLATFORM_USERS, SynthConfig, desk_config, generate, plan)


def small(seed=0, **kw):
    base = dict(seed=seed, n_users=20, multiplicity={1: 10, 2: 6, 3: 2, 4: 2}, platform_users=None,
                length_mu=4.0, length_sigma=0.8, max_length=2000)
    base.update(kw)
    return SynthConfig(**base)


def test_fixed_seed_gives_identical_bytes(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_events(generate(small(7)), a)
    write_events(generate(small(7)), b)
    assert a.read_bytes() == b.read_bytes()
    write_events(generate(small(8)), b)
    assert a.read_bytes() != b.read_bytes()


def test_timestamps_strictly_increase_and_lie_in_range():
    cfg = small(1)
    for s in generate(cfg):
        ts = np.array([e.timestamp for e in s])
        assert np.all(np.diff(ts) > 0)
        assert ts[0] >= cfg.start_ts and ts[-1] < cfg.end_ts


def test_multiplicity_and_platform_coverage():
    cfg = small(2)
    seqs = generate(cfg)
    rep = summarize(seqs)
    assert rep.multiplicity == cfg.multiplicity
    for (uid, plats, n), s in zip(plan(cfg), seqs):
        assert set(s.platforms) == set(plats) and len(s) == n


def test_reference_shape_full_size():
    cfg = SynthConfig(seed=0)
    seqs = generate(cfg)
    rep = summarize(seqs)
    assert rep.users == 309
    assert rep.multiplicity == REFERENCE_MULTIPLICITY == {1: 208, 2: 67, 3: 26, 4: 8}
    users_per_platform = {p: sum(p in s.platforms for s in seqs) for p in REFERENCE_PLATFORM_USERS}
    assert users_per_platform == REFERENCE_PLATFORM_USERS
    assert rep.median_length < 1000
    assert 3000 <= rep.mean_length <= 5000
    assert rep.max_length == 83_372
    # right skew
    assert rep.mean_length > rep.median_length


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_same_platform_adjacency_tracks_p_stay(seed):
    cfg = small(seed, n_users=4, multiplicity={4: 4}, length_mu=np.log(2500), length_sigma=0.01,
                max_length=None, p_stay=0.9)
    seqs = generate(cfg)
    same = total = 0
    for s in seqs:
        p = [e.platform for e in s]
        same += sum(a == b for a, b in zip(p, p[1:]))
        total += len(p) - 1
    assert total >= 9_000
    frac = same / total
    # 3 sigma of a Bernoulli(0.9) mean over ~10k steps is about 0.009
    assert 0.88 <= frac <= 0.92


def test_invalid_configs():
    with pytest.raises(ConfigError):
        generate(small(start="2024-05-01", end="2024-05-01"))
    with pytest.raises(ConfigError):
        generate(small(p_stay=1.0))
    with pytest.raises(ConfigError):
        generate(small(length_sigma=0.0))
    with pytest.raises(ConfigError):
        generate(small(multiplicity={1: 5}))


def test_desk_config_keeps_proportions():
    cfg = desk_config(100, 300, seed=3)
    assert sum(cfg.multiplicity.values()) == 100
    assert cfg.multiplicity[1] > cfg.multiplicity[2] > cfg.multiplicity[3] >= cfg.multiplicity[4]
    assert len(generate(cfg)) == 100


def test_content_only_on_content_activities():
    for s in generate(small(3)):
        for e in s:
            if e.content is not None:
                assert e.activity in ("searches", "watch_history")

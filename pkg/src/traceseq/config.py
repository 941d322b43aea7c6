"""Run configuration: engine hyperparameters read from an INI file, overridable by flags.

Schema: a single ``[traceseq]`` section whose keys are the field names of
:class:`RunConfig`. Tuples are comma-separated (``orders = 2,3,4``).
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, fields, replace
from typing import Any

from ._io import write_text
from .errors import ConfigError, IoError

SECTION = "traceseq"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    window: float = 10.0  # minutes
    # sequence analysis works on the middle of the length distribution
    seq_lo: float = 25.0
    seq_hi: float = 75.0
    clusters: int = 20
    alpha: float = 1e-4
    orders: tuple[int, ...] = (2, 3, 4)
    hmm_lo: float = 25.0
    hmm_hi: float = 90.0
    k_min: int = 1
    k_max: int = 6
    restarts: int = 5
    hmm_tol: float = 1e-6
    hmm_max_iter: int = 500
    baseline: str = "YouTube"
    single_platform: str = "include"
    top_paths: int = 10
    dim: int = 100
    sgns_window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 5
    projection: str = "tsne"
    perplexity: float = 30.0
    tsne_iter: int = 1000

    def validate(self) -> "RunConfig":
        if self.window <= 0:
            raise ConfigError("window must be positive")
        for lo, hi in ((self.seq_lo, self.seq_hi), (self.hmm_lo, self.hmm_hi)):
            if not 0 <= lo < hi <= 100:
                raise ConfigError(f"bad percentile bounds ({lo}, {hi})")
        if self.clusters < 1 or self.top_paths < 1 or self.restarts < 1:
            raise ConfigError("clusters, top_paths and restarts must be >= 1")
        if not 1 <= self.k_min <= self.k_max:
            raise ConfigError("need 1 <= k_min <= k_max")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.projection not in ("pca", "tsne"):
            raise ConfigError("projection must be pca or tsne")
        return self

    def with_overrides(self, **values: Any) -> "RunConfig":
        known = {f.name for f in fields(self)}
        clean = {k: v for k, v in values.items() if k in known and v is not None}
        return replace(self, **{k: _coerce(self, k, v) for k, v in clean.items()}).validate()


def _coerce(cfg: RunConfig, name: str, value: Any):
    current = getattr(cfg, name)
    try:
        if isinstance(current, tuple):
            if isinstance(value, str):
                value = [x for x in value.replace(" ", "").split(",") if x]
            return tuple(int(x) for x in value)
        if isinstance(current, bool):
            return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
        return type(current)(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {value!r}") from exc


def load_config(path=None, **overrides: Any) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise IoError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path}: {exc}") from exc
        if parser.has_section(SECTION):
            values = dict(parser.items(SECTION))
            unknown = set(values) - {f.name for f in fields(cfg)}
            if unknown:
                raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
            cfg = cfg.with_overrides(**values)
    return cfg.with_overrides(**overrides)


def write_default(path) -> None:
    parser = configparser.ConfigParser()
    parser[SECTION] = {
        f.name: ",".join(map(str, v)) if isinstance(v := getattr(RunConfig(), f.name), tuple) else str(v)
        for f in fields(RunConfig)
    }
    buf = io.StringIO()
    parser.write(buf)
    write_text(path, buf.getvalue())

"""Platform-switch durations, Kaplan-Meier curves and Cox regression."""

from __future__ import annotations

import logging
import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._io import fmt, write_csv
from .errors import ConfigError, EmptyInput, SingularModel
from .model import Session, platform_order

log = logging.getLogger(__name__)

Z95 = 1.959963984540054
ZERO_DURATION_BUMP = 1.0 / 60.0  # one second, in minutes


@dataclass(frozen=True, slots=True)
class DurationRecord:
    duration: float  # minutes
    event_observed: bool
    platform: str
    user_id: str = ""
    adjusted: bool = False  # zero duration bumped by one second


def build_durations(
    sessions_by_user: Mapping[str, Sequence[Session]] | Iterable[Sequence[Session]],
    single_platform: str = "include",
) -> list[DurationRecord]:
    """One record per platform session.

    A session whose successor is on another platform ends in an observed
    switch after ``next.start - start``. Otherwise (the user's last session,
    or a return to the same platform after a break) it is right-censored at
    its own span. Zero durations become one second.
    """
    if single_platform not in ("include", "exclude"):
        raise ConfigError("single_platform must be 'include' or 'exclude'")
    groups = sessions_by_user.values() if isinstance(sessions_by_user, Mapping) else sessions_by_user
    out: list[DurationRecord] = []
    for sessions in groups:
        sessions = list(sessions)
        if not sessions:
            continue
        if single_platform == "exclude" and len({s.platform for s in sessions}) < 2:
            continue
        for cur, nxt in zip(sessions, sessions[1:] + [None]):
            if nxt is not None and nxt.platform != cur.platform:
                seconds, observed = nxt.start - cur.start, True
            else:
                seconds, observed = cur.end - cur.start, False
            minutes = seconds / 60.0
            bumped = minutes <= 0
            out.append(DurationRecord(ZERO_DURATION_BUMP if bumped else minutes, observed, cur.platform,
                                      cur.user_id, bumped))
    n_adj = sum(r.adjusted for r in out)
    if n_adj:
        log.info("bumped %d zero-duration records to one second", n_adj)
    return out


@dataclass
class SurvivalCurve:
    group: str
    times: np.ndarray  # leading 0, then every distinct observed duration
    survival: np.ndarray
    variance: np.ndarray  # Greenwood
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    censored: np.ndarray

    def at(self, t: float) -> float:
        """Right-continuous step value S(t)."""
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.survival[max(i, 0)])

    def to_csv(self, path) -> None:
        write_csv(path, ["t", "S", "lo", "hi"],
                  ([fmt(t), fmt(s), fmt(lo), fmt(hi)]
                   for t, s, lo, hi in zip(self.times, self.survival, self.ci_lower, self.ci_upper)))


def km_estimate(durations, observed, group: str = "all") -> SurvivalCurve:
    """Product-limit estimate with Greenwood variance and log-log 95% bands."""
    t = np.asarray(durations, dtype=float)
    e = np.asarray(observed, dtype=bool)
    if t.size == 0:
        raise EmptyInput("no records")
    if np.any(t < 0):
        raise ConfigError("negative duration")
    uniq = np.unique(t)
    d, c = _tally(t, e, uniq)
    n = len(t) - np.concatenate([[0], np.cumsum(d + c)[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.cumprod((n - d) / n)
        gw = np.cumsum(np.where(n > d, d / (n * (n - d)), np.inf))
        var = s**2 * gw
        log_s = np.log(s)
        se = np.sqrt(gw) / np.abs(log_s)
        lo = s ** np.exp(Z95 * se)
        hi = s ** np.exp(-Z95 * se)
    # degenerate bands: S == 1 (no events yet) or S == 0
    lo = np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, lo))
    hi = np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, hi))
    var = np.where(np.isfinite(var), var, np.nan)
    var = np.where(s <= 0.0, 0.0, var)
    if uniq[0] > 0:
        # explicit t = 0 row so S(0) = 1 is on the curve
        uniq, s, var, lo, hi = (np.concatenate([[v0], x]) for v0, x in
                                ((0.0, uniq), (1.0, s), (0.0, var), (1.0, lo), (1.0, hi)))
        n, d, c = (np.concatenate([[v0], x]) for v0, x in ((len(t), n), (0, d), (0, c)))
    return SurvivalCurve(group, uniq, s, var, lo, hi, n, d, c)


def _tally(t, e, uniq):
    idx = np.searchsorted(uniq, t)
    d = np.bincount(idx, weights=e.astype(float), minlength=uniq.size).astype(np.int64)
    c = np.bincount(idx, weights=(~e).astype(float), minlength=uniq.size).astype(np.int64)
    return d, c


def kaplan_meier(records: Sequence[DurationRecord], by: str = "platform") -> dict[str, SurvivalCurve]:
    groups: dict[str, list[DurationRecord]] = defaultdict(list)
    for r in records:
        groups[getattr(r, by) if by else "all"].append(r)
    out = {}
    for g in sorted(groups, key=platform_order):
        rs = groups[g]
        if not any(r.event_observed for r in rs):
            warnings.warn(f"group {g!r} has no observed events; survival stays at 1", stacklevel=2)
        out[g] = km_estimate([r.duration for r in rs], [r.event_observed for r in rs], g)
    return out


@dataclass
class CoxFit:
    covariates: list[str]
    coef: np.ndarray
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    loglik: float
    loglik_null: float
    iterations: int
    converged: bool
    score_max: float
    loglik_history: list[float] = field(default_factory=list)
    baseline: str | None = None
    n_records: int = 0
    n_events: int = 0

    @property
    def hazard_ratio(self) -> np.ndarray:
        return np.exp(self.coef)

    def table(self) -> list[dict]:
        return [{"covariate": c, "coef": float(b), "se(coef)": float(s), "z": float(z), "p": float(p)}
                for c, b, s, z, p in zip(self.covariates, self.coef, self.se, self.z, self.p)]

    def to_csv(self, path) -> None:
        write_csv(path, ["covariate", "coef", "se(coef)", "z", "p"],
                  ([r["covariate"], fmt(r["coef"]), fmt(r["se(coef)"]), fmt(r["z"]), fmt(r["p"])]
                   for r in self.table()))


class _RiskSets:
    """Sorted data plus index bookkeeping for the Breslow partial likelihood."""

    def __init__(self, t, e, X):
        order = np.argsort(-t, kind="stable")
        self.t, self.e, self.X = t[order], e[order], X[order]
        # times sorted descending: the risk set of a record runs up to the last
        # position sharing its time (Breslow ties)
        self.end = np.searchsorted(-self.t, -self.t, side="right") - 1

    def evaluate(self, beta):
        X, e = self.X, self.e
        eta = X @ beta
        shift = eta.max()
        w = np.exp(eta - shift)
        s0 = np.cumsum(w)[self.end]
        s1 = np.cumsum(w[:, None] * X, axis=0)[self.end]
        s2 = np.cumsum(w[:, None, None] * X[:, :, None] * X[:, None, :], axis=0)[self.end]
        ev = e.astype(bool)
        ll = float(np.sum(eta[ev] - shift - np.log(s0[ev])))
        mean = s1[ev] / s0[ev, None]
        grad = (X[ev] - mean).sum(axis=0)
        info = (s2[ev] / s0[ev, None, None] - mean[:, :, None] * mean[:, None, :]).sum(axis=0)
        return ll, grad, info


def partial_loglik(durations, events, X, beta) -> float:
    t = np.asarray(durations, dtype=float)
    X = np.asarray(X, dtype=float).reshape(len(t), -1)
    return _RiskSets(t, np.asarray(events, dtype=bool), X).evaluate(np.asarray(beta, dtype=float).reshape(-1))[0]


def cox_ph(durations, events, X, names: Sequence[str] | None = None, tol: float = 1e-9,
           max_iter: int = 50) -> CoxFit:
    """Newton-Raphson on the Breslow partial likelihood with step halving."""
    t = np.asarray(durations, dtype=float)
    e = np.asarray(events, dtype=bool)
    X = np.asarray(X, dtype=float).reshape(len(t), -1)
    p = X.shape[1]
    names = list(names) if names is not None else [f"x{i}" for i in range(p)]
    if not e.any():
        raise EmptyInput("Cox model needs at least one observed event")
    rs = _RiskSets(t, e, X)
    beta = np.zeros(p)
    ll, grad, info = rs.evaluate(beta)
    ll_null = ll
    if np.linalg.matrix_rank(info) < p:
        raise SingularModel("information matrix is singular; no covariate variation among events")
    history = [ll]
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < tol:
            break
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError as exc:
            raise SingularModel(str(exc)) from exc
        accepted = False
        for _ in range(40):
            cand = beta + step
            ll_c, grad_c, info_c = rs.evaluate(cand)
            if np.isfinite(ll_c) and ll_c >= ll:
                accepted = True
                break
            step = step / 2
        if not accepted:
            break
        beta, ll, grad, info = cand, ll_c, grad_c, info_c
        history.append(ll)
    converged = bool(np.max(np.abs(grad)) < tol)
    if not converged:
        log.warning("Cox fit did not reach max|score| < %g (at %g)", tol, np.max(np.abs(grad)))
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError as exc:
        raise SingularModel(str(exc)) from exc
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = beta / se
    pv = np.array([math.erfc(abs(zi) / math.sqrt(2.0)) if np.isfinite(zi) else float("nan") for zi in z])
    return CoxFit(names, beta, se, z, pv, ll, ll_null, len(history) - 1, converged, float(np.max(np.abs(grad))),
                  history, n_records=len(t), n_events=int(e.sum()))


def platform_design(records: Sequence[DurationRecord], baseline: str = "YouTube") -> tuple[np.ndarray, list[str]]:
    levels = sorted({r.platform for r in records}, key=platform_order)
    if baseline not in levels:
        raise ConfigError(f"baseline {baseline!r} absent from records")
    if len(levels) < 2:
        raise ConfigError("need at least two platforms")
    names = [lv for lv in levels if lv != baseline]
    X = np.array([[1.0 if r.platform == lv else 0.0 for lv in names] for r in records])
    return X, names


def cox_fit(records: Sequence[DurationRecord], baseline: str = "YouTube", tol: float = 1e-9,
            max_iter: int = 50) -> CoxFit:
    """Platform dummies against ``baseline``."""
    if not records:
        raise EmptyInput("no duration records")
    X, names = platform_design(records, baseline)
    fit = cox_ph([r.duration for r in records], [r.event_observed for r in records], X, names, tol, max_iter)
    fit.baseline = baseline
    return fit

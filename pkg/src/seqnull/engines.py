"""Sequential global-null test engines.

All engines share one shape: a running statistic S_k accumulated over an
ordering of hypotheses is compared against a uniform boundary u_alpha(k); the
first strict crossing rejects. The ordering may be fixed (preordered), driven
by masked values (adaptive), chosen step by step by an analyst (interactive),
or screened online. Product-calibrator tests use a constant log(1/alpha)
threshold instead of a boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy import stats as _sps

from .boundaries import (
    CHISQ_FAMILIES,
    FISHER_FAMILIES,
    GAUSSIAN_FAMILIES,
    BoundarySpec,
    boundary_curve,
)
from .masking import MaskScheme, SchemeKind, calibrator_log_bits, mask_arrays, masked_order_key

__all__ = [
    "EngineError",
    "IncompatibleBoundaryError",
    "SessionStoppedError",
    "AlreadyPickedError",
    "UnknownHypothesisError",
    "Combiner",
    "Hypothesis",
    "MaskedHypothesis",
    "TrajectoryPoint",
    "TestState",
    "ScreeningRule",
    "stouffer_increment",
    "fisher_increment",
    "chisq_increment",
    "run_preordered",
    "run_amt_batch",
    "run_amt_online",
    "ImtSession",
    "imt_session_new",
    "imt_pick",
    "OnlineImtSession",
    "imt_online_step",
    "DecisionView",
    "PastReveal",
    "run_imt_online",
    "session_events",
    "replay_session_log",
    "replay_online_log",
    "run_calibrator_test",
    "bonferroni_batch",
    "bonferroni_online",
    "online_bonferroni_weights",
    "batch_stouffer",
    "batch_fisher",
]

_PCLIP_LO = 1e-16
_PCLIP_HI = 1.0 - 1e-16
_LOG_CLIP = 1e-300


class EngineError(Exception):
    pass


class IncompatibleBoundaryError(EngineError):
    pass


class SessionStoppedError(EngineError):
    pass


class AlreadyPickedError(EngineError):
    pass


class UnknownHypothesisError(EngineError):
    pass


class Combiner(str, Enum):
    STOUFFER = "Stouffer"
    FISHER = "Fisher"
    CHISQ = "ChiSq"


def stouffer_increment(p: float) -> float:
    """Phi^{-1}(1 - p); p in {0, 1} saturates via clipping."""
    return float(_sps.norm.isf(np.clip(p, _PCLIP_LO, _PCLIP_HI)))


def fisher_increment(p: float) -> float:
    """-2 log p; the engine centers by -2 per step."""
    return float(-2.0 * np.log(max(p, _LOG_CLIP)))


def chisq_increment(p: float) -> float:
    """(Phi^{-1}(1 - p))^2; the engine centers by -1 per step."""
    return stouffer_increment(p) ** 2


def _increments(ps: np.ndarray, combiner: Combiner) -> tuple[np.ndarray, float]:
    """(raw increments, per-step centering) for a p-value vector."""
    if combiner is Combiner.STOUFFER:
        return _sps.norm.isf(np.clip(ps, _PCLIP_LO, _PCLIP_HI)), 0.0
    if combiner is Combiner.FISHER:
        return -2.0 * np.log(np.clip(ps, _LOG_CLIP, None)), 2.0
    if combiner is Combiner.CHISQ:
        z = _sps.norm.isf(np.clip(ps, _PCLIP_LO, _PCLIP_HI))
        return z * z, 1.0
    raise ValueError(f"unknown combiner {combiner}")


_COMPATIBLE = {
    Combiner.STOUFFER: GAUSSIAN_FAMILIES,
    Combiner.FISHER: FISHER_FAMILIES,
    Combiner.CHISQ: CHISQ_FAMILIES,
}


def _check_compat(combiner: Combiner, boundary: BoundarySpec) -> None:
    if boundary.family not in _COMPATIBLE[combiner]:
        raise IncompatibleBoundaryError(
            f"{combiner.value} increments cannot use a {boundary.family.value} boundary"
        )


@dataclass(frozen=True)
class Hypothesis:
    id: int
    p: float
    covariates: tuple = ()
    arrival_time: int | None = None


@dataclass(frozen=True)
class MaskedHypothesis:
    """What an analyst is allowed to see before picking: no bit, no truth."""

    id: int
    covariates: tuple
    masked: float


class TrajectoryPoint(NamedTuple):
    k: int
    statistic: float
    bound: float
    arrival: int | None = None


@dataclass
class TestState:
    """Outcome of a sequential run: statistic path, ordering, stop status."""

    k: int
    statistic: float
    included: list
    boundary: BoundarySpec | None
    stopped: bool
    rejected_at: int | None
    stats: np.ndarray
    bounds: np.ndarray
    arrivals: np.ndarray | None = None

    @property
    def status(self) -> str:
        if self.rejected_at is not None:
            return "rejected"
        return "exhausted" if self.stopped else "active"

    @property
    def trajectory(self) -> list[TrajectoryPoint]:
        arr = self.arrivals
        return [
            TrajectoryPoint(
                i + 1,
                float(self.stats[i]),
                float(self.bounds[i]),
                int(arr[i]) if arr is not None else None,
            )
            for i in range(self.k)
        ]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "statistic": self.statistic,
            "included": list(self.included),
            "boundary": self.boundary.to_json() if self.boundary else None,
            "status": self.status,
            "rejected_at": self.rejected_at,
        }


def _finish(
    stats: np.ndarray,
    bounds: np.ndarray,
    included: Sequence,
    boundary: BoundarySpec | None,
    arrivals: np.ndarray | None = None,
    strict: bool = True,
) -> TestState:
    """Truncate a fully-computed path at its first crossing and wrap it up."""
    crossed = stats > bounds if strict else stats >= bounds
    idx = int(np.argmax(crossed)) if bool(crossed.any()) else None
    if idx is not None:
        stop = idx + 1
        rejected_at = stop
    else:
        stop = len(stats)
        rejected_at = None
    return TestState(
        k=stop,
        statistic=float(stats[stop - 1]) if stop else 0.0,
        included=list(included[:stop]),
        boundary=boundary,
        stopped=True,
        rejected_at=rejected_at,
        stats=np.asarray(stats[:stop], dtype=float),
        bounds=np.asarray(bounds[:stop], dtype=float),
        arrivals=None if arrivals is None else np.asarray(arrivals[:stop], dtype=int),
    )


def _as_hypotheses(items) -> list[Hypothesis]:
    out = []
    for t, item in enumerate(items, start=1):
        if isinstance(item, Hypothesis):
            out.append(item)
        else:
            out.append(Hypothesis(id=t, p=float(item)))
    return out


def _ids_ps_arrivals(items) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ids, ps, arrivals) without materializing Hypothesis objects for raw
    float input; 1-based positional ids match the raw-sequence convention."""
    if isinstance(items, np.ndarray) and items.dtype != object:
        ps = items.astype(float, copy=False)
        ids = np.arange(1, len(ps) + 1)
        return ids, ps, ids
    items = list(items)
    if items and isinstance(items[0], Hypothesis):
        ids = np.asarray([h.id for h in items])
        ps = np.asarray([h.p for h in items], dtype=float)
        arrivals = np.asarray(
            [h.arrival_time if h.arrival_time is not None else t + 1 for t, h in enumerate(items)],
            dtype=int,
        )
        return ids, ps, arrivals
    ps = np.asarray(items, dtype=float)
    ids = np.arange(1, len(ps) + 1)
    return ids, ps, ids


def run_preordered(
    ps: Sequence[float],
    combiner: Combiner | str,
    boundary: BoundarySpec,
) -> TestState:
    """Consume p-values in the given order; stop at the first S_k > u_alpha(k).

    The statistic is centered by the combiner's per-step mean (0 Stouffer,
    2 Fisher, 1 chi-square) so boundaries see a zero-mean martingale.
    """
    combiner = Combiner(combiner)
    _check_compat(combiner, boundary)
    p = np.asarray(ps, dtype=float)
    n = len(p)
    if n == 0:
        raise ValueError("need at least one p-value")
    inc, center = _increments(p, combiner)
    stats = np.cumsum(inc) - center * np.arange(1, n + 1)
    bounds = boundary_curve(boundary, n)
    return _finish(stats, bounds, list(range(1, n + 1)), boundary)


def run_amt_batch(hyps, scheme: MaskScheme, boundary: BoundarySpec) -> TestState:
    """Adaptively ordered test: sort by masked value ascending (ties by id),
    then accumulate missing bits in that order against a Gaussian boundary."""
    if scheme.kind not in (SchemeKind.TENT, SchemeKind.RAILWAY):
        raise ValueError("batch adaptive ordering uses tent or railway bits")
    if boundary.family not in GAUSSIAN_FAMILIES:
        raise IncompatibleBoundaryError("+/-1 bits require a Gaussian-family boundary")
    ids, ps, _ = _ids_ps_arrivals(hyps)
    bits, masked = mask_arrays(ps, scheme)
    order = np.lexsort((ids, masked))
    stats = np.cumsum(bits[order])
    bounds = boundary_curve(boundary, len(ps))
    return _finish(stats, bounds, ids[order].tolist(), boundary)


@dataclass(frozen=True)
class ScreeningRule:
    """Fixed-threshold online screen: hypothesis t enters iff g(p_t) < c."""

    c: float
    adaptive: Callable[[Sequence[float], float], float] | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.c <= 0.5:
            raise ValueError("screening threshold c must lie in (0, 0.5]")


def run_amt_online(
    stream: Iterable,
    rule: ScreeningRule,
    scheme: MaskScheme,
    boundary: BoundarySpec,
    horizon: int | None = None,
) -> TestState:
    """Online adaptive test: include arrival t iff g(p_t) < c (or < c_t from
    the rule's adaptive threshold); the boundary is indexed by inclusions."""
    if boundary.family not in GAUSSIAN_FAMILIES:
        raise IncompatibleBoundaryError("+/-1 bits require a Gaussian-family boundary")
    ids, ps, arrivals_all = _ids_ps_arrivals(_take(stream, horizon))
    bits, masked = mask_arrays(ps, scheme)
    if rule.adaptive is None:
        sel = masked < rule.c
    else:
        thresholds = np.empty(len(ps))
        for t in range(len(ps)):
            # adaptive rules look at a short window of past revealed p-values
            thresholds[t] = rule.adaptive(ps[max(0, t - 10) : t], rule.c)
        sel = masked < thresholds
    idx = np.flatnonzero(sel)
    stats = np.cumsum(bits[idx])
    bounds = boundary_curve(boundary, len(idx)) if len(idx) else np.empty(0)
    return _finish(
        stats, bounds, ids[idx].tolist(), boundary, arrivals=arrivals_all[idx]
    )


def _take(stream: Iterable, horizon: int | None) -> list:
    if horizon is None:
        return list(stream)
    out = []
    for item in stream:
        out.append(item)
        if len(out) >= horizon:
            break
    return out


class ImtSession:
    """Batch interactive session: masked values and covariates are visible,
    bits are revealed one pick at a time while S_k races u_alpha(k)."""

    def __init__(self, hyps, scheme: MaskScheme, boundary: BoundarySpec):
        if boundary.family not in GAUSSIAN_FAMILIES:
            raise IncompatibleBoundaryError("+/-1 bits require a Gaussian-family boundary")
        hs = _as_hypotheses(hyps)
        if len({h.id for h in hs}) != len(hs):
            raise ValueError("hypothesis ids must be unique")
        self.scheme = scheme
        self.boundary = boundary
        ps = np.asarray([h.p for h in hs], dtype=float)
        bits, masked = mask_arrays(ps, scheme)
        self._p = {h.id: float(p) for h, p in zip(hs, ps)}
        self._bit = {h.id: float(b) for h, b in zip(hs, bits)}
        self._masked = {h.id: float(g) for h, g in zip(hs, masked)}
        self._covariates = {h.id: h.covariates for h in hs}
        self.n = len(hs)
        self._bounds_arr = boundary_curve(boundary, self.n)
        self._bounds = self._bounds_arr.tolist()
        self.k = 0
        self.statistic = 0.0
        self.included: list = []
        self._included_set: set = set()
        self.stopped = False
        self.rejected_at: int | None = None
        # preallocated so state snapshots are O(1) views, not copies
        self._stats_buf = np.empty(self.n, dtype=float)
        self.log: list[dict] = []

    def masked_view(self) -> list[MaskedHypothesis]:
        return [
            MaskedHypothesis(id=i, covariates=self._covariates[i], masked=self._masked[i])
            for i in sorted(self._p)
        ]

    @property
    def revealed(self) -> set:
        return set(self._included_set)

    def revealed_p(self, hyp_id) -> float:
        """The full p-value of an already-picked hypothesis; anything else is
        still masked and asking for it is an error."""
        if hyp_id not in self._included_set:
            raise UnknownHypothesisError(f"hypothesis {hyp_id!r} is not revealed")
        return self._p[hyp_id]

    def pick(self, hyp_id) -> tuple[float, "TestState"]:
        if self.stopped:
            raise SessionStoppedError("session is stopped")
        if hyp_id not in self._p:
            raise UnknownHypothesisError(f"unknown hypothesis id {hyp_id!r}")
        if hyp_id in self._included_set:
            raise AlreadyPickedError(f"hypothesis {hyp_id!r} already picked")
        self.k += 1
        self.statistic += self._bit[hyp_id]
        self.included.append(hyp_id)
        self._included_set.add(hyp_id)
        self._stats_buf[self.k - 1] = self.statistic
        bound = self._bounds[self.k - 1]
        if self.statistic > bound:
            self.stopped = True
            self.rejected_at = self.k
        elif self.k == self.n:
            self.stopped = True
        self.log.append(
            {
                "seq": self.k,
                "action": "pick",
                "id": hyp_id,
                "p": self._p[hyp_id],
                "statistic": self.statistic,
                "bound": bound,
            }
        )
        return self._p[hyp_id], self.state

    @property
    def state(self) -> TestState:
        """Snapshot backed by views over the session's append-only buffers
        (cheap enough to take after every pick)."""
        return TestState(
            k=self.k,
            statistic=self.statistic,
            included=self.included,
            boundary=self.boundary,
            stopped=self.stopped,
            rejected_at=self.rejected_at,
            stats=self._stats_buf[: self.k],
            bounds=self._bounds_arr[: self.k],
        )


def imt_session_new(hyps, scheme: MaskScheme, boundary: BoundarySpec):
    """(session, masked view) with all bits hidden and M_0 empty."""
    session = ImtSession(hyps, scheme, boundary)
    return session, session.masked_view()


def imt_pick(session: ImtSession, hyp_id) -> tuple[float, TestState]:
    return session.pick(hyp_id)


class PastReveal(NamedTuple):
    id: int
    p: float
    included: bool


@dataclass(frozen=True)
class DecisionView:
    """What an online decision rule may see: the current arrival's masked
    value and covariates plus every fully revealed past p-value. The current
    bit does not exist on this type."""

    id: int
    arrival: int
    covariates: tuple
    masked: float
    past: tuple


class OnlineImtSession:
    """Online interactive session: each arrival is included or skipped; a
    skipped p-value still enters the filtration for later decisions.

    step() mutates in place; read .state for a snapshot (imt_online_step
    wraps the two for one-call use)."""

    def __init__(self, scheme: MaskScheme, boundary: BoundarySpec, horizon: int | None = None):
        if boundary.family not in GAUSSIAN_FAMILIES:
            raise IncompatibleBoundaryError("+/-1 bits require a Gaussian-family boundary")
        self.scheme = scheme
        self.boundary = boundary
        self.horizon = horizon
        self._bounds: list[float] = []
        self.t = 0
        self.k = 0
        self.statistic = 0.0
        self.included: list = []
        self.history: list[PastReveal] = []
        self.stopped = False
        self.rejected_at: int | None = None
        self._stats_buf = np.empty(64, dtype=float)
        self._arrivals_buf = np.empty(64, dtype=int)

    def _bound(self, k: int) -> float:
        while len(self._bounds) < k:
            grow = max(64, 2 * len(self._bounds))
            self._bounds = [float(b) for b in boundary_curve(self.boundary, grow)]
        return self._bounds[k - 1]

    def view(self, hyp: Hypothesis) -> DecisionView:
        bits, masked = mask_arrays(np.asarray([hyp.p]), self.scheme)
        return DecisionView(
            id=hyp.id,
            arrival=self.t + 1,
            covariates=hyp.covariates,
            masked=float(masked[0]),
            past=tuple(self.history),
        )

    def step(self, hyp: Hypothesis, include: bool) -> None:
        if self.stopped:
            raise SessionStoppedError("session is stopped")
        self.t += 1
        if include:
            bits, _ = mask_arrays(np.asarray([hyp.p]), self.scheme)
            self.k += 1
            if self.k > len(self._stats_buf):
                self._stats_buf = np.concatenate([self._stats_buf, np.empty_like(self._stats_buf)])
                self._arrivals_buf = np.concatenate(
                    [self._arrivals_buf, np.empty_like(self._arrivals_buf)]
                )
            self.statistic += float(bits[0])
            self.included.append(hyp.id)
            self._stats_buf[self.k - 1] = self.statistic
            self._arrivals_buf[self.k - 1] = hyp.arrival_time or self.t
            if self.statistic > self._bound(self.k):
                self.stopped = True
                self.rejected_at = self.k
        self.history.append(PastReveal(id=hyp.id, p=float(hyp.p), included=include))
        if self.horizon is not None and self.t >= self.horizon:
            self.stopped = True

    @property
    def state(self) -> TestState:
        self._bound(max(self.k, 1))
        return TestState(
            k=self.k,
            statistic=self.statistic,
            included=self.included,
            boundary=self.boundary,
            stopped=self.stopped,
            rejected_at=self.rejected_at,
            stats=self._stats_buf[: self.k],
            bounds=np.asarray(self._bounds[: self.k], dtype=float),
            arrivals=self._arrivals_buf[: self.k],
        )


def imt_online_step(session: OnlineImtSession, hyp: Hypothesis, include: bool) -> TestState:
    """One online arrival: include (reveal bit into the statistic) or skip
    (reveal the p-value into the filtration only); returns the new state."""
    session.step(hyp, include)
    return session.state


def session_events(session) -> list[dict]:
    """JSON-lines-ready event log of a batch or online session."""
    if isinstance(session, ImtSession):
        return [dict(e) for e in session.log]
    if isinstance(session, OnlineImtSession):
        return [
            {
                "seq": t + 1,
                "action": "include" if reveal.included else "skip",
                "id": reveal.id,
                "p": reveal.p,
            }
            for t, reveal in enumerate(session.history)
        ]
    raise TypeError(f"unknown session type {type(session)!r}")


def replay_session_log(hyps, events, scheme: MaskScheme, boundary: BoundarySpec) -> ImtSession:
    """Rebuild a batch session from its pick events; the result's statistic
    path and status reproduce the original run exactly."""
    session = ImtSession(hyps, scheme, boundary)
    for event in events:
        if event.get("action") == "pick":
            session.pick(event["id"])
    return session


def replay_online_log(events, scheme: MaskScheme, boundary: BoundarySpec,
                      horizon: int | None = None) -> OnlineImtSession:
    """Rebuild an online session from include/skip events (p-values ride in
    the log since skipped arrivals reveal them into the filtration)."""
    session = OnlineImtSession(scheme, boundary, horizon=horizon)
    for event in events:
        if event.get("action") in ("include", "skip"):
            hyp = Hypothesis(id=event["id"], p=float(event["p"]))
            session.step(hyp, event["action"] == "include")
    return session


def run_imt_online(
    stream: Iterable,
    decide: Callable[[DecisionView], bool],
    scheme: MaskScheme,
    boundary: BoundarySpec,
    horizon: int | None = None,
) -> TestState:
    """Drive an online interactive session with a decision callback that only
    ever sees a DecisionView (current bit structurally absent)."""
    session = OnlineImtSession(scheme, boundary, horizon=horizon)
    for hyp in _as_hypotheses_iter(stream):
        session.step(hyp, bool(decide(session.view(hyp))))
        if session.stopped:
            break
    if not session.stopped:
        session.stopped = True
    return session.state


def _as_hypotheses_iter(stream: Iterable) -> Iterator[Hypothesis]:
    for t, item in enumerate(stream, start=1):
        if isinstance(item, Hypothesis):
            yield item
        else:
            yield Hypothesis(id=t, p=float(item))


def run_calibrator_test(
    hyps,
    scheme: MaskScheme,
    alpha: float,
    order: str | Sequence = "masked",
) -> TestState:
    """Product-martingale test: accumulate log f(p_i) in the requested order
    and reject once the sum reaches log(1/alpha) (Ville's inequality)."""
    if scheme.kind not in (SchemeKind.CALIBRATOR, SchemeKind.CALIBRATOR_MIXTURE):
        raise ValueError("run_calibrator_test requires a calibrator scheme")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    ids, ps, _ = _ids_ps_arrivals(hyps)
    bits = calibrator_log_bits(ps, scheme)
    if isinstance(order, str):
        if order == "masked":
            # H(p) increases with the masked value on both branches, so
            # sorting by H(p) yields the masked order without solving the
            # branch equation per point
            perm = np.lexsort((ids, masked_order_key(ps, scheme)))
        elif order == "given":
            perm = np.arange(len(ps))
        else:
            raise ValueError(f"unknown ordering {order!r}")
    else:
        pos = {int(i): idx for idx, i in enumerate(ids)}
        perm = np.asarray([pos[int(i)] for i in order])
    stats = np.cumsum(bits[perm])
    bounds = np.full(len(ps), math.log(1.0 / alpha))
    return _finish(stats, bounds, ids[perm].tolist(), None, strict=False)


def bonferroni_batch(ps: Sequence[float], alpha: float) -> bool:
    """Reject iff min p <= alpha / n."""
    p = np.asarray(ps, dtype=float)
    return bool(p.min() <= alpha / len(p))


@lru_cache(maxsize=8)
def _weight_norm() -> float:
    """sum_{k>=2} 1/(k log^2 k), by partial sum plus Euler-Maclaurin tail."""
    ks = np.arange(2, 10_000_001, dtype=float)
    partial = float(np.sum(1.0 / (ks * np.log(ks) ** 2)))
    edge = 10_000_001.0
    tail = 1.0 / math.log(edge) + 0.5 / (edge * math.log(edge) ** 2)
    return partial + tail


def online_bonferroni_weights(alpha: float, ks) -> np.ndarray:
    """Default spending sequence alpha_k = A/(k log^2 k) for k > 1, alpha_1=0,
    with A normalizing the infinite sum to alpha."""
    karr = np.asarray(ks, dtype=float)
    a_const = alpha / _weight_norm()
    with np.errstate(divide="ignore"):
        out = a_const / (karr * np.log(karr) ** 2)
    return np.where(karr < 2, 0.0, out)


def bonferroni_online(
    stream: Iterable,
    alpha: float = 0.05,
    weights: Sequence[float] | None = None,
    horizon: int | None = None,
) -> TestState:
    """Reject at the first arrival with p_k <= alpha_k."""
    hs = _as_hypotheses(_take(stream, horizon))
    ps = np.asarray([h.p for h in hs], dtype=float)
    n = len(ps)
    if weights is None:
        alphas = online_bonferroni_weights(alpha, np.arange(1, n + 1))
    else:
        alphas = np.asarray(weights, dtype=float)[:n]
        if alphas.sum() > alpha + 1e-9:
            raise ValueError("significance weights sum above alpha")
    hits = ps <= alphas
    idx = int(np.argmax(hits)) if bool(hits.any()) else None
    stop = idx + 1 if idx is not None else n
    arrivals = np.asarray([h.arrival_time or (t + 1) for t, h in enumerate(hs[:stop])], dtype=int)
    return TestState(
        k=stop,
        statistic=float(ps[stop - 1]) if stop else 1.0,
        included=[h.id for h in hs[:stop]],
        boundary=None,
        stopped=True,
        rejected_at=stop if idx is not None else None,
        stats=ps[:stop].astype(float),
        bounds=alphas[:stop].astype(float),
        arrivals=arrivals,
    )


def batch_stouffer(ps: Sequence[float], alpha: float) -> bool:
    """Classical one-shot Stouffer: S_n > sqrt(n) * Phi^{-1}(1-alpha)."""
    p = np.asarray(ps, dtype=float)
    s = float(_sps.norm.isf(np.clip(p, _PCLIP_LO, _PCLIP_HI)).sum())
    return s > math.sqrt(len(p)) * float(_sps.norm.isf(alpha))


def batch_fisher(ps: Sequence[float], alpha: float) -> bool:
    """Classical one-shot Fisher: -2 sum log p > chi^2_{2n, 1-alpha}."""
    p = np.asarray(ps, dtype=float)
    s = float(-2.0 * np.log(np.clip(p, _LOG_CLIP, None)).sum())
    return s > float(_sps.chi2.isf(alpha, 2 * len(p)))

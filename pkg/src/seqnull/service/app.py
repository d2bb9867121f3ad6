"""HTTP session service for live interactive global-null testing.

Endpoints (all JSON unless noted):
    POST /sessions                      create from p-values or a scenario
    GET  /sessions                      list session ids
    GET  /sessions/{id}/view            masked board (no bits, no truth)
    POST /sessions/{id}/pick            reveal one hypothesis, update S_k
    GET  /sessions/{id}/suggest         ranked candidates from a policy
    GET  /sessions/{id}/trajectory      (k, S_k, u(k), anytime p) points
    GET  /sessions/{id}/log             JSON-lines event log download
    GET  /sessions/{id}/events          server-sent event stream

Information hygiene: responses are built from explicit pydantic models that
carry masked values, revealed p-values and statistics only; hidden bits and
scenario truth labels have no representation anywhere in the API layer.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from typing import Iterator

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import PlainTextResponse, StreamingResponse
from pydantic import BaseModel, Field

from ..boundaries import BoundarySpec, Family, invert_boundary
from ..engines import (
    AlreadyPickedError,
    Hypothesis,
    ImtSession,
    SessionStoppedError,
    UnknownHypothesisError,
)
from ..masking import MaskScheme
from ..models import EMData, FreeStructure, GridSplineStructure, TwoGroupsModel, em_fit
from ..scenarios import generate, scenario_from_json
from ..harness import smoothed_grid_score
from .store import SessionMeta, SessionStore
from scipy import stats as _sps

__all__ = ["build_app"]


class CreateSession(BaseModel):
    alpha: float | None = None
    boundary: dict | None = None
    scheme: dict | None = None
    p_values: list[float] | None = None
    hypotheses: list[dict] | None = None
    scenario: dict | None = None


class PickRequest(BaseModel):
    hypothesis_id: int


class BoardEntry(BaseModel):
    id: int
    covariates: list[float] = Field(default_factory=list)
    masked: float
    picked: bool = False
    revealed_p: float | None = None


class ViewResponse(BaseModel):
    session_id: str
    status: str
    k: int
    statistic: float
    entries: list[BoardEntry]


class PickEvent(BaseModel):
    seq: int
    action: str
    k: int
    id: int
    revealed_p: float
    statistic: float
    bound: float
    p_anytime: float
    status: str
    timestamp: float


class TrajectoryPointModel(BaseModel):
    k: int
    statistic: float
    bound: float
    p_anytime: float


class TrajectoryResponse(BaseModel):
    session_id: str
    status: str
    points: list[TrajectoryPointModel]


class SuggestEntry(BaseModel):
    id: int
    posterior: float


class SuggestResponse(BaseModel):
    session_id: str
    policy: str
    candidates: list[SuggestEntry]


class _Live:
    """In-memory face of a persisted session: engine + lock + event buffer."""

    def __init__(self, meta: SessionMeta):
        self.meta = meta
        cfg = meta.config
        self.scheme = MaskScheme.from_json(cfg["scheme"])
        self.boundary = BoundarySpec.from_json(cfg["boundary"])
        hyps = [
            Hypothesis(id=h["id"], p=h["p"], covariates=tuple(h.get("covariates", ())))
            for h in meta.hypotheses
        ]
        self.session = ImtSession(hyps, self.scheme, self.boundary)
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.seq = 0
        self.p_anytime = 1.0
        self.anytime_path: list[float] = []
        self.new_event = threading.Condition()

    def next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def apply_pick(self, hyp_id: int) -> dict:
        p, state = self.session.pick(hyp_id)
        k = state.k
        alpha_k = invert_boundary(self.boundary, state.statistic, k)
        self.p_anytime = min(self.p_anytime, alpha_k)
        self.anytime_path.append(self.p_anytime)
        event = {
            "seq": self.next_seq(),
            "action": "pick",
            "k": k,
            "id": hyp_id,
            "revealed_p": p,
            "statistic": state.statistic,
            "bound": float(state.bounds[k - 1]),
            "p_anytime": self.p_anytime,
            "status": state.status,
            "timestamp": time.time(),
        }
        self.events.append(event)
        with self.new_event:
            self.new_event.notify_all()
        return event


def build_app(data_dir, default_alpha: float = 0.05) -> FastAPI:
    app = FastAPI(title="seqnull session service")
    store = SessionStore(data_dir)
    live: dict[str, _Live] = {}
    registry_lock = threading.Lock()

    def get_live(session_id: str) -> _Live:
        with registry_lock:
            if session_id in live:
                return live[session_id]
            if not store.exists(session_id):
                raise HTTPException(404, detail={"code": "unknown_session"})
            ls = _Live(store.load_meta(session_id))
            # replay the persisted log through the engine
            stored = store.load_events(session_id)
            for event in stored:
                if event.get("action") == "pick":
                    ls.apply_pick(event["id"])
            ls.events = stored
            ls.seq = max((e.get("seq", 0) for e in stored), default=0)
            live[session_id] = ls
            return ls

    @app.post("/sessions")
    def create_session(req: CreateSession):
        alpha = req.alpha if req.alpha is not None else default_alpha
        if not 0.0 < alpha < 1.0:
            raise HTTPException(400, detail={"code": "bad_alpha"})
        scheme = req.scheme or {"kind": "Tent"}
        boundary = req.boundary or {"family": Family.GAUSSIAN_STITCHED.value, "alpha": alpha}
        try:
            scheme_obj = MaskScheme.from_json(scheme)
            boundary_obj = BoundarySpec.from_json(boundary)
        except (ValueError, KeyError) as exc:
            raise HTTPException(400, detail={"code": "bad_config", "message": str(exc)})
        extras: dict = {}
        if req.scenario is not None:
            gen = generate(scenario_from_json(req.scenario))
            hyps = [
                {"id": h.id, "p": h.p, "covariates": list(h.covariates)}
                for h in gen.hypotheses
            ]
            # truth labels are deliberately dropped here
            extras = {
                k: v for k, v in gen.extras.items() if k in ("side", "parents")
            }
        elif req.hypotheses is not None:
            hyps = [
                {
                    "id": int(h["id"]),
                    "p": float(h["p"]),
                    "covariates": list(h.get("covariates", ())),
                }
                for h in req.hypotheses
            ]
        elif req.p_values is not None:
            hyps = [{"id": i, "p": float(p), "covariates": []} for i, p in enumerate(req.p_values)]
        else:
            raise HTTPException(400, detail={"code": "no_hypotheses"})
        if any(not 0.0 <= h["p"] <= 1.0 for h in hyps):
            raise HTTPException(400, detail={"code": "bad_p_value"})
        if len({h["id"] for h in hyps}) != len(hyps):
            raise HTTPException(400, detail={"code": "duplicate_ids"})
        session_id = uuid.uuid4().hex[:12]
        meta = SessionMeta(
            session_id=session_id,
            config={
                "alpha": alpha,
                "scheme": scheme_obj.to_json(),
                "boundary": boundary_obj.to_json(),
                "extras": extras,
            },
            hypotheses=hyps,
        )
        store.create(meta)
        with registry_lock:
            live[session_id] = _Live(meta)
        return _view_response(session_id, live[session_id]).model_dump()

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.list_sessions()}

    def _view_response(session_id: str, ls: _Live) -> ViewResponse:
        sess = ls.session
        entries = []
        for h in sess.masked_view():
            picked = h.id in sess.revealed
            entries.append(
                BoardEntry(
                    id=h.id,
                    covariates=[float(v) for v in h.covariates],
                    masked=h.masked,
                    picked=picked,
                    revealed_p=sess.revealed_p(h.id) if picked else None,
                )
            )
        return ViewResponse(
            session_id=session_id,
            status=sess.state.status,
            k=sess.k,
            statistic=sess.statistic,
            entries=entries,
        )

    @app.get("/sessions/{session_id}/view")
    def view(session_id: str):
        ls = get_live(session_id)
        with ls.lock:
            return _view_response(session_id, ls).model_dump()

    @app.post("/sessions/{session_id}/pick")
    def pick(session_id: str, req: PickRequest):
        ls = get_live(session_id)
        with ls.lock:
            try:
                event = ls.apply_pick(req.hypothesis_id)
            except SessionStoppedError:
                raise HTTPException(409, detail={"code": "session_stopped"})
            except AlreadyPickedError:
                raise HTTPException(409, detail={"code": "already_picked"})
            except UnknownHypothesisError:
                raise HTTPException(404, detail={"code": "unknown_hypothesis"})
            store.append_event(session_id, event)
            return PickEvent(**event).model_dump()

    @app.get("/sessions/{session_id}/trajectory")
    def trajectory(session_id: str):
        ls = get_live(session_id)
        with ls.lock:
            sess = ls.session
            state = sess.state
            points = [
                TrajectoryPointModel(
                    k=i + 1,
                    statistic=float(state.stats[i]),
                    bound=float(state.bounds[i]),
                    p_anytime=float(ls.anytime_path[i]),
                )
                for i in range(state.k)
            ]
            return TrajectoryResponse(
                session_id=session_id, status=sess.state.status, points=points
            ).model_dump()

    @app.get("/sessions/{session_id}/suggest")
    def suggest(session_id: str, policy: str = Query("smallest-masked"), count: int = Query(5)):
        ls = get_live(session_id)
        with ls.lock:
            sess = ls.session
            view_snapshot = sess.masked_view()
            included = list(sess.included)
            revealed = {i: sess.revealed_p(i) for i in sess.revealed}
            extras = ls.meta.config.get("extras", {})
        try:
            ranked = _rank_candidates(policy, view_snapshot, included, revealed, extras)
        except ValueError as exc:
            raise HTTPException(400, detail={"code": "bad_policy", "message": str(exc)})
        event = {
            "seq": ls.next_seq(),
            "action": "suggest",
            "policy": policy,
            "candidates": [int(i) for i, _ in ranked[:count]],
            "timestamp": time.time(),
        }
        store.append_event(session_id, event)
        ls.events.append(event)
        return SuggestResponse(
            session_id=session_id,
            policy=policy,
            candidates=[SuggestEntry(id=int(i), posterior=float(s)) for i, s in ranked[:count]],
        ).model_dump()

    @app.get("/sessions/{session_id}/log", response_class=PlainTextResponse)
    def log(session_id: str):
        get_live(session_id)
        return store.raw_log(session_id)

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, from_seq: int = Query(0), once: bool = Query(False)):
        """SSE stream of session events. With once=true the current backlog
        is emitted and the stream ends (for polling clients and tests)."""
        ls = get_live(session_id)

        def stream() -> Iterator[str]:
            sent = from_seq
            idle = 0.0
            while True:
                with ls.lock:
                    pending = [e for e in ls.events if e.get("seq", 0) > sent]
                    stopped = ls.session.stopped
                for event in pending:
                    sent = event.get("seq", sent)
                    yield f"id: {sent}\ndata: {json.dumps(event)}\n\n"
                    idle = 0.0
                if (stopped or once) and not pending:
                    yield "event: end\ndata: {}\n\n"
                    return
                if not pending:
                    with ls.new_event:
                        ls.new_event.wait(timeout=0.25)
                    idle += 0.25
                    if idle >= 5.0:
                        # periodic comment keeps proxies open and gives the
                        # server a chance to notice dropped clients
                        yield ": keepalive\n\n"
                        idle = 0.0

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def _rank_candidates(policy, view_snapshot, included, revealed, extras):
    """Rank admissible next picks; never sees bits or truth."""
    inc = set(included)
    unpicked = [h for h in view_snapshot if h.id not in inc]
    if not unpicked:
        return []
    if policy == "smallest-masked":
        ranked = sorted(unpicked, key=lambda h: (h.masked, h.id))
        return [(h.id, 0.5 - h.masked) for h in ranked]
    if policy == "em":
        posterior = _em_posterior(view_snapshot, revealed)
        ranked = sorted(unpicked, key=lambda h: (-posterior[h.id], h.masked, h.id))
        return [(h.id, posterior[h.id]) for h in ranked]
    if policy == "grid":
        side = extras.get("side")
        if side is None or any(len(h.covariates) < 2 for h in view_snapshot):
            raise ValueError("grid policy requires 2-D grid covariates")
        masked = np.full(side * side, 0.5)
        for h in view_snapshot:
            masked[int(h.covariates[0]) * side + int(h.covariates[1])] = h.masked
        score = smoothed_grid_score(masked, side)
        cell_score = {
            h.id: score[int(h.covariates[0]) * side + int(h.covariates[1])]
            for h in view_snapshot
        }
        coords = {h.id: (int(h.covariates[0]), int(h.covariates[1])) for h in view_snapshot}
        occupied = {coords[i] for i in inc}
        if not inc:
            candidates = unpicked
        else:
            candidates = [
                h
                for h in unpicked
                if any(
                    (coords[h.id][0] + dr, coords[h.id][1] + dc) in occupied
                    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1))
                )
            ]
        ranked = sorted(candidates, key=lambda h: (-cell_score[h.id], h.masked, h.id))
        return [(h.id, cell_score[h.id]) for h in ranked]
    if policy == "tree":
        parents = extras.get("parents")
        if parents is None:
            raise ValueError("tree policy requires a parent map")
        if not inc:
            admissible = {i for i, p in enumerate(parents) if p is None or p < 0}
        else:
            admissible = {
                child
                for child, p in enumerate(parents)
                if p is not None and p >= 0 and p in inc and child not in inc
            }
        candidates = [h for h in unpicked if h.id in admissible]
        ranked = sorted(candidates, key=lambda h: (h.masked, h.id))
        return [(h.id, 0.5 - h.masked) for h in ranked]
    raise ValueError(f"unknown policy {policy!r}")


def _em_posterior(view_snapshot, revealed) -> dict:
    ids = [h.id for h in view_snapshot]
    masked = np.array([h.masked for h in view_snapshot])
    z = _sps.norm.isf(np.clip(masked, 1e-16, 1 - 1e-16))
    unmasked = np.zeros(len(ids), dtype=bool)
    for idx, hid in enumerate(ids):
        if hid in revealed:
            unmasked[idx] = True
            z[idx] = float(_sps.norm.isf(np.clip(revealed[hid], 1e-16, 1 - 1e-16)))
    covs = [h.covariates for h in view_snapshot]
    use_spline = len(ids) <= 2500 and all(len(c) >= 2 for c in covs)
    if use_spline:
        structure = GridSplineStructure()
        covariates = np.array([c[:2] for c in covs], dtype=float)
    else:
        structure = FreeStructure()
        covariates = None
    data = EMData(z=np.abs(z) * ~unmasked + z * unmasked, unmasked=unmasked, covariates=covariates)
    model0 = TwoGroupsModel(mu=2.0, pi=np.full(len(ids), 0.1), structure=structure)
    fit = em_fit(data, model0, max_iters=30, tol=1e-6)
    return {hid: float(p) for hid, p in zip(ids, fit.posterior)}

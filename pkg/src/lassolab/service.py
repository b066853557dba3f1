"""JSON session service wrapping the exploration calculus.

Endpoints
---------
POST /sessions                 create a session from model + property text
POST /sessions/{id}/op         apply forward|backward|alt_state|alt_event|set_type
GET  /sessions/{id}/trace      current trace payload
GET  /sessions/{id}/enabled    dry-run result for every event type (cached per revision)
GET  /sessions/{id}/enabled/stream   same, streamed one type per SSE event
GET  /healthz

Payloads use stable field names; traces render states as maps from variable
instance to value.  Errors carry {code, message, location?}.  Sessions are
in-memory with idle expiry; requests for one session are serialised, and a
process-wide semaphore caps concurrent checker queries.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from .egs import CompileError, CompiledModel, ModelError, compile_lks, parse_model
from .encode import encode_state
from .explorer import (
    BoundaryError,
    ExplorationState,
    NoAlternative,
    PropertyHolds,
    alt_event,
    alt_state,
    enabled_types,
    init_session,
    set_event_type,
    step_backward,
    step_forward,
)
from .seltl import ParseError, TypeAtom, UnknownAtomError, bind, parse_formula, text


@dataclass
class Session:
    sid: str
    created: float
    model_name: str
    property_text: str
    bound: int
    mode: str
    compiled: CompiledModel
    state: ExplorationState
    revision: int = 0
    last_used: float = field(default_factory=time.monotonic)
    lock: threading.RLock = field(default_factory=threading.RLock)
    enabled_cache: dict[int, dict] = field(default_factory=dict)
    enabled_runs: int = 0  # number of actual dry-run computations (test hook)


def trace_payload(compiled: CompiledModel, state: ExplorationState) -> dict:
    lasso = state.pi
    return {
        "states": [
            {"id": int(s), "props": compiled.state_props(s)} for s in lasso.states
        ],
        "events": [
            {
                "name": compiled.lks.events[e].name,
                "args": list(compiled.lks.events[e].args),
                "type": compiled.lks.type_names[compiled.lks.event_type(e)],
            }
            for e in lasso.events
        ],
        "loopStart": lasso.loop_start,
        "focus": state.i,
    }


def error_payload(code: str, message: str, line: int | None = None, col: int | None = None):
    out: dict = {"code": code, "message": message}
    if line:
        out["location"] = {"line": line, "col": col or 0}
    return out


def create_app(*, jobs: int = 1, max_concurrent: int = 4, session_ttl: float = 1800.0) -> FastAPI:
    app = FastAPI(title="lassolab", docs_url=None, redoc_url=None)
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    query_slots = threading.Semaphore(max_concurrent)

    def purge_expired() -> None:
        now = time.monotonic()
        with registry_lock:
            for sid in [s for s, sess in sessions.items() if now - sess.last_used > session_ttl]:
                del sessions[sid]

    def get_session(sid: str) -> Session | None:
        purge_expired()
        with registry_lock:
            sess = sessions.get(sid)
            if sess is not None:
                sess.last_used = time.monotonic()
            return sess

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/sessions")
    def create_session(payload: dict):
        model_src = payload.get("model", "")
        property_text = payload.get("property", "")
        bound = int(payload.get("bound", 10))
        mode = payload.get("mode", "counterexample")
        add_idle = bool(payload.get("add_idle", False))
        try:
            compiled = compile_lks(parse_model(model_src), add_idle=add_idle)
        except ModelError as err:
            return JSONResponse(
                error_payload("model_error", str(err), err.line, err.col), status_code=422
            )
        except CompileError as err:
            return JSONResponse(error_payload("compile_error", str(err)), status_code=422)
        try:
            phi = bind(parse_formula(property_text), compiled.lks)
        except ParseError as err:
            return JSONResponse(
                error_payload("property_error", str(err), err.line, err.col), status_code=422
            )
        except UnknownAtomError as err:
            return JSONResponse(error_payload("unknown_atom", str(err)), status_code=422)
        try:
            with query_slots:
                outcome = init_session(compiled.lks, phi, bound, mode)
        except ValueError as err:
            return JSONResponse(error_payload("bad_request", str(err)), status_code=422)
        if isinstance(outcome, PropertyHolds):
            return {"propertyHolds": {"bound": outcome.bound}}
        sid = uuid.uuid4().hex
        sess = Session(
            sid=sid,
            created=time.time(),
            model_name=compiled.system.name,
            property_text=property_text,
            bound=bound,
            mode=mode,
            compiled=compiled,
            state=outcome,
        )
        with registry_lock:
            sessions[sid] = sess
        return {
            "session": {
                "id": sid,
                "model": sess.model_name,
                "property": property_text,
                "bound": bound,
                "mode": mode,
            },
            "revision": sess.revision,
            "trace": trace_payload(compiled, outcome),
        }

    @app.post("/sessions/{sid}/op")
    def apply_op(sid: str, payload: dict):
        sess = get_session(sid)
        if sess is None:
            return JSONResponse(error_payload("unknown_session", sid), status_code=404)
        op = payload.get("op")
        with sess.lock:
            st = sess.state
            try:
                if op == "forward":
                    nxt = step_forward(st)
                elif op == "backward":
                    nxt = step_backward(st)
                elif op == "alt_state":
                    with query_slots:
                        nxt = alt_state(st)
                elif op == "alt_event":
                    with query_slots:
                        nxt = alt_event(st)
                elif op == "set_type":
                    tname = payload.get("type", "")
                    with query_slots:
                        nxt = set_event_type(st, tname)
                else:
                    return JSONResponse(
                        error_payload("unknown_op", f"unknown op {op!r}"), status_code=422
                    )
            except BoundaryError as err:
                return JSONResponse(error_payload("boundary", str(err)), status_code=409)
            except KeyError as err:
                return JSONResponse(error_payload("unknown_type", str(err)), status_code=422)
            if isinstance(nxt, NoAlternative):
                return {"noAlternative": True, "revision": sess.revision, "focus": st.i}
            trace_changed = nxt.pi != st.pi
            sess.state = nxt
            sess.revision += 1
            out = {"revision": sess.revision, "focus": nxt.i}
            if trace_changed or op in ("alt_state", "alt_event", "set_type"):
                out["trace"] = trace_payload(sess.compiled, nxt)
            return out

    @app.get("/sessions/{sid}/trace")
    def get_trace(sid: str):
        sess = get_session(sid)
        if sess is None:
            return JSONResponse(error_payload("unknown_session", sid), status_code=404)
        with sess.lock:
            return {
                "revision": sess.revision,
                "trace": trace_payload(sess.compiled, sess.state),
            }

    def compute_enabled(sess: Session) -> dict:
        probes = enabled_types(sess.state, jobs=jobs)
        return {
            "types": {
                name: {"enabled": probe.enabled, "ms": round(probe.query_ms, 3)}
                for name, probe in probes.items()
            }
        }

    @app.get("/sessions/{sid}/enabled")
    def get_enabled(sid: str):
        sess = get_session(sid)
        if sess is None:
            return JSONResponse(error_payload("unknown_session", sid), status_code=404)
        with sess.lock:
            cached = sess.enabled_cache.get(sess.revision)
            if cached is None:
                with query_slots:
                    cached = compute_enabled(sess)
                sess.enabled_cache = {sess.revision: cached}
                sess.enabled_runs += 1
            return {"revision": sess.revision, **cached}

    @app.get("/sessions/{sid}/enabled/stream")
    def stream_enabled(sid: str, request: Request):
        sess = get_session(sid)
        if sess is None:
            return JSONResponse(error_payload("unknown_session", sid), status_code=404)

        def generate():
            with sess.lock:
                revision = sess.revision
                cached = sess.enabled_cache.get(revision)
                if cached is not None:
                    for name, entry in cached["types"].items():
                        yield _sse({"type": name, **entry, "revision": revision})
                    yield _sse({"done": True, "revision": revision})
                    return
                lks = sess.state.lks
                st = sess.state
                collected: dict[str, dict] = {}
                from .checker import PointConstraint
                from .seltl import And

                here = encode_state(lks, st.focus_state())
                for tid, name in enumerate(lks.type_names):
                    start = time.perf_counter()
                    with query_slots:
                        result = st.engine.check_constrained(
                            PointConstraint(st.pi, st.i, And(here, TypeAtom(name, tid)))
                        )
                    ms = round((time.perf_counter() - start) * 1000, 3)
                    entry = {"enabled": result.is_counterexample, "ms": ms}
                    collected[name] = entry
                    yield _sse({"type": name, **entry, "revision": revision})
                sess.enabled_cache = {revision: {"types": collected}}
                sess.enabled_runs += 1
                yield _sse({"done": True, "revision": revision})

        return StreamingResponse(generate(), media_type="text/event-stream")

    app.state.sessions = sessions
    return app


def _sse(data: dict) -> str:
    return f"data: {json.dumps(data, sort_keys=True)}\n\n"

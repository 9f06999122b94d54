"""JSON-over-HTTP service exposing the pipeline to humans and the companion UI."""

from __future__ import annotations

import json
import threading
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from .compiler import render_debug_svg
from .composition import builtin_templates, find_template, template_to_dict
from .detailing import ExpansionConfig
from .errors import (
    BackendError,
    BadK,
    EmptyCorpus,
    EmptyInput,
    EmptyPrompt,
    InvalidEdit,
    InvalidPath,
    InvalidScene,
    InvalidTemplate,
    MalformedOutput,
    NotFound,
    OrphanPath,
    ParseError,
    PathNotFound,
    SemanticDrawError,
    StageOrderViolation,
)
from .pipeline import (
    AdvanceParams,
    PipelineBackends,
    SessionStore,
    advance,
    create_session,
    iterate,
    parse_edit,
    session_to_jsonable,
    stub_backends,
)
from .scene import Canvas, LightingSpec, StyleSpec

_STATUS_BY_ERROR: tuple[tuple[type, int], ...] = (
    (NotFound, 404),
    (PathNotFound, 404),
    (StageOrderViolation, 409),
    (BackendError, 502),
    (MalformedOutput, 502),
    (InvalidScene, 422),
    (EmptyInput, 422),
    (InvalidEdit, 422),
    (InvalidTemplate, 422),
    (ParseError, 422),
    (EmptyPrompt, 422),
    (BadK, 422),
    (InvalidPath, 422),
    (OrphanPath, 422),
    (EmptyCorpus, 422),
)


def _error_status(exc: SemanticDrawError) -> int:
    for klass, status in _STATUS_BY_ERROR:
        if isinstance(exc, klass):
            return status
    return 500


def _error_body(exc: SemanticDrawError) -> dict:
    body = {"error": type(exc).__name__, "detail": str(exc)}
    if isinstance(exc, InvalidScene):
        body["violations"] = [
            {"path": v.path, "rule": v.rule, "message": v.message} for v in exc.violations
        ]
    return body


def _style_from_payload(data: Optional[dict]) -> Optional[StyleSpec]:
    if not data:
        return None
    return StyleSpec(
        style_name=str(data.get("style_name", "flat-infographic")),
        modifiers=tuple(str(m) for m in data.get("modifiers", [])),
        abstraction_level=int(data.get("abstraction_level", 5)),
    )


def _params_from_payload(data: Optional[dict]) -> AdvanceParams:
    data = data or {}
    expansion = data.get("expansion") or {}
    lighting = data.get("lighting")
    canvas = data.get("canvas")
    return AdvanceParams(
        style_name=data.get("style_name"),
        style_modifiers=tuple(str(m) for m in data.get("style_modifiers", [])),
        abstraction_level=data.get("abstraction_level"),
        linkage=str(data.get("linkage", "average")),
        k=data.get("k"),
        template_id=data.get("template_id"),
        seed=int(data.get("seed", 0)),
        canvas=(
            Canvas(int(canvas["width_px"]), int(canvas["height_px"]), canvas.get("aspect_label"))
            if canvas else None
        ),
        lighting=(
            LightingSpec(
                light_direction=str(lighting.get("light_direction", "top-left")),
                mood=str(lighting.get("mood", "neutral")),
                shadow_strength=float(lighting.get("shadow_strength", 0.25)),
                reflection=bool(lighting.get("reflection", False)),
            )
            if lighting else None
        ),
        expansion=ExpansionConfig(
            max_depth=int(expansion.get("max_depth", 2)),
            max_children=int(expansion.get("max_children", 4)),
            element_budget=int(expansion.get("element_budget", 64)),
        ),
        prompt_suffix=str(data.get("prompt_suffix", "")),
    )


def _expansion_from_payload(data: Optional[dict]) -> Optional[ExpansionConfig]:
    if not data:
        return None
    return ExpansionConfig(
        max_depth=int(data.get("max_depth", 2)),
        max_children=int(data.get("max_children", 4)),
        element_budget=int(data.get("element_budget", 64)),
    )


async def _read_json(request: Request) -> dict:
    body = await request.body()
    if not body:
        return {}
    try:
        data = json.loads(body)
    except ValueError as exc:
        raise ParseError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("request body must be a JSON object")
    return data


def create_app(
    sessions_dir: str,
    allow_origin: Optional[str] = None,
    backends: Optional[PipelineBackends] = None,
) -> FastAPI:
    store = SessionStore(sessions_dir)
    if backends is None:
        backends = stub_backends(sessions_dir)

    app = FastAPI(title="semanticdraw", docs_url=None, redoc_url=None)
    guards: dict[str, threading.Lock] = {}
    registry = threading.Lock()

    def guard(session_id: str) -> threading.Lock:
        with registry:
            return guards.setdefault(session_id, threading.Lock())

    if allow_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(SemanticDrawError)
    async def handle_domain_error(request: Request, exc: SemanticDrawError):
        return JSONResponse(status_code=_error_status(exc), content=_error_body(exc))

    @app.get("/templates")
    def get_templates():
        return [template_to_dict(t) for t in builtin_templates()]

    @app.post("/sessions", status_code=201)
    async def post_session(request: Request):
        payload = await _read_json(request)
        input_text = str(payload.get("input_text", ""))
        style = _style_from_payload(payload.get("style"))
        state = create_session(input_text, store, style=style)
        return session_to_jsonable(state)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_to_jsonable(store.load(session_id))

    @app.post("/sessions/{session_id}/advance")
    async def post_advance(session_id: str, request: Request):
        payload = await _read_json(request)
        params = _params_from_payload(payload.get("params"))
        with guard(session_id):
            state = store.load(session_id)
            state = advance(state, params, store=store, backends=backends)
        return session_to_jsonable(state)

    @app.post("/sessions/{session_id}/iterate")
    async def post_iterate(session_id: str, request: Request):
        payload = await _read_json(request)
        edits = [parse_edit(e) for e in payload.get("edits", [])]
        expand = _expansion_from_payload(payload.get("expand"))
        with guard(session_id):
            state = store.load(session_id)
            state = iterate(state, edits, expand, store=store, backends=backends)
        return session_to_jsonable(state)

    @app.get("/sessions/{session_id}/iterations/{n}/svg")
    def get_iteration_svg(session_id: str, n: int):
        state = store.load(session_id)
        if not (0 <= n < len(state.iterations)):
            raise NotFound(f"session {session_id} has no iteration {n}")
        record = state.iterations[n]
        template = find_template(state.template_id)
        svg = render_debug_svg(record.scene_snapshot, template)
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/sessions/{session_id}/iterations/{n}/prompt")
    def get_iteration_prompt(session_id: str, n: int):
        state = store.load(session_id)
        if not (0 <= n < len(state.iterations)):
            raise NotFound(f"session {session_id} has no iteration {n}")
        return PlainTextResponse(state.iterations[n].compiled_prompt)

    return app

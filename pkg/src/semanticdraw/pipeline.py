"""Six-stage session state machine with persistence and iterative refinement.

Stages run strictly in order (Input, Creativity, Theme, Composition,
Detailing, Generate); Generate re-runs on every further advance and
`iterate` loops edited detail back through fusion and regeneration.
Every mutating operation is atomic against the persisted session file:
failures leave it byte-identical.
"""

from __future__ import annotations

import json
import tempfile
import threading
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional, Sequence

try:
    import fcntl
except ImportError:
    fcntl = None

from .backends import (
    FIXED_STYLES,
    ImageClient,
    ImageRequest,
    StubImageClient,
    StubTextClient,
    TextClient,
    image_generate,
    stable_hash,
    style_request,
    text_complete,
)
from .compiler import (
    color_from_dict,
    compile_prompt,
    emit_canonical,
    scene_from_jsonable,
    scene_hash,
    scene_to_jsonable,
    style_from_dict,
)
from .composition import builtin_templates, find_template, select_composition
from .detailing import (
    ExpansionConfig,
    apply_lighting,
    expand_recursive,
    fuse_history,
    populate_scene,
)
from .errors import (
    EmptyInput,
    InvalidEdit,
    InvalidScene,
    NotFound,
    ParseError,
    PathNotFound,
    StageOrderViolation,
)
from .scene import (
    DEFAULT_CANVAS,
    DEFAULT_LIGHTING,
    DETAIL_FIELDS,
    Canvas,
    CompositionTemplate,
    DetailEntry,
    DetailSet,
    IterationRecord,
    LightingSpec,
    SceneGraph,
    StyleSpec,
    ThemeConcept,
    detailset_to_scene,
    rect_from,
    require_valid_structure,
    scene_to_detailset,
)
from .themes import cluster, derive_theme, extract_keywords

STAGES = ("Input", "Creativity", "Theme", "Composition", "Detailing", "Generate")


def stage_index(stage: str) -> int:
    return STAGES.index(stage)


def now_utc() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class SessionState:
    id: str
    input_text: str
    stage: str
    created_at: str
    updated_at: str
    style: Optional[StyleSpec] = None
    theme: str = ""
    concepts: tuple[ThemeConcept, ...] = ()
    template_id: str = ""
    current_scene: Optional[SceneGraph] = None
    iterations: tuple[IterationRecord, ...] = ()


@dataclass(frozen=True)
class PipelineBackends:
    """Client bundle for a pipeline run; judge defaults to the text client."""

    text: Optional[TextClient] = None
    image: Optional[ImageClient] = None
    judge: Optional[TextClient] = None
    runs_dir: str = "runs"


def stub_backends(base_dir: str, expand_children: Optional[int] = None,
                  script: Optional[dict[str, str]] = None) -> PipelineBackends:
    runs = str(Path(base_dir) / "runs")
    text = StubTextClient(script=script, expand_children=expand_children)
    return PipelineBackends(text=text, image=StubImageClient(runs), judge=text, runs_dir=runs)


@dataclass(frozen=True)
class AdvanceParams:
    """Stage-specific options; unused fields are ignored by other stages."""

    style_name: Optional[str] = None
    style_modifiers: tuple[str, ...] = ()
    abstraction_level: Optional[int] = None
    linkage: str = "average"
    k: Optional[int] = None
    template_id: Optional[str] = None
    library: Optional[tuple[CompositionTemplate, ...]] = None
    seed: int = 0
    canvas: Optional[Canvas] = None
    lighting: Optional[LightingSpec] = None
    expansion: ExpansionConfig = ExpansionConfig()
    prompt_suffix: str = ""


# --- persistence ----------------------------------------------------------------

class SessionStore:
    """One canonical-JSON file per session under a directory, with advisory
    per-session file locks and atomic replace-on-save."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._local_locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def path(self, session_id: str) -> Path:
        return self.root / f"{session_id}.json"

    def exists(self, session_id: str) -> bool:
        return self.path(session_id).exists()

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def save(self, state: SessionState) -> None:
        payload = emit_canonical(session_to_jsonable(state))
        target = self.path(state.id)
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(payload, encoding="utf-8")
        tmp.replace(target)

    def load(self, session_id: str) -> SessionState:
        target = self.path(session_id)
        if not target.exists():
            raise NotFound(f"no session {session_id!r}")
        text = target.read_text(encoding="utf-8")
        try:
            return session_from_jsonable(json.loads(text))
        except (ValueError, KeyError, TypeError, InvalidScene) as exc:
            raise ParseError(f"corrupt session file {target}: {exc}") from exc

    @contextmanager
    def lock(self, session_id: str):
        """Advisory per-session writer lock: in-process mutex plus a POSIX
        flock on a sidecar file for cross-process exclusion."""
        with self._registry_lock:
            local = self._local_locks.setdefault(session_id, threading.Lock())
        with local:
            if fcntl is None:
                yield
                return
            lock_path = self.root / f"{session_id}.lock"
            with open(lock_path, "w") as handle:
                fcntl.flock(handle, fcntl.LOCK_EX)
                try:
                    yield
                finally:
                    fcntl.flock(handle, fcntl.LOCK_UN)


def session_to_jsonable(state: SessionState) -> dict:
    out: dict[str, Any] = {
        "created_at": state.created_at,
        "id": state.id,
        "input_text": state.input_text,
        "iterations": [
            {
                "compiled_prompt": rec.compiled_prompt,
                "index": rec.index,
                "scene_hash": rec.scene_hash,
                "scene_snapshot": scene_to_jsonable(rec.scene_snapshot),
                "timestamp": rec.timestamp,
                "user_edits": list(rec.user_edits),
                **({"image_ref": rec.image_ref} if rec.image_ref is not None else {}),
            }
            for rec in state.iterations
        ],
        "stage": state.stage,
        "template_id": state.template_id,
        "theme": state.theme,
        "theme_concepts": [
            {"keywords": list(c.keywords), "label": c.label, "weight": c.weight}
            for c in state.concepts
        ],
        "updated_at": state.updated_at,
    }
    if state.style is not None:
        out["style"] = {
            "abstraction_level": state.style.abstraction_level,
            "modifiers": list(state.style.modifiers),
            "style_name": state.style.style_name,
        }
    if state.current_scene is not None:
        out["current_scene"] = scene_to_jsonable(state.current_scene)
    return out


def session_from_jsonable(data: dict) -> SessionState:
    return SessionState(
        id=str(data["id"]),
        input_text=str(data["input_text"]),
        stage=str(data["stage"]),
        created_at=str(data["created_at"]),
        updated_at=str(data["updated_at"]),
        style=(style_from_dict(data["style"]) if data.get("style") is not None else None),
        theme=str(data.get("theme", "")),
        concepts=tuple(
            ThemeConcept(
                label=str(c.get("label", "")),
                keywords=tuple(str(k) for k in c.get("keywords", [])),
                weight=float(c.get("weight", 0.0)),
            )
            for c in data.get("theme_concepts", [])
        ),
        template_id=str(data.get("template_id", "")),
        current_scene=(
            scene_from_jsonable(data["current_scene"])
            if data.get("current_scene") is not None else None
        ),
        iterations=tuple(
            IterationRecord(
                index=int(rec["index"]),
                scene_snapshot=scene_from_jsonable(rec["scene_snapshot"]),
                compiled_prompt=str(rec["compiled_prompt"]),
                scene_hash=str(rec["scene_hash"]),
                timestamp=str(rec["timestamp"]),
                image_ref=(str(rec["image_ref"]) if rec.get("image_ref") is not None else None),
                user_edits=tuple(str(e) for e in rec.get("user_edits", [])),
            )
            for rec in data.get("iterations", [])
        ),
    )


def save_session(store: SessionStore, state: SessionState) -> None:
    store.save(state)


def load_session(store: SessionStore, session_id: str) -> SessionState:
    return store.load(session_id)


# --- session lifecycle ------------------------------------------------------------

def create_session(input_text: str, store: SessionStore,
                   style: Optional[StyleSpec] = None) -> SessionState:
    if not input_text.strip():
        raise EmptyInput("input text is empty")
    stamp = now_utc()
    state = SessionState(
        id=str(uuid.uuid4()),
        input_text=input_text,
        stage="Input",
        created_at=stamp,
        updated_at=stamp,
        style=style,
    )
    with store.lock(state.id):
        store.save(state)
    return state


def advance(session: SessionState, params: Optional[AdvanceParams] = None, *,
            store: SessionStore, backends: PipelineBackends) -> SessionState:
    """Run the next stage and persist the result; a failing stage leaves the
    persisted session untouched."""
    params = params or AdvanceParams()
    current = stage_index(session.stage)
    target = STAGES[min(current + 1, len(STAGES) - 1)]
    runner = _STAGE_RUNNERS[target]
    with store.lock(session.id):
        new_state = runner(session, params, backends)
        new_state = replace(new_state, stage=target, updated_at=now_utc())
        store.save(new_state)
    return new_state


def _run_creativity(session: SessionState, params: AdvanceParams,
                    backends: PipelineBackends) -> SessionState:
    if params.style_name is not None:
        style = StyleSpec(params.style_name, params.style_modifiers,
                          params.abstraction_level if params.abstraction_level is not None else 5)
    elif session.style is not None:
        style = session.style
    elif backends.text is not None:
        suggestion = text_complete(backends.text, style_request(session.input_text)).text.strip()
        name = suggestion if suggestion in FIXED_STYLES else _default_style_name(session.input_text)
        style = StyleSpec(name)
    else:
        style = StyleSpec(_default_style_name(session.input_text))
    return replace(session, style=style)


def _default_style_name(text: str) -> str:
    return FIXED_STYLES[stable_hash(text) % len(FIXED_STYLES)]


def _run_theme(session: SessionState, params: AdvanceParams,
               backends: PipelineBackends) -> SessionState:
    keywords = extract_keywords(session.input_text)
    _, partition = cluster(keywords, params.linkage, params.k)
    groups = [[keywords[i] for i in part] for part in partition]
    theme, concepts = derive_theme(groups, session.input_text, backends.text)
    return replace(session, theme=theme, concepts=tuple(concepts))


def _run_composition(session: SessionState, params: AdvanceParams,
                     backends: PipelineBackends) -> SessionState:
    library = list(params.library) if params.library is not None else builtin_templates()
    if params.template_id is not None:
        template = find_template(params.template_id, library)
    else:
        template = select_composition(session.concepts, library)
    return replace(session, template_id=template.id)


def _run_detailing(session: SessionState, params: AdvanceParams,
                   backends: PipelineBackends) -> SessionState:
    library = list(params.library) if params.library is not None else builtin_templates()
    template = find_template(session.template_id, library)
    lighting = params.lighting if params.lighting is not None else DEFAULT_LIGHTING
    scene = populate_scene(
        theme=session.theme,
        concepts=session.concepts,
        template=template,
        style=session.style if session.style is not None else StyleSpec("flat-infographic"),
        backend=backends.text,
        seed=params.seed,
        canvas=params.canvas if params.canvas is not None else DEFAULT_CANVAS,
        lighting=lighting,
    )
    if backends.text is not None and params.expansion.max_depth > 0:
        scene = expand_recursive(scene, None, params.expansion, backends.text)
    scene = apply_lighting(scene, lighting)
    return replace(session, current_scene=scene)


def _run_generate(session: SessionState, params: AdvanceParams,
                  backends: PipelineBackends) -> SessionState:
    if session.current_scene is None:
        raise StageOrderViolation("no scene to generate from")
    scene = session.current_scene
    library = list(params.library) if params.library is not None else builtin_templates()
    template = find_template(session.template_id, library)
    prompt = compile_prompt(scene, template, params.prompt_suffix)

    index = len(session.iterations)
    image_ref = None
    if backends.image is not None:
        out_dir = str(Path(backends.runs_dir) / session.id / f"iter-{index}")
        request = ImageRequest(
            prompt=prompt,
            width_px=scene.canvas.width_px,
            height_px=scene.canvas.height_px,
            seed=scene.seed,
        )
        result = image_generate(backends.image, request, scene=scene,
                                template=template, out_dir=out_dir)
        image_ref = result.image_ref

    record = IterationRecord(
        index=index,
        scene_snapshot=scene,
        compiled_prompt=prompt,
        scene_hash=scene_hash(scene),
        timestamp=now_utc(),
        image_ref=image_ref,
        user_edits=(),
    )
    return replace(session, iterations=session.iterations + (record,))


_STAGE_RUNNERS = {
    "Creativity": _run_creativity,
    "Theme": _run_theme,
    "Composition": _run_composition,
    "Detailing": _run_detailing,
    "Generate": _run_generate,
}


# --- one-shot convenience -----------------------------------------------------------

def art_image_creation(
    abstract: str,
    template_id: Optional[str],
    backends: PipelineBackends,
    *,
    seed: int = 0,
    params: Optional[AdvanceParams] = None,
    store: Optional[SessionStore] = None,
) -> tuple[SceneGraph, str, Optional[str]]:
    """Run all six stages with defaults and return (scene, prompt, image_ref).

    Equivalent to create_session followed by five advances; uses an
    ephemeral store when none is given.
    """
    params = params or AdvanceParams()
    params = replace(params, template_id=template_id, seed=seed)

    def run(active_store: SessionStore) -> tuple[SceneGraph, str, Optional[str]]:
        state = create_session(abstract, active_store)
        for _ in range(5):
            state = advance(state, params, store=active_store, backends=backends)
        record = state.iterations[-1]
        assert state.current_scene is not None
        return state.current_scene, record.compiled_prompt, record.image_ref

    if store is not None:
        return run(store)
    with tempfile.TemporaryDirectory(prefix="sde-session-") as tmp:
        return run(SessionStore(tmp))


# --- iterative refinement ------------------------------------------------------------

@dataclass(frozen=True)
class Edit:
    op: str
    path: str
    field: Optional[str] = None
    value: Any = None

    def describe(self) -> str:
        if self.op == "set":
            return f"set {self.field} at {self.path}"
        return f"{self.op} at {self.path}"


def parse_edit(data: dict) -> Edit:
    if not isinstance(data, dict):
        raise InvalidEdit("edit must be an object")
    op = data.get("op")
    path = data.get("path")
    if op not in ("set", "delete", "add"):
        raise InvalidEdit(f"unknown op {op!r}")
    if not isinstance(path, str) or not path:
        raise InvalidEdit("edit needs a non-empty path")
    field = data.get("field")
    if op == "set":
        if field not in DETAIL_FIELDS:
            raise InvalidEdit(f"unknown field {field!r}")
        if "value" not in data:
            raise InvalidEdit("set edit needs a value")
    if op == "add" and not isinstance(data.get("value", {}), dict):
        raise InvalidEdit("add edit value must be an object")
    return Edit(op=str(op), path=path, field=field, value=data.get("value"))


def _convert_field(field: str, value: Any):
    try:
        if field == "content":
            return str(value)
        if field == "bbox":
            return rect_from(value)
        if field == "z_order":
            return int(value)
        if field == "style":
            return style_from_dict(value) if value is not None else None
        if field == "color":
            return color_from_dict(value) if value is not None else None
    except (TypeError, ValueError) as exc:
        raise InvalidEdit(f"bad value for {field}: {exc}") from exc
    raise InvalidEdit(f"unknown field {field!r}")


def apply_edits(details: DetailSet, edits: Sequence[Edit]) -> DetailSet:
    """Apply edits in order to a copy; any failure aborts the whole batch."""
    entries = dict(details.entries)
    for edit in edits:
        if edit.op == "set":
            if edit.path not in entries:
                raise PathNotFound(f"no element at {edit.path!r}")
            assert edit.field is not None
            entries[edit.path] = replace(
                entries[edit.path], **{edit.field: _convert_field(edit.field, edit.value)}
            )
        elif edit.op == "delete":
            if edit.path not in entries:
                raise PathNotFound(f"no element at {edit.path!r}")
            prefix = edit.path + "/"
            for key in [k for k in entries if k == edit.path or k.startswith(prefix)]:
                del entries[key]
        elif edit.op == "add":
            if edit.path in entries:
                raise InvalidEdit(f"element already exists at {edit.path!r}")
            parent = edit.path.rsplit("/", 1)[0] if "/" in edit.path else None
            if parent is not None and parent not in entries:
                raise PathNotFound(f"no parent element for {edit.path!r}")
            record = edit.value or {}
            entries[edit.path] = DetailEntry(
                content=(str(record["content"]) if "content" in record else None),
                bbox=(rect_from(record["bbox"]) if record.get("bbox") is not None else None),
                style=(style_from_dict(record["style"]) if record.get("style") is not None else None),
                color=(color_from_dict(record["color"]) if record.get("color") is not None else None),
                z_order=(int(record["z_order"]) if record.get("z_order") is not None else None),
            )
    return DetailSet(entries)


def iterate(
    session: SessionState,
    edits: Sequence[Edit],
    expand: Optional[ExpansionConfig] = None,
    *,
    store: SessionStore,
    backends: PipelineBackends,
    fuse_with_backend: bool = False,
) -> SessionState:
    """Apply an atomic edit batch, fuse with iteration history, optionally
    re-expand, and regenerate prompt plus image as a new iteration.

    Fusion fills field gaps from history but the edited detail set fixes
    the element universe, so deletions stick and an empty edit batch
    reproduces the previous scene hash exactly.
    """
    if not session.iterations:
        raise StageOrderViolation("iterate requires at least one generated iteration")
    assert session.current_scene is not None

    with store.lock(session.id):
        working = scene_to_detailset(session.current_scene)
        edited = apply_edits(working, edits)

        history = [scene_to_detailset(rec.scene_snapshot) for rec in session.iterations]
        fused = fuse_history(history, edited,
                             backend=backends.text if fuse_with_backend else None)
        fused = DetailSet({k: v for k, v in fused.entries.items() if k in edited.entries})

        scene = detailset_to_scene(fused, session.current_scene)
        if expand is not None and backends.text is not None:
            scene = expand_recursive(scene, None, expand, backends.text)
        require_valid_structure(scene)

        library = builtin_templates()
        template = find_template(session.template_id, library)
        prompt = compile_prompt(scene, template)

        index = len(session.iterations)
        image_ref = None
        if backends.image is not None:
            out_dir = str(Path(backends.runs_dir) / session.id / f"iter-{index}")
            request = ImageRequest(prompt=prompt, width_px=scene.canvas.width_px,
                                   height_px=scene.canvas.height_px, seed=scene.seed)
            result = image_generate(backends.image, request, scene=scene,
                                    template=template, out_dir=out_dir)
            image_ref = result.image_ref

        record = IterationRecord(
            index=index,
            scene_snapshot=scene,
            compiled_prompt=prompt,
            scene_hash=scene_hash(scene),
            timestamp=now_utc(),
            image_ref=image_ref,
            user_edits=tuple(e.describe() for e in edits),
        )
        new_state = replace(
            session,
            current_scene=scene,
            iterations=session.iterations + (record,),
            updated_at=now_utc(),
        )
        store.save(new_state)
    return new_state

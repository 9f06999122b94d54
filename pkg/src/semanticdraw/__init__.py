"""Semantic draw engine: quantified scene graphs for text-to-image prompting.

Free text flows through six stages (input, creativity, theme, composition,
detailing, generation) into a canonical scene-graph representation that
compiles deterministically to image-model prompts, supports edit-and-fuse
iteration, and is content-hashable for reproducibility measurement.
"""

from .scene import (
    Canvas,
    ColorSpec,
    CompositionTemplate,
    DetailEntry,
    DetailSet,
    IterationRecord,
    LightingSpec,
    Rect,
    Region,
    SceneElement,
    SceneGraph,
    StyleSpec,
    ThemeConcept,
    Violation,
    detailset_to_scene,
    scene_to_detailset,
    validate_scene,
)
from .compiler import (
    compile_prompt,
    deserialize_scene,
    render_debug_svg,
    scene_hash,
    serialize_scene,
)
from .composition import (
    assign_regions,
    builtin_templates,
    load_templates,
    select_composition,
)
from .detailing import ExpansionConfig, apply_lighting, expand_recursive, fuse_history, populate_scene
from .pipeline import (
    AdvanceParams,
    Edit,
    PipelineBackends,
    SessionState,
    SessionStore,
    advance,
    art_image_creation,
    create_session,
    iterate,
    stub_backends,
)
from .themes import ExtractionConfig, KeywordVector, cluster, derive_theme, extract_keywords

__version__ = "0.1.0"

__all__ = [
    "AdvanceParams",
    "Canvas",
    "ColorSpec",
    "CompositionTemplate",
    "DetailEntry",
    "DetailSet",
    "Edit",
    "ExpansionConfig",
    "ExtractionConfig",
    "IterationRecord",
    "KeywordVector",
    "LightingSpec",
    "PipelineBackends",
    "Rect",
    "Region",
    "SceneElement",
    "SceneGraph",
    "SessionState",
    "SessionStore",
    "StyleSpec",
    "ThemeConcept",
    "Violation",
    "advance",
    "apply_lighting",
    "art_image_creation",
    "assign_regions",
    "builtin_templates",
    "cluster",
    "compile_prompt",
    "create_session",
    "derive_theme",
    "deserialize_scene",
    "detailset_to_scene",
    "expand_recursive",
    "extract_keywords",
    "fuse_history",
    "iterate",
    "load_templates",
    "populate_scene",
    "render_debug_svg",
    "scene_hash",
    "scene_to_detailset",
    "select_composition",
    "serialize_scene",
    "stub_backends",
    "validate_scene",
]

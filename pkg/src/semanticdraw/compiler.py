"""Deterministic scene serialization: canonical JSON, content hash,
image-model prompt text, and a debug SVG rendering.

Canonical form fixes everything the hash depends on: alphabetical keys,
floats printed with up to six decimals (trailing zeros trimmed), siblings
sorted by (z_order, id), no insignificant whitespace.
"""

from __future__ import annotations

import hashlib
import json
from typing import Iterator, Optional
from xml.sax.saxutils import escape

from .errors import InvalidScene, ParseError
from .scene import (
    PALETTE,
    Canvas,
    ColorSpec,
    CompositionTemplate,
    LightingSpec,
    SceneElement,
    SceneGraph,
    StyleSpec,
    ThemeConcept,
    Violation,
    effective_color,
    rect_from,
    require_valid_structure,
)

# --- canonical JSON -----------------------------------------------------------

def format_number(value) -> str:
    """Canonical number text: ints verbatim, floats at up to 6 decimals
    with trailing zeros trimmed."""
    if isinstance(value, bool):
        raise TypeError("bool is not a number here")
    if isinstance(value, int):
        return str(value)
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


def emit_canonical(obj) -> str:
    """Minified JSON with lexicographically sorted keys and canonical numbers."""
    if obj is None:
        raise ValueError("canonical JSON has no nulls; omit the field instead")
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, float)):
        return format_number(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(emit_canonical(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = (f"{json.dumps(str(k), ensure_ascii=False)}:{emit_canonical(v)}"
                 for k, v in sorted(obj.items()))
        return "{" + ",".join(parts) + "}"
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def canonical_sorted(elements: tuple[SceneElement, ...]) -> tuple[SceneElement, ...]:
    return tuple(sorted(elements, key=SceneElement.sort_key))


def _style_to_dict(style: StyleSpec) -> dict:
    return {
        "abstraction_level": style.abstraction_level,
        "modifiers": list(style.modifiers),
        "style_name": style.style_name,
    }


def _color_to_dict(color: ColorSpec) -> dict:
    return {
        "contrast": color.contrast,
        "palette": list(color.palette),
        "primary_hex": color.primary_hex,
    }


def _element_to_dict(el: SceneElement) -> dict:
    out = {
        "bbox": list(el.bbox),
        "children": [_element_to_dict(c) for c in canonical_sorted(el.children)],
        "content": el.content,
        "id": el.id,
        "path": el.path,
        "z_order": el.z_order,
    }
    if el.region_id is not None:
        out["region_id"] = el.region_id
    if el.style is not None:
        out["style"] = _style_to_dict(el.style)
    if el.color is not None:
        out["color"] = _color_to_dict(el.color)
    return out


def scene_to_jsonable(scene: SceneGraph) -> dict:
    canvas: dict = {"height_px": scene.canvas.height_px, "width_px": scene.canvas.width_px}
    if scene.canvas.aspect_label is not None:
        canvas["aspect_label"] = scene.canvas.aspect_label
    return {
        "canvas": canvas,
        "elements": [_element_to_dict(el) for el in canonical_sorted(scene.elements)],
        "iteration_index": scene.iteration_index,
        "lighting": {
            "light_direction": scene.lighting.light_direction,
            "mood": scene.lighting.mood,
            "reflection": scene.lighting.reflection,
            "shadow_strength": scene.lighting.shadow_strength,
        },
        "seed": scene.seed,
        "style": _style_to_dict(scene.style),
        "template_id": scene.template_id,
        "theme": scene.theme,
        "theme_concepts": [
            {"keywords": list(c.keywords), "label": c.label, "weight": c.weight}
            for c in scene.theme_concepts
        ],
    }


def serialize_scene(scene: SceneGraph) -> str:
    require_valid_structure(scene)
    return emit_canonical(scene_to_jsonable(scene))


def scene_hash(scene: SceneGraph) -> str:
    """SHA-256 of the canonical serialization, lowercase hex."""
    return hashlib.sha256(serialize_scene(scene).encode("utf-8")).hexdigest()


def canonically_equal(a: SceneGraph, b: SceneGraph) -> bool:
    return serialize_scene(a) == serialize_scene(b)


# --- deserialization ----------------------------------------------------------

def _require(data: dict, key: str, rule: str):
    if key not in data:
        raise InvalidScene([Violation("", rule, f"missing {key!r}")], f"missing {key}")
    return data[key]


def style_from_dict(data: dict) -> StyleSpec:
    return StyleSpec(
        style_name=str(data.get("style_name", "")),
        modifiers=tuple(str(m) for m in data.get("modifiers", [])),
        abstraction_level=int(data.get("abstraction_level", 5)),
    )


def color_from_dict(data: dict) -> ColorSpec:
    return ColorSpec(
        primary_hex=str(data.get("primary_hex", "")),
        palette=tuple(str(h) for h in data.get("palette", [])),
        contrast=float(data.get("contrast", 0.5)),
    )


def _element_from_dict(data: dict, parent_path: Optional[str]) -> SceneElement:
    el_id = str(_require(data, "id", "missing-element-id"))
    path = str(data.get("path", el_id if parent_path is None else f"{parent_path}/{el_id}"))
    children = tuple(
        _element_from_dict(c, path) for c in data.get("children", [])
    )
    return SceneElement(
        id=el_id,
        path=path,
        bbox=rect_from(_require(data, "bbox", "missing-bbox")),
        content=str(data.get("content", "")),
        z_order=int(data.get("z_order", 0)),
        region_id=(str(data["region_id"]) if data.get("region_id") is not None else None),
        style=(style_from_dict(data["style"]) if data.get("style") is not None else None),
        color=(color_from_dict(data["color"]) if data.get("color") is not None else None),
        children=canonical_sorted(children),
    )


def deserialize_scene(text: str) -> SceneGraph:
    """Parse and validate scene JSON; non-canonical but well-formed input is
    accepted and normalized (hex case, modifier order, sibling order)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"scene JSON does not parse: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError("scene JSON must be an object")
    return scene_from_jsonable(data)


def scene_from_jsonable(data: dict) -> SceneGraph:
    canvas_data = _require(data, "canvas", "missing-canvas")
    if not isinstance(canvas_data, dict):
        raise InvalidScene([Violation("", "missing-canvas", "canvas must be an object")])
    canvas = Canvas(
        width_px=int(_require(canvas_data, "width_px", "missing-canvas-size")),
        height_px=int(_require(canvas_data, "height_px", "missing-canvas-size")),
        aspect_label=(str(canvas_data["aspect_label"])
                      if canvas_data.get("aspect_label") is not None else None),
    )
    lighting_data = data.get("lighting", {})
    lighting = LightingSpec(
        light_direction=str(lighting_data.get("light_direction", "top-left")),
        mood=str(lighting_data.get("mood", "neutral")),
        shadow_strength=float(lighting_data.get("shadow_strength", 0.25)),
        reflection=bool(lighting_data.get("reflection", False)),
    )
    try:
        elements = tuple(
            _element_from_dict(e, None) for e in data.get("elements", [])
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad element record: {exc}") from exc

    scene = SceneGraph(
        canvas=canvas,
        theme=str(data.get("theme", "")),
        theme_concepts=tuple(
            ThemeConcept(
                label=str(c.get("label", "")),
                keywords=tuple(str(k) for k in c.get("keywords", [])),
                weight=float(c.get("weight", 0.0)),
            )
            for c in data.get("theme_concepts", [])
        ),
        template_id=str(data.get("template_id", "")),
        style=style_from_dict(data.get("style", {})),
        lighting=lighting,
        elements=canonical_sorted(elements),
        iteration_index=int(data.get("iteration_index", 0)),
        seed=int(data.get("seed", 0)),
    )
    require_valid_structure(scene)
    return scene


# --- prompt compilation ---------------------------------------------------------

_ROW_NAMES = ("upper", "middle", "lower")
_COL_NAMES = ("left", "center", "right")


def position_phrase(cx: float, cy: float) -> str:
    """3x3-grid verbalization of a normalized point."""
    col = min(int(cx * 3), 2)
    row = min(int(cy * 3), 2)
    if (row, col) == (1, 1):
        return "center"
    return f"{_ROW_NAMES[row]} {_COL_NAMES[col]}"


def nearest_palette_name(hex_color: str) -> str:
    """Name of the palette color nearest in RGB space."""
    try:
        r = int(hex_color[1:3], 16)
        g = int(hex_color[3:5], 16)
        b = int(hex_color[5:7], 16)
    except (ValueError, IndexError):
        return PALETTE[-1][0]

    def dist2(entry: tuple[str, str]) -> int:
        er = int(entry[1][1:3], 16)
        eg = int(entry[1][3:5], 16)
        eb = int(entry[1][5:7], 16)
        return (r - er) ** 2 + (g - eg) ** 2 + (b - eb) ** 2

    return min(PALETTE, key=dist2)[0]


def _walk_canonical(elements: tuple[SceneElement, ...], depth: int = 0) -> Iterator[tuple[SceneElement, int]]:
    for el in canonical_sorted(elements):
        yield el, depth
        yield from _walk_canonical(el.children, depth + 1)


def compile_prompt(scene: SceneGraph, template: CompositionTemplate, suffix: str = "") -> str:
    """Deterministic prompt text: theme, style, composition, one sentence
    per element grouped by region in template order, then lighting.
    Element ids and paths never appear; each content string appears once.
    """
    require_valid_structure(scene, template)
    lines: list[str] = []
    lines.append(f"An image about {scene.theme}." if scene.theme else "An image.")

    style = scene.style
    if style.modifiers:
        lines.append(
            f"Style: {style.style_name} ({', '.join(style.modifiers)}), "
            f"abstraction level {style.abstraction_level} of 10."
        )
    else:
        lines.append(f"Style: {style.style_name}, abstraction level {style.abstraction_level} of 10.")

    lines.append(f"Composition: {template.name} layout.")

    groups: dict[Optional[str], list[SceneElement]] = {}
    for root in canonical_sorted(scene.elements):
        key = root.region_id if root.region_id in template.region_ids() else None
        groups.setdefault(key, []).append(root)

    ordered_roots: list[SceneElement] = []
    for region in template.regions:
        ordered_roots.extend(groups.get(region.id, ()))
    ordered_roots.extend(groups.get(None, ()))

    for root in ordered_roots:
        for el, _depth in _walk_canonical((root,)):
            cx, cy = el.bbox.center
            color_name = nearest_palette_name(effective_color(scene, el.path).primary_hex)
            sentence = f"{el.content}, at the {position_phrase(cx, cy)}, in {color_name} tones"
            if el.style is not None and el.style.modifiers:
                sentence += f", styled {', '.join(el.style.modifiers)}"
            lines.append(sentence + ".")

    light = scene.lighting
    lighting_line = (
        f"Lighting: {light.light_direction} light, {light.mood} mood, "
        f"shadow strength {format_number(light.shadow_strength)}"
    )
    lighting_line += ", with reflections." if light.reflection else "."
    lines.append(lighting_line)

    if suffix:
        lines.append(suffix)
    return "\n".join(lines)


# --- debug SVG ------------------------------------------------------------------

def render_debug_svg(scene: SceneGraph, template: CompositionTemplate) -> str:
    """Canvas-sized SVG: one dashed rectangle per template region, one
    filled rectangle plus label per element (opacity fades with depth)."""
    require_valid_structure(scene, template)
    w, h = scene.canvas.width_px, scene.canvas.height_px

    def px(v: float, scale: int) -> str:
        return format_number(v * scale)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="#FFFFFF"/>',
        '<g class="regions">',
    ]
    for region in template.regions:
        b = region.bbox
        out.append(
            f'<rect x="{px(b.x0, w)}" y="{px(b.y0, h)}" width="{px(b.width, w)}" '
            f'height="{px(b.height, h)}" fill="none" stroke="#444444" stroke-width="1" '
            f'stroke-dasharray="6,4"/>'
        )
    out.append("</g>")
    out.append('<g class="elements">')
    for el, depth in _walk_canonical(scene.elements):
        b = el.bbox
        fill = effective_color(scene, el.path).primary_hex
        opacity = max(0.25, 0.85 - 0.15 * depth)
        label = escape(el.content[:40])
        out.append(
            f'<rect class="element" data-path="{escape(el.path, {chr(34): "&quot;"})}" x="{px(b.x0, w)}" y="{px(b.y0, h)}" '
            f'width="{px(b.width, w)}" height="{px(b.height, h)}" fill="{fill}" '
            f'fill-opacity="{format_number(opacity)}" stroke="#222222" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{format_number(b.x0 * w + 4)}" y="{format_number(b.y0 * h + 14)}" '
            f'font-family="monospace" font-size="12" fill="#111111">{label}</text>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Quantified scene data structures.

A scene is a canvas plus a tree of elements, each carrying the four
quantified dimensions: content, coordinates (normalized bbox, origin
top-left), style, and color.  All types are immutable values; every
"mutation" elsewhere in the engine produces a new value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Mapping, NamedTuple, Optional

from .errors import InvalidPath, InvalidScene, OrphanPath

HEX_COLOR_RE = re.compile(r"^#[0-9A-F]{6}$")
REGION_ROLES = ("focal", "support", "background")
LIGHT_DIRECTIONS = ("top-left", "top", "top-right", "left", "right", "frontal", "backlit")

CONTAINMENT_EPS = 1e-9
DEFAULT_ELEMENT_BUDGET = 64


def round6(x: float) -> float:
    """Round to the 6-decimal grid used by canonical serialization."""
    return float(f"{float(x):.6f}")


class Rect(NamedTuple):
    """Normalized rectangle (x0, y0, x1, y1), origin top-left."""

    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains(self, other: "Rect", eps: float = CONTAINMENT_EPS) -> bool:
        return (
            other.x0 >= self.x0 - eps
            and other.y0 >= self.y0 - eps
            and other.x1 <= self.x1 + eps
            and other.y1 <= self.y1 + eps
        )

    def inset(self, fraction: float) -> "Rect":
        """Shrink by `fraction` of the width/height on every side, on the 6dp grid."""
        dx = self.width * fraction
        dy = self.height * fraction
        return Rect(
            round6(self.x0 + dx),
            round6(self.y0 + dy),
            round6(self.x1 - dx),
            round6(self.y1 - dy),
        )

    def clamp_into(self, outer: "Rect") -> "Rect":
        def cl(v: float, lo: float, hi: float) -> float:
            return min(max(v, lo), hi)

        return Rect(
            cl(self.x0, outer.x0, outer.x1),
            cl(self.y0, outer.y0, outer.y1),
            cl(self.x1, outer.x0, outer.x1),
            cl(self.y1, outer.y0, outer.y1),
        )


def rect_from(value) -> Rect:
    if isinstance(value, Rect):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 4:
        return Rect(*(float(v) for v in value))
    raise ValueError(f"not a rectangle: {value!r}")


@dataclass(frozen=True)
class Canvas:
    width_px: int
    height_px: int
    aspect_label: Optional[str] = None


@dataclass(frozen=True)
class Region:
    id: str
    bbox: Rect
    role: str
    salience: float


@dataclass(frozen=True)
class CompositionTemplate:
    id: str
    name: str
    regions: tuple[Region, ...]
    description: str = ""

    def focal_regions(self) -> tuple[Region, ...]:
        return tuple(r for r in self.regions if r.role == "focal")

    def support_regions(self) -> tuple[Region, ...]:
        return tuple(r for r in self.regions if r.role == "support")

    def region_ids(self) -> frozenset[str]:
        return frozenset(r.id for r in self.regions)


@dataclass(frozen=True)
class ColorSpec:
    primary_hex: str
    palette: tuple[str, ...] = ()
    contrast: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "primary_hex", _canonical_hex(self.primary_hex))
        object.__setattr__(self, "palette", tuple(_canonical_hex(h) for h in self.palette))


def _canonical_hex(value: str) -> str:
    # Uppercase well-formed hex; leave anything else for validation to flag.
    if isinstance(value, str) and re.fullmatch(r"#[0-9a-fA-F]{6}", value):
        return value.upper()
    return value


@dataclass(frozen=True)
class StyleSpec:
    style_name: str
    modifiers: tuple[str, ...] = ()
    abstraction_level: int = 5

    def __post_init__(self):
        object.__setattr__(self, "modifiers", tuple(sorted(set(self.modifiers))))


@dataclass(frozen=True)
class LightingSpec:
    light_direction: str = "top-left"
    mood: str = "neutral"
    shadow_strength: float = 0.25
    reflection: bool = False


@dataclass(frozen=True)
class ThemeConcept:
    label: str
    keywords: tuple[str, ...]
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "keywords", tuple(sorted(self.keywords)))


@dataclass(frozen=True)
class SceneElement:
    id: str
    path: str
    bbox: Rect
    content: str
    z_order: int = 0
    region_id: Optional[str] = None
    style: Optional[StyleSpec] = None
    color: Optional[ColorSpec] = None
    children: tuple["SceneElement", ...] = ()

    def sort_key(self) -> tuple[int, str]:
        return (self.z_order, self.id)


@dataclass(frozen=True)
class SceneGraph:
    canvas: Canvas
    theme: str
    theme_concepts: tuple[ThemeConcept, ...]
    template_id: str
    style: StyleSpec
    lighting: LightingSpec
    elements: tuple[SceneElement, ...] = ()
    iteration_index: int = 0
    seed: int = 0


@dataclass(frozen=True)
class IterationRecord:
    index: int
    scene_snapshot: SceneGraph
    compiled_prompt: str
    scene_hash: str
    timestamp: str
    image_ref: Optional[str] = None
    user_edits: tuple[str, ...] = ()


DEFAULT_CANVAS = Canvas(1024, 1024, "1:1")
DEFAULT_LIGHTING = LightingSpec()
DEFAULT_STYLE = StyleSpec("flat-infographic")

# Fallback color for elements with no explicit color anywhere in their
# ancestry; its contrast tracks the scene lighting (see effective_color).
DEFAULT_COLOR_HEX = "#808080"
DEFAULT_COLOR_BASE_CONTRAST = 0.5

# Fixed 12-color palette: deterministic element coloring and prompt color naming.
PALETTE: tuple[tuple[str, str], ...] = (
    ("red", "#D32F2F"),
    ("orange", "#F57C00"),
    ("yellow", "#FBC02D"),
    ("green", "#388E3C"),
    ("teal", "#00796B"),
    ("cyan", "#0097A7"),
    ("blue", "#1976D2"),
    ("indigo", "#303F9F"),
    ("violet", "#7B1FA2"),
    ("magenta", "#C2185B"),
    ("brown", "#5D4037"),
    ("gray", "#607D8B"),
)


def walk(scene: SceneGraph) -> Iterator[SceneElement]:
    """All elements in document order (depth-first, preorder)."""

    def rec(el: SceneElement) -> Iterator[SceneElement]:
        yield el
        for child in el.children:
            yield from rec(child)

    for root in scene.elements:
        yield from rec(root)


def count_elements(scene: SceneGraph) -> int:
    return sum(1 for _ in walk(scene))


def find_by_path(scene: SceneGraph, path: str) -> Optional[SceneElement]:
    for el in walk(scene):
        if el.path == path:
            return el
    return None


def effective_style(scene: SceneGraph, path: str) -> StyleSpec:
    """Element style, inherited from the nearest styled ancestor, then the scene."""
    found = scene.style
    for el in _ancestry(scene, path):
        if el.style is not None:
            found = el.style
    return found


def effective_color(scene: SceneGraph, path: str) -> ColorSpec:
    """Element color, inherited from the nearest colored ancestor, then the
    lighting-adjusted neutral default."""
    found = None
    for el in _ancestry(scene, path):
        if el.color is not None:
            found = el.color
    if found is not None:
        return found
    contrast = min(max(DEFAULT_COLOR_BASE_CONTRAST + 0.3 * scene.lighting.shadow_strength, 0.0), 1.0)
    return ColorSpec(DEFAULT_COLOR_HEX, (), round6(contrast))


def _ancestry(scene: SceneGraph, path: str) -> Iterator[SceneElement]:
    """Elements from root to `path` inclusive, following stored paths."""
    parts = path.split("/")
    prefix = ""
    level = scene.elements
    for part in parts:
        prefix = part if not prefix else f"{prefix}/{part}"
        match = next((el for el in level if el.path == prefix), None)
        if match is None:
            return
        yield match
        level = match.children


@dataclass(frozen=True)
class Violation:
    path: str
    rule: str
    message: str


def validate_scene(
    scene: SceneGraph,
    template: Optional[CompositionTemplate] = None,
    element_budget: int = DEFAULT_ELEMENT_BUDGET,
) -> list[Violation]:
    """Check every scene invariant; violations are data, not errors.

    `template` enables region-reference checks; pass None to skip them.
    """
    out: list[Violation] = []

    if scene.canvas.width_px < 64 or scene.canvas.height_px < 64:
        out.append(Violation("", "canvas-too-small", f"canvas {scene.canvas.width_px}x{scene.canvas.height_px} below 64px"))
    if scene.canvas.aspect_label:
        ratio = _parse_aspect(scene.canvas.aspect_label)
        actual = scene.canvas.width_px / scene.canvas.height_px if scene.canvas.height_px else 0.0
        if ratio is None or abs(actual - ratio) > 0.01 * ratio:
            out.append(Violation("", "aspect-mismatch", f"label {scene.canvas.aspect_label!r} vs {actual:.4f}"))

    if scene.theme_concepts:
        total = sum(c.weight for c in scene.theme_concepts)
        if abs(total - 1.0) > 1e-6:
            out.append(Violation("", "bad-weight-sum", f"concept weights sum to {total}"))
        for c in scene.theme_concepts:
            if not c.keywords:
                out.append(Violation("", "empty-keywords", f"concept {c.label!r} has no keywords"))
            if not (0.0 < c.weight <= 1.0):
                out.append(Violation("", "bad-weight", f"concept {c.label!r} weight {c.weight}"))

    seen_paths: set[str] = set()
    region_ids = template.region_ids() if template is not None else None

    def check(el: SceneElement, parent: Optional[SceneElement]):
        b = el.bbox
        if not (0.0 <= b.x0 < b.x1 <= 1.0 and 0.0 <= b.y0 < b.y1 <= 1.0):
            out.append(Violation(el.path, "bbox-out-of-range", f"bbox {tuple(b)}"))
        if parent is not None and not parent.bbox.contains(b):
            out.append(Violation(el.path, "child-outside-parent", f"bbox {tuple(b)} escapes {tuple(parent.bbox)}"))
        expected = el.id if parent is None else f"{parent.path}/{el.id}"
        if el.path != expected:
            out.append(Violation(el.path, "path-mismatch", f"expected {expected!r}"))
        if el.path in seen_paths:
            out.append(Violation(el.path, "duplicate-path", "path reused"))
        seen_paths.add(el.path)
        if not el.content.strip():
            out.append(Violation(el.path, "empty-content", "content blank after trimming"))
        if el.region_id is not None and region_ids is not None and el.region_id not in region_ids:
            out.append(Violation(el.path, "unknown-region", f"region {el.region_id!r} not in template"))
        if el.color is not None:
            for h in (el.color.primary_hex, *el.color.palette):
                if not HEX_COLOR_RE.match(h):
                    out.append(Violation(el.path, "bad-color", f"hex {h!r}"))
            if not (0.0 <= el.color.contrast <= 1.0):
                out.append(Violation(el.path, "bad-contrast", f"contrast {el.color.contrast}"))
        for child in el.children:
            check(child, el)

    for root in scene.elements:
        check(root, None)

    total_count = count_elements(scene)
    if total_count > element_budget:
        out.append(Violation("", "budget-exceeded", f"{total_count} elements > budget {element_budget}"))

    if not (0.0 <= scene.lighting.shadow_strength <= 1.0):
        out.append(Violation("", "bad-shadow-strength", f"{scene.lighting.shadow_strength}"))
    if scene.lighting.light_direction not in LIGHT_DIRECTIONS:
        out.append(Violation("", "bad-light-direction", f"{scene.lighting.light_direction!r}"))

    return out


def _parse_aspect(label: str) -> Optional[float]:
    m = re.fullmatch(r"\s*(\d+(?:\.\d+)?)\s*:\s*(\d+(?:\.\d+)?)\s*", label)
    if not m:
        return None
    w, h = float(m.group(1)), float(m.group(2))
    return w / h if h else None


def require_valid(scene: SceneGraph, template: Optional[CompositionTemplate] = None,
                  element_budget: int = DEFAULT_ELEMENT_BUDGET) -> None:
    violations = validate_scene(scene, template, element_budget)
    if violations:
        raise InvalidScene(violations)


def require_valid_structure(scene: SceneGraph,
                            template: Optional[CompositionTemplate] = None) -> None:
    """Validity gate without the budget rule, for contexts (serialization,
    flattening) that cannot know the configured element budget."""
    budget = max(DEFAULT_ELEMENT_BUDGET, count_elements(scene))
    violations = validate_scene(scene, template, budget)
    if violations:
        raise InvalidScene(violations)


# --- flat detail view -------------------------------------------------------

@dataclass(frozen=True)
class DetailEntry:
    """One element's attribute record; None fields are undefined."""

    content: Optional[str] = None
    bbox: Optional[Rect] = None
    style: Optional[StyleSpec] = None
    color: Optional[ColorSpec] = None
    z_order: Optional[int] = None


DETAIL_FIELDS = ("content", "bbox", "style", "color", "z_order")


@dataclass(frozen=True)
class DetailSet:
    """Flat map from element path to attribute record."""

    entries: Mapping[str, DetailEntry] = field(default_factory=dict)

    def paths(self) -> list[str]:
        return sorted(self.entries)


def check_path_syntax(path: str) -> None:
    if not path or any(not part for part in path.split("/")):
        raise InvalidPath(f"malformed path {path!r}")


def scene_to_detailset(scene: SceneGraph) -> DetailSet:
    """Flatten a valid scene into one entry per element, keyed by path."""
    require_valid_structure(scene)
    entries = {
        el.path: DetailEntry(
            content=el.content,
            bbox=el.bbox,
            style=el.style,
            color=el.color,
            z_order=el.z_order,
        )
        for el in walk(scene)
    }
    return DetailSet(entries)


def detailset_to_scene(details: DetailSet, base: SceneGraph) -> SceneGraph:
    """Rebuild a scene realizing exactly the detail entries.

    `base` supplies canvas, theme, style, lighting, and the region
    assignment for any path it also contains.  Region membership is
    structural data, not detail data, so it never travels through a
    DetailSet.
    """
    for path in details.entries:
        check_path_syntax(path)
        parent = path.rsplit("/", 1)[0] if "/" in path else None
        if parent is not None and parent not in details.entries:
            raise OrphanPath(f"{path!r} has no parent entry {parent!r}")

    base_regions = {el.path: el.region_id for el in walk(base)}
    children_of: dict[Optional[str], list[str]] = {}
    for path in sorted(details.entries):
        parent = path.rsplit("/", 1)[0] if "/" in path else None
        children_of.setdefault(parent, []).append(path)

    def build(path: str, parent_bbox: Rect) -> SceneElement:
        entry = details.entries[path]
        bbox = entry.bbox if entry.bbox is not None else parent_bbox.inset(0.1)
        el_id = path.rsplit("/", 1)[-1]
        kids = tuple(build(p, bbox) for p in children_of.get(path, ()))
        kids = tuple(sorted(kids, key=SceneElement.sort_key))
        return SceneElement(
            id=el_id,
            path=path,
            bbox=bbox,
            content=entry.content if entry.content is not None else "",
            z_order=entry.z_order if entry.z_order is not None else 0,
            region_id=base_regions.get(path),
            style=entry.style,
            color=entry.color,
            children=kids,
        )

    full = Rect(0.0, 0.0, 1.0, 1.0)
    roots = tuple(build(p, full) for p in children_of.get(None, ()))
    roots = tuple(sorted(roots, key=SceneElement.sort_key))
    return replace(base, elements=roots)

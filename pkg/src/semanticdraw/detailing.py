"""Scene population, recursive sub-element expansion, history fusion, and
lighting application.

Population roots one element per theme concept inside its assigned region;
expansion grows bounded sub-element trees depth-first; fusion merges detail
records across iterations field-by-field with the current iteration winning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

from .backends import (
    TextClient,
    describe_request,
    expand_request,
    merge_request,
    stable_hash,
    text_complete,
    complete_json,
)
from .composition import assign_regions
from .errors import PathNotFound
from .scene import (
    DEFAULT_CANVAS,
    DEFAULT_LIGHTING,
    DETAIL_FIELDS,
    PALETTE,
    Canvas,
    ColorSpec,
    DetailEntry,
    DetailSet,
    CompositionTemplate,
    LightingSpec,
    Rect,
    SceneElement,
    SceneGraph,
    StyleSpec,
    ThemeConcept,
    count_elements,
    require_valid,
    require_valid_structure,
    round6,
)

POPULATE_INSET = 0.1


@dataclass(frozen=True)
class ExpansionConfig:
    max_depth: int = 2
    max_children: int = 4
    element_budget: int = 64


def slugify(text: str) -> str:
    out = []
    for ch in text.lower():
        if ch.isalnum():
            out.append(ch)
        elif out and out[-1] != "-":
            out.append("-")
    slug = "".join(out).strip("-")
    return slug or "element"


def concept_color(seed: int, label: str) -> ColorSpec:
    name, hex_code = PALETTE[stable_hash(seed, label) % len(PALETTE)]
    del name
    return ColorSpec(primary_hex=hex_code, palette=(), contrast=0.5)


def populate_scene(
    theme: str,
    concepts: Sequence[ThemeConcept],
    template: CompositionTemplate,
    style: StyleSpec,
    backend: Optional[TextClient],
    seed: int,
    canvas: Canvas = DEFAULT_CANVAS,
    lighting: LightingSpec = DEFAULT_LIGHTING,
) -> SceneGraph:
    """One root element per concept, inset 10% into its assigned region,
    colored from the fixed palette by stable hash of (seed, label)."""
    assignment = assign_regions(concepts, template)
    regions = {r.id: r for r in template.regions}

    ordered = sorted(concepts, key=lambda c: (-c.weight, c.label))
    used_ids: set[str] = set()
    elements = []
    for z, concept in enumerate(ordered):
        region = regions[assignment[concept.label]]
        bbox = region.bbox.inset(POPULATE_INSET)
        el_id = _unique_id(slugify(concept.label), used_ids)
        content = _describe(backend, theme, concept.label)
        elements.append(
            SceneElement(
                id=el_id,
                path=el_id,
                bbox=bbox,
                content=content,
                z_order=z,
                region_id=region.id,
                color=concept_color(seed, concept.label),
            )
        )

    scene = SceneGraph(
        canvas=canvas,
        theme=theme,
        theme_concepts=tuple(concepts),
        template_id=template.id,
        style=style,
        lighting=lighting,
        elements=tuple(elements),
        iteration_index=0,
        seed=seed,
    )
    require_valid(scene, template)
    return scene


def _describe(backend: Optional[TextClient], theme: str, label: str) -> str:
    if backend is None:
        return f"a depiction of {label}"
    text = text_complete(backend, describe_request(theme, label)).text.strip()
    return text or f"a depiction of {label}"


def _unique_id(base: str, used: set[str]) -> str:
    candidate = base
    n = 2
    while candidate in used:
        candidate = f"{base}-{n}"
        n += 1
    used.add(candidate)
    return candidate


# --- recursive expansion ------------------------------------------------------

class _Node:
    """Mutable working copy of a SceneElement during expansion."""

    __slots__ = ("el", "children")

    def __init__(self, el: SceneElement):
        self.el = el
        self.children = [_Node(c) for c in el.children]

    def freeze(self) -> SceneElement:
        return replace(self.el, children=tuple(c.freeze() for c in self.children))


def expand_recursive(
    scene: SceneGraph,
    target_path: Optional[str],
    config: ExpansionConfig,
    backend: TextClient,
) -> SceneGraph:
    """Grow sub-element trees below the target (or below every root when
    target_path is None), depth-first, up to max_depth levels and at most
    element_budget total elements in the scene.

    Elements are added in depth-first order and addition stops the moment
    the budget is reached, so the result is always the depth-first prefix
    of the unbounded expansion.
    """
    require_valid_structure(scene)
    roots = [_Node(el) for el in scene.elements]

    budget = config.element_budget
    count = count_elements(scene)

    def propose(node: _Node) -> list[dict]:
        request = expand_request(node.el.content, config.max_children)

        def validate(payload):
            if not isinstance(payload, list):
                raise ValueError("expansion payload must be a list")
            items = []
            for item in payload[: config.max_children]:
                if not isinstance(item, dict):
                    raise ValueError("expansion item must be an object")
                items.append(
                    {
                        "name": str(item.get("name", "")) or "part",
                        "position": str(item.get("position", "")),
                        "description": str(item.get("description", "")) or "",
                    }
                )
            return items

        return complete_json(backend, request, validate)

    def expand(node: _Node, depth_left: int) -> None:
        nonlocal count
        if depth_left <= 0 or count >= budget:
            return
        if node.children:
            for child in node.children:
                expand(child, depth_left - 1)
            return
        proposals = propose(node)
        if not proposals:
            return
        cells = _grid_cells(node.el.bbox, len(proposals))
        used: set[str] = set()
        for i, (proposal, cell) in enumerate(zip(proposals, cells)):
            if count >= budget:
                return
            child_id = _unique_id(slugify(proposal["name"]), used)
            description = proposal["description"] or f"part of {node.el.content}"
            child = _Node(
                SceneElement(
                    id=child_id,
                    path=f"{node.el.path}/{child_id}",
                    bbox=cell,
                    content=description,
                    z_order=i,
                )
            )
            node.children.append(child)
            count += 1
            expand(child, depth_left - 1)

    if target_path is None:
        targets = roots
    else:
        targets = [n for n in _walk_nodes(roots) if n.el.path == target_path]
        if not targets:
            raise PathNotFound(f"no element at {target_path!r}")

    for node in targets:
        expand(node, config.max_depth)

    result = replace(scene, elements=tuple(n.freeze() for n in roots))
    require_valid_structure(result)
    return result


def _walk_nodes(roots: list[_Node]):
    stack = list(reversed(roots))
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def _grid_cells(parent: Rect, n: int) -> list[Rect]:
    """Row-major grid subdivision of the parent bbox with ceil(sqrt(n))
    columns, rounded onto the 6dp grid and clamped inside the parent."""
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    w, h = parent.width, parent.height
    cells = []
    for i in range(n):
        r, c = divmod(i, cols)
        cell = Rect(
            round6(parent.x0 + w * c / cols),
            round6(parent.y0 + h * r / rows),
            round6(parent.x0 + w * (c + 1) / cols),
            round6(parent.y0 + h * (r + 1) / rows),
        )
        cells.append(cell.clamp_into(parent))
    return cells


# --- history fusion -----------------------------------------------------------

def fuse_history(
    history: Sequence[DetailSet],
    current: DetailSet,
    backend: Optional[TextClient] = None,
) -> DetailSet:
    """Merge historical detail into the current iteration's detail.

    The result covers the union of all paths; each field comes from the
    current record when defined there, otherwise from the most recent
    historical record that defines it.  With a backend, content strings
    that differ between current and history are rewritten into a merged
    description; all other fields stay rule-merged.
    """
    keys: set[str] = set(current.entries)
    for detail_set in history:
        keys.update(detail_set.entries)

    # Most recent historical source first.
    stack = [current] + [history[i] for i in range(len(history) - 1, -1, -1)]

    merged: dict[str, DetailEntry] = {}
    for key in sorted(keys):
        fields = {}
        for name in DETAIL_FIELDS:
            value = None
            for source in stack:
                entry = source.entries.get(key)
                if entry is not None:
                    value = getattr(entry, name)
                    if value is not None:
                        break
            fields[name] = value

        if backend is not None:
            current_entry = current.entries.get(key)
            current_content = current_entry.content if current_entry else None
            previous_content = None
            for source in stack[1:]:
                entry = source.entries.get(key)
                if entry is not None and entry.content is not None:
                    previous_content = entry.content
                    break
            if (
                current_content is not None
                and previous_content is not None
                and current_content != previous_content
            ):
                response = text_complete(backend, merge_request(current_content, previous_content))
                rewritten = response.text.strip()
                if rewritten:
                    fields["content"] = rewritten

        merged[key] = DetailEntry(**fields)

    return DetailSet(merged)


# --- lighting -----------------------------------------------------------------

def apply_lighting(scene: SceneGraph, lighting: LightingSpec) -> SceneGraph:
    """Swap the scene lighting and shift every owned color's contrast by
    0.3 x shadow_strength (clamped to [0, 1]); geometry, paths, and content
    are untouched.  Elements without an owned color resolve their contrast
    through effective_color, which applies the same shift to the default."""
    require_valid_structure(scene)
    delta = 0.3 * lighting.shadow_strength

    def adjust(el: SceneElement) -> SceneElement:
        color = el.color
        if color is not None:
            contrast = round6(min(max(color.contrast + delta, 0.0), 1.0))
            color = replace(color, contrast=contrast)
        return replace(el, color=color, children=tuple(adjust(c) for c in el.children))

    return replace(scene, lighting=lighting, elements=tuple(adjust(el) for el in scene.elements))

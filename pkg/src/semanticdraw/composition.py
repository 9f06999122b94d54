"""Composition template library and theme-to-layout matching.

Five classical layouts ship as bundled data; user libraries load from the
same JSON shape.  Template choice scores how close a layout's focal-region
count sits to the number of major theme concepts.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

from .errors import EmptyLibrary, InvalidTemplate, ParseError
from .scene import (
    REGION_ROLES,
    CompositionTemplate,
    Region,
    ThemeConcept,
    rect_from,
)

MAJOR_CONCEPT_WEIGHT = 0.15
COVERAGE_GRID = 100
MIN_COVERAGE = 0.90


def template_violations(template: CompositionTemplate) -> list[str]:
    """Rule names of every invariant the template breaks; empty if valid."""
    problems: list[str] = []
    if not template.id:
        problems.append("missing-id")
    seen: set[str] = set()
    for region in template.regions:
        if region.id in seen:
            problems.append("duplicate-region-id")
        seen.add(region.id)
        b = region.bbox
        if not (0.0 <= b.x0 < b.x1 <= 1.0 and 0.0 <= b.y0 < b.y1 <= 1.0):
            problems.append("region-bbox-out-of-range")
        if region.role not in REGION_ROLES:
            problems.append("unknown-role")
        if not (0.0 <= region.salience <= 1.0):
            problems.append("bad-salience")
    if not any(r.role == "focal" for r in template.regions):
        problems.append("needs-focal")
    if _coverage(template) < MIN_COVERAGE:
        problems.append("low-coverage")
    return problems


def _coverage(template: CompositionTemplate) -> float:
    """Fraction of canvas covered by the region union, sampled on a
    COVERAGE_GRID x COVERAGE_GRID grid of cell centers."""
    boxes = [r.bbox for r in template.regions]
    covered = 0
    for i in range(COVERAGE_GRID):
        x = (i + 0.5) / COVERAGE_GRID
        cols = [b for b in boxes if b.x0 <= x <= b.x1]
        for j in range(COVERAGE_GRID):
            y = (j + 0.5) / COVERAGE_GRID
            if any(b.y0 <= y <= b.y1 for b in cols):
                covered += 1
    return covered / (COVERAGE_GRID * COVERAGE_GRID)


def template_from_dict(obj: Mapping) -> CompositionTemplate:
    try:
        regions = tuple(
            Region(
                id=str(r["id"]),
                bbox=rect_from(r["bbox"]),
                role=str(r.get("role", "support")),
                salience=float(r.get("salience", 0.5)),
            )
            for r in obj.get("regions", [])
        )
        return CompositionTemplate(
            id=str(obj["id"]),
            name=str(obj.get("name", obj["id"])),
            regions=regions,
            description=str(obj.get("description", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad template object: {exc}") from exc


def template_to_dict(template: CompositionTemplate) -> dict:
    return {
        "id": template.id,
        "name": template.name,
        "description": template.description,
        "regions": [
            {
                "id": r.id,
                "bbox": [r.bbox.x0, r.bbox.y0, r.bbox.x1, r.bbox.y1],
                "role": r.role,
                "salience": r.salience,
            }
            for r in template.regions
        ],
    }


def load_templates(source: str) -> list[CompositionTemplate]:
    """Parse a JSON array of template documents, validating each."""
    try:
        data = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(f"template file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("template file must contain a JSON array")
    templates = []
    for obj in data:
        template = template_from_dict(obj)
        problems = template_violations(template)
        if problems:
            raise InvalidTemplate(problems[0], f"template {template.id!r}: {', '.join(problems)}")
        templates.append(template)
    return templates


@lru_cache(maxsize=1)
def _builtin() -> tuple[CompositionTemplate, ...]:
    raw = resources.files("semanticdraw.data").joinpath("templates.json").read_text("utf-8")
    return tuple(load_templates(raw))


def builtin_templates() -> list[CompositionTemplate]:
    """The five bundled layouts: thirds, radial, diagonal, golden, split."""
    return list(_builtin())


def find_template(template_id: str, library: Sequence[CompositionTemplate] | None = None) -> CompositionTemplate:
    for template in library if library is not None else builtin_templates():
        if template.id == template_id:
            return template
    raise InvalidTemplate("unknown-template", f"no template with id {template_id!r}")


def select_composition(
    concepts: Sequence[ThemeConcept],
    library: Sequence[CompositionTemplate],
) -> CompositionTemplate:
    """Pick the template whose focal count best matches the number of major
    concepts (weight >= 0.15); ties break to the smallest template id."""
    if not library:
        raise EmptyLibrary("no templates to select from")
    n = sum(1 for c in concepts if c.weight >= MAJOR_CONCEPT_WEIGHT)
    return min(library, key=lambda t: (abs(len(t.focal_regions()) - n), t.id))


def assign_regions(
    concepts: Sequence[ThemeConcept],
    template: CompositionTemplate,
) -> dict[str, str]:
    """Map concept labels to region ids: heaviest concepts fill focal
    regions by descending salience, overflow round-robins into support
    regions (or back into focal when the template has none)."""
    ordered = sorted(concepts, key=lambda c: (-c.weight, c.label))
    focal = sorted(template.focal_regions(), key=lambda r: (-r.salience, r.id))
    support = sorted(template.support_regions(), key=lambda r: (-r.salience, r.id))
    overflow = support or focal

    assignment: dict[str, str] = {}
    for i, concept in enumerate(ordered):
        if i < len(focal):
            assignment[concept.label] = focal[i].id
        else:
            assignment[concept.label] = overflow[(i - len(focal)) % len(overflow)].id
    return assignment

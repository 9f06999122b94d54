"""Shared fixtures and deterministic generators for scenes, detail sets,
and sessions.  Generators take a random.Random so both hypothesis tests
(via seeds) and seeded acceptance loops reuse the same machinery."""

from __future__ import annotations

import random
from dataclasses import replace

import pytest

from semanticdraw.compiler import scene_hash
from semanticdraw.composition import builtin_templates
from semanticdraw.pipeline import SessionState, now_utc
from semanticdraw.scene import (
    Canvas,
    ColorSpec,
    DetailEntry,
    DetailSet,
    IterationRecord,
    LightingSpec,
    PALETTE,
    Rect,
    SceneElement,
    SceneGraph,
    StyleSpec,
    ThemeConcept,
    round6,
)
from semanticdraw.themes import normalize_weights

WORDS = (
    "river", "bridge", "engine", "lattice", "signal", "forest", "orbit",
    "glacier", "market", "circuit", "harbor", "meadow", "spiral", "anchor",
    "beacon", "canyon", "dune", "ember", "fjord", "grove",
)

CANVASES = (
    Canvas(800, 600, "4:3"),
    Canvas(1024, 1024, "1:1"),
    Canvas(1280, 720, "16:9"),
    Canvas(640, 480, None),
)

MOODS = ("serene", "dramatic", "playful", "somber")
DIRECTIONS = ("top-left", "top", "top-right", "left", "right", "frontal", "backlit")


def words(rng: random.Random, n: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n))


def grid_value(rng: random.Random, lo: int, hi: int) -> float:
    """A value on the 0.01 grid, inclusive bounds given in hundredths."""
    return rng.randint(lo, hi) / 100


def make_root_rect(rng: random.Random) -> Rect:
    x0 = grid_value(rng, 0, 60)
    y0 = grid_value(rng, 0, 60)
    w = grid_value(rng, 20, min(100 - int(x0 * 100), 40))
    h = grid_value(rng, 20, min(100 - int(y0 * 100), 40))
    return Rect(round6(x0), round6(y0), round6(x0 + w), round6(y0 + h))


def quad_cells(parent: Rect) -> list[Rect]:
    mx = round6((parent.x0 + parent.x1) / 2)
    my = round6((parent.y0 + parent.y1) / 2)
    return [
        Rect(parent.x0, parent.y0, mx, my),
        Rect(mx, parent.y0, parent.x1, my),
        Rect(parent.x0, my, mx, parent.y1),
        Rect(mx, my, parent.x1, parent.y1),
    ]


def make_style(rng: random.Random) -> StyleSpec:
    mods = tuple(rng.sample(("bold", "soft", "grainy", "glossy"), rng.randint(0, 2)))
    return StyleSpec(rng.choice(("flat-infographic", "watercolor", "line-art")),
                     mods, rng.randint(0, 10))


def make_color(rng: random.Random) -> ColorSpec:
    primary = rng.choice(PALETTE)[1]
    extra = tuple(c[1] for c in rng.sample(PALETTE, rng.randint(0, 2)))
    return ColorSpec(primary, extra, round6(rng.randint(0, 100) / 100))


def make_element(rng: random.Random, el_id: str, parent_path: str | None,
                 bbox: Rect, depth: int, budget: list[int]) -> SceneElement:
    path = el_id if parent_path is None else f"{parent_path}/{el_id}"
    budget[0] -= 1
    children = []
    if depth < 2 and budget[0] > 0 and rng.random() < 0.5:
        cells = quad_cells(bbox)
        n = rng.randint(1, min(4, budget[0]))
        for i in range(n):
            children.append(
                make_element(rng, f"c{i + 1}", path, cells[i], depth + 1, budget)
            )
    return SceneElement(
        id=el_id,
        path=path,
        bbox=bbox,
        content=words(rng, rng.randint(1, 3)),
        z_order=rng.randint(0, 5),
        region_id=None,
        style=make_style(rng) if rng.random() < 0.4 else None,
        color=make_color(rng) if rng.random() < 0.5 else None,
        children=tuple(children),
    )


def make_scene(rng: random.Random, max_elements: int = 12) -> SceneGraph:
    """A structurally valid scene on the 6dp value grid."""
    template = rng.choice(builtin_templates())
    n_concepts = rng.randint(0, 3)
    concepts = ()
    if n_concepts:
        labels = rng.sample(WORDS, n_concepts)
        weights = normalize_weights([rng.randint(1, 9) for _ in range(n_concepts)])
        concepts = tuple(
            ThemeConcept(label, tuple(sorted(rng.sample(WORDS, rng.randint(1, 3)))), w)
            for label, w in zip(labels, weights)
        )

    budget = [rng.randint(0, max_elements)]
    roots = []
    region_ids = [r.id for r in template.regions]
    i = 0
    while budget[0] > 0:
        i += 1
        root = make_element(rng, f"e{i}", None, make_root_rect(rng), 0, budget)
        if rng.random() < 0.7:
            root = replace(root, region_id=rng.choice(region_ids))
        roots.append(root)

    return SceneGraph(
        canvas=rng.choice(CANVASES),
        theme=words(rng, rng.randint(1, 4)),
        theme_concepts=concepts,
        template_id=template.id,
        style=make_style(rng),
        lighting=LightingSpec(
            light_direction=rng.choice(DIRECTIONS),
            mood=rng.choice(MOODS),
            shadow_strength=round6(rng.randint(0, 100) / 100),
            reflection=rng.random() < 0.5,
        ),
        elements=tuple(roots),
        iteration_index=rng.randint(0, 3),
        seed=rng.getrandbits(63),
    )


def make_detailset(rng: random.Random, paths: list[str] | None = None) -> DetailSet:
    """A detail set over a prefix-closed path universe with random gaps."""
    if paths is None:
        paths = sample_paths(rng)
    entries = {}
    for path in paths:
        entries[path] = DetailEntry(
            content=words(rng, 2) if rng.random() < 0.8 else None,
            bbox=make_root_rect(rng) if rng.random() < 0.7 else None,
            style=make_style(rng) if rng.random() < 0.4 else None,
            color=make_color(rng) if rng.random() < 0.4 else None,
            z_order=rng.randint(0, 5) if rng.random() < 0.6 else None,
        )
    return DetailSet(entries)


def sample_paths(rng: random.Random, max_roots: int = 3) -> list[str]:
    paths = []
    for i in range(rng.randint(0, max_roots)):
        root = f"e{i + 1}"
        paths.append(root)
        for j in range(rng.randint(0, 2)):
            child = f"{root}/c{j + 1}"
            paths.append(child)
            if rng.random() < 0.3:
                paths.append(f"{child}/g1")
    return paths


def make_session(rng: random.Random) -> SessionState:
    scene = make_scene(rng, max_elements=6)
    n_iter = rng.randint(0, 2)
    iterations = tuple(
        IterationRecord(
            index=i,
            scene_snapshot=scene,
            compiled_prompt=words(rng, 6),
            scene_hash=scene_hash(scene),
            timestamp=now_utc(),
            image_ref=f"runs/x/iter-{i}/img.svg" if rng.random() < 0.5 else None,
            user_edits=tuple(words(rng, 2) for _ in range(rng.randint(0, 2))),
        )
        for i in range(n_iter)
    )
    stamp = now_utc()
    return SessionState(
        id=f"{rng.getrandbits(32):08x}-test",
        input_text=words(rng, 10),
        stage=rng.choice(("Input", "Creativity", "Theme", "Composition", "Detailing", "Generate")),
        created_at=stamp,
        updated_at=stamp,
        style=make_style(rng) if rng.random() < 0.7 else None,
        theme=words(rng, 3),
        concepts=make_scene(rng, 0).theme_concepts,
        template_id=scene.template_id,
        current_scene=scene if n_iter else None,
        iterations=iterations,
    )


SAMPLE_ABSTRACT = (
    "Generating pictures from scientific text is unpredictable because prose "
    "prompts are ambiguous. We describe a staged engine that clusters keywords "
    "into weighted concepts, places the concepts with composition templates, "
    "expands each element into bounded sub-elements, adjusts lighting, and "
    "compiles a deterministic prompt so repeated runs reproduce the same picture."
)


@pytest.fixture
def abstract_text() -> str:
    return SAMPLE_ABSTRACT

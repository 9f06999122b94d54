import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from semanticdraw.compiler import serialize_scene
from semanticdraw.composition import find_template
from semanticdraw.errors import InvalidScene, OrphanPath
from semanticdraw.scene import (
    Canvas,
    ColorSpec,
    DetailEntry,
    DetailSet,
    LightingSpec,
    Rect,
    SceneElement,
    SceneGraph,
    StyleSpec,
    detailset_to_scene,
    scene_to_detailset,
    validate_scene,
    walk,
)

from conftest import make_scene


def empty_scene(**overrides) -> SceneGraph:
    base = dict(
        canvas=Canvas(800, 600, "4:3"),
        theme="a quiet harbor",
        theme_concepts=(),
        template_id="thirds",
        style=StyleSpec("flat-infographic"),
        lighting=LightingSpec(),
        elements=(),
    )
    base.update(overrides)
    return SceneGraph(**base)


def leaf(el_id: str, bbox: Rect, parent_path: str | None = None, **overrides) -> SceneElement:
    path = el_id if parent_path is None else f"{parent_path}/{el_id}"
    fields = dict(id=el_id, path=path, bbox=bbox, content=f"content of {el_id}")
    fields.update(overrides)
    return SceneElement(**fields)


class TestValidateScene:
    def test_empty_scene_is_valid(self):
        assert validate_scene(empty_scene(), find_template("thirds")) == []

    def test_bbox_out_of_range_flagged_at_path(self):
        bad = leaf("e1", Rect(0.5, 0.5, 1.1, 1.0))
        scene = empty_scene(elements=(bad,))
        violations = validate_scene(scene)
        assert [(v.path, v.rule) for v in violations] == [("e1", "bbox-out-of-range")]

    def test_budget_exceeded_for_65_elements(self):
        children = tuple(
            leaf(f"c{i}", Rect(0.01 * i, 0.0, 0.01 * i + 0.005, 0.5), "e1")
            for i in range(64)
        )
        root = leaf("e1", Rect(0.0, 0.0, 1.0, 1.0), children=children)
        scene = empty_scene(elements=(root,))
        assert sum(1 for _ in walk(scene)) == 65
        rules = {v.rule for v in validate_scene(scene, element_budget=64)}
        assert rules == {"budget-exceeded"}

    def test_child_escaping_parent_flagged(self):
        child = leaf("c1", Rect(0.0, 0.0, 0.9, 0.9), "e1")
        root = leaf("e1", Rect(0.2, 0.2, 0.8, 0.8), children=(child,))
        rules = {v.rule for v in validate_scene(empty_scene(elements=(root,)))}
        assert "child-outside-parent" in rules

    def test_duplicate_and_mismatched_paths_flagged(self):
        a = leaf("e1", Rect(0.0, 0.0, 0.4, 0.4))
        b = replace(leaf("e2", Rect(0.5, 0.5, 0.9, 0.9)), path="e1")
        rules = {v.rule for v in validate_scene(empty_scene(elements=(a, b)))}
        assert {"duplicate-path", "path-mismatch"} <= rules

    def test_unknown_region_flagged_only_with_template(self):
        el = leaf("e1", Rect(0.1, 0.1, 0.4, 0.4), region_id="nope")
        scene = empty_scene(elements=(el,))
        assert validate_scene(scene) == []
        rules = {v.rule for v in validate_scene(scene, find_template("thirds"))}
        assert rules == {"unknown-region"}

    def test_blank_content_flagged(self):
        el = leaf("e1", Rect(0.1, 0.1, 0.4, 0.4), content="   ")
        rules = {v.rule for v in validate_scene(empty_scene(elements=(el,)))}
        assert rules == {"empty-content"}

    def test_canvas_rules(self):
        rules = {v.rule for v in validate_scene(empty_scene(canvas=Canvas(32, 600, None)))}
        assert "canvas-too-small" in rules
        rules = {v.rule for v in validate_scene(empty_scene(canvas=Canvas(800, 600, "16:9")))}
        assert "aspect-mismatch" in rules

    @given(st.integers(0, 10**9))
    @settings(max_examples=60, deadline=None)
    def test_total_on_generated_scenes(self, seed):
        scene = make_scene(random.Random(seed))
        assert validate_scene(scene) == []


class TestCanonicalForms:
    def test_color_hex_uppercased(self):
        assert ColorSpec("#ff00aa").primary_hex == "#FF00AA"

    def test_style_modifiers_sorted_and_deduped(self):
        assert StyleSpec("x", ("b", "a", "b")).modifiers == ("a", "b")

    def test_equality_independent_of_insertion_order(self):
        a = leaf("a", Rect(0.0, 0.0, 0.3, 0.3), z_order=1)
        b = leaf("b", Rect(0.4, 0.4, 0.8, 0.8), z_order=0)
        assert serialize_scene(empty_scene(elements=(a, b))) == \
            serialize_scene(empty_scene(elements=(b, a)))


class TestDetailSetRoundTrip:
    def test_empty_scene_gives_empty_detailset(self):
        assert scene_to_detailset(empty_scene()).entries == {}

    def test_three_entries_for_root_with_two_children(self):
        kids = (
            leaf("a", Rect(0.1, 0.1, 0.4, 0.4), "e1"),
            leaf("b", Rect(0.5, 0.5, 0.9, 0.9), "e1"),
        )
        root = leaf("e1", Rect(0.0, 0.0, 1.0, 1.0), children=kids)
        details = scene_to_detailset(empty_scene(elements=(root,)))
        assert set(details.entries) == {"e1", "e1/a", "e1/b"}

    def test_invalid_scene_rejected(self):
        bad = leaf("e1", Rect(0.5, 0.5, 1.1, 1.0))
        with pytest.raises(InvalidScene):
            scene_to_detailset(empty_scene(elements=(bad,)))

    def test_empty_details_gives_base_without_elements(self):
        base = make_scene(random.Random(5))
        rebuilt = detailset_to_scene(DetailSet({}), base)
        assert rebuilt.elements == ()
        assert rebuilt.canvas == base.canvas
        assert rebuilt.theme == base.theme

    def test_orphan_path_rejected(self):
        details = DetailSet({"a/b": DetailEntry(content="x", bbox=Rect(0, 0, 0.5, 0.5))})
        with pytest.raises(OrphanPath):
            detailset_to_scene(details, empty_scene())

    @given(st.integers(0, 10**9))
    @settings(max_examples=100, deadline=None)
    def test_round_trip_is_canonical_identity(self, seed):
        scene = make_scene(random.Random(seed))
        rebuilt = detailset_to_scene(scene_to_detailset(scene), scene)
        assert serialize_scene(rebuilt) == serialize_scene(scene)

    @given(st.integers(0, 10**9))
    @settings(max_examples=60, deadline=None)
    def test_detailset_fixpoint(self, seed):
        scene = make_scene(random.Random(seed))
        details = scene_to_detailset(scene)
        again = scene_to_detailset(detailset_to_scene(details, scene))
        assert again.entries == details.entries

#!/usr/bin/env python3
"""Run the full stub-backed pipeline on a sample abstract and dump every
artifact (scene JSON, compiled prompt, debug SVG) into out/demo/."""

from pathlib import Path

from semanticdraw.compiler import compile_prompt, render_debug_svg, scene_hash, serialize_scene
from semanticdraw.composition import find_template
from semanticdraw.pipeline import art_image_creation, stub_backends

ABSTRACT = """Scientific figures are hard to reproduce from prose prompts alone.
We stage the drawing process: keywords cluster into weighted concepts, a
composition template assigns each concept a canvas region, recursive
expansion enriches every element with bounded sub-elements, lighting
adjustment finishes the scene, and a canonical serialization makes every
run content-addressable."""


def main() -> None:
    out = Path("out/demo")
    out.mkdir(parents=True, exist_ok=True)

    backends = stub_backends(str(out))
    scene, prompt, image_ref = art_image_creation(ABSTRACT, None, backends, seed=7)
    template = find_template(scene.template_id)

    (out / "scene.json").write_text(serialize_scene(scene), encoding="utf-8")
    (out / "prompt.txt").write_text(compile_prompt(scene, template), encoding="utf-8")
    (out / "render.svg").write_text(render_debug_svg(scene, template), encoding="utf-8")

    print(f"template:   {scene.template_id}")
    print(f"scene hash: {scene_hash(scene)}")
    print(f"stub image: {image_ref}")
    print(f"artifacts:  {out}/scene.json, prompt.txt, render.svg")
    print()
    print(prompt)


if __name__ == "__main__":
    main()

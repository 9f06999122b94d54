"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile
from pathlib import Path

from .backends import (
    HttpImageClient,
    HttpTextClient,
    image_config_from_env,
    text_config_from_env,
)
from .compiler import compile_prompt, render_debug_svg, scene_hash, serialize_scene
from .composition import builtin_templates, find_template, load_templates
from .errors import SemanticDrawError
from .evaluation import benchmark
from .pipeline import (
    AdvanceParams,
    PipelineBackends,
    SessionStore,
    art_image_creation,
    session_to_jsonable,
    stub_backends,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="semanticdraw", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full pipeline on an input text file")
    run.add_argument("--input", required=True, help="path to the input text")
    run.add_argument("--template", default=None, help="composition template id (default: auto-select)")
    run.add_argument("--backend", choices=("live", "stub"), default="stub")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out-scene", default=None, help="write canonical scene JSON here")
    run.add_argument("--out-svg", default=None, help="write the debug SVG here")
    run.add_argument("--out-prompt", default=None, help="write the compiled prompt here")
    run.add_argument("--templates", default=None, help="JSON file extending/replacing the builtin library")
    run.add_argument("--runs-dir", default=None, help="directory for image artifacts (default: temporary)")

    templates = sub.add_parser("templates", help="inspect the template library")
    templates_sub = templates.add_subparsers(dest="templates_command", required=True)
    templates_list = templates_sub.add_parser("list", help="print template ids, one per line")
    templates_list.add_argument("--templates", default=None, help="JSON file extending/replacing the builtin library")

    evaluate = sub.add_parser("evaluate", help="benchmark a corpus of input texts")
    evaluate.add_argument("--corpus", required=True, help="directory of .txt inputs")
    evaluate.add_argument("--strategy", choices=("sde", "raw"), default="sde")
    evaluate.add_argument("--repeats", type=int, default=3, help="reproducibility repeats per text")
    evaluate.add_argument("--report", default=None, help="write the JSON report here")
    evaluate.add_argument("--backend", choices=("live", "stub"), default="stub")
    evaluate.add_argument("--seed", type=int, default=0)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--sessions-dir", default="sessions")
    serve.add_argument("--backend", choices=("live", "stub"), default="stub")
    serve.add_argument("--allow-origin", default=None, help="CORS origin for the companion UI")

    session = sub.add_parser("session", help="inspect persisted sessions")
    session_sub = session.add_subparsers(dest="session_command", required=True)
    session_show = session_sub.add_parser("show", help="print one session as JSON")
    session_show.add_argument("id")
    session_show.add_argument("--sessions-dir", default="sessions")

    return parser


def _load_library(path: str | None):
    if path is None:
        return None
    return tuple(load_templates(Path(path).read_text(encoding="utf-8")))


def _live_backends(runs_dir: str) -> PipelineBackends:
    text = HttpTextClient(text_config_from_env())
    image = HttpImageClient(image_config_from_env(), out_dir=runs_dir)
    return PipelineBackends(text=text, image=image, judge=text, runs_dir=runs_dir)


def _make_backends(kind: str, runs_dir: str) -> PipelineBackends:
    if kind == "live":
        return _live_backends(runs_dir)
    return stub_backends(runs_dir)


def cmd_run(args) -> int:
    input_path = Path(args.input)
    if not input_path.exists():
        raise SemanticDrawError(f"input file not found: {input_path}")
    text = input_path.read_text(encoding="utf-8")
    library = _load_library(args.templates)
    params = AdvanceParams(library=library)

    def execute(runs_dir: str) -> int:
        backends = _make_backends(args.backend, runs_dir)
        scene, prompt, image_ref = art_image_creation(
            text, args.template, backends, seed=args.seed, params=params,
        )
        template = find_template(scene.template_id, library)
        if args.out_scene:
            Path(args.out_scene).write_text(serialize_scene(scene), encoding="utf-8")
        if args.out_svg:
            Path(args.out_svg).write_text(render_debug_svg(scene, template), encoding="utf-8")
        if args.out_prompt:
            Path(args.out_prompt).write_text(compile_prompt(scene, template), encoding="utf-8")
        print(f"scene-hash: {scene_hash(scene)}")
        print(f"template: {scene.template_id}")
        if image_ref:
            print(f"image: {image_ref}")
        return 0

    if args.runs_dir:
        return execute(args.runs_dir)
    with tempfile.TemporaryDirectory(prefix="sde-run-") as tmp:
        return execute(tmp)


def cmd_templates_list(args) -> int:
    library = _load_library(args.templates) or builtin_templates()
    for template in library:
        print(template.id)
    return 0


def cmd_evaluate(args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise SemanticDrawError(f"corpus directory not found: {corpus_dir}")
    texts = [p.read_text(encoding="utf-8") for p in sorted(corpus_dir.glob("*.txt"))]
    strategy = "raw_prompt" if args.strategy == "raw" else "sde"

    with tempfile.TemporaryDirectory(prefix="sde-eval-") as tmp:
        backends = _make_backends(args.backend, tmp)
        report = benchmark(texts, strategy, backends, n_repro=args.repeats, seed=args.seed)

    print(report.render_table())
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_jsonable(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    backends = _make_backends(args.backend, str(Path(args.sessions_dir) / "runs"))
    app = create_app(args.sessions_dir, allow_origin=args.allow_origin, backends=backends)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_session_show(args) -> int:
    store = SessionStore(args.sessions_dir)
    state = store.load(args.id)
    print(json.dumps(session_to_jsonable(state), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return 1
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "templates":
            return cmd_templates_list(args)
        if args.command == "evaluate":
            return cmd_evaluate(args)
        if args.command == "serve":
            return cmd_serve(args)
        if args.command == "session":
            return cmd_session_show(args)
        parser.error(f"unknown command {args.command!r}")
    except UsageError:
        return 1
    except (SemanticDrawError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

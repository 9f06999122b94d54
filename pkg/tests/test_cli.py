import json
from pathlib import Path

import pytest

from semanticdraw.cli import main

from conftest import SAMPLE_ABSTRACT


@pytest.fixture
def input_file(tmp_path) -> Path:
    path = tmp_path / "abstract.txt"
    path.write_text(SAMPLE_ABSTRACT, encoding="utf-8")
    return path


class TestRun:
    def test_run_twice_writes_identical_bytes(self, tmp_path, input_file, capsys):
        outputs = []
        for i in range(2):
            scene = tmp_path / f"scene-{i}.json"
            svg = tmp_path / f"render-{i}.svg"
            prompt = tmp_path / f"prompt-{i}.txt"
            code = main([
                "run", "--input", str(input_file), "--backend", "stub", "--seed", "7",
                "--out-scene", str(scene), "--out-svg", str(svg), "--out-prompt", str(prompt),
            ])
            assert code == 0
            outputs.append((scene.read_bytes(), svg.read_bytes(), prompt.read_bytes()))
        assert outputs[0] == outputs[1]
        assert "scene-hash:" in capsys.readouterr().out

    def test_explicit_template_honored(self, tmp_path, input_file, capsys):
        code = main(["run", "--input", str(input_file), "--template", "radial",
                     "--out-scene", str(tmp_path / "s.json")])
        assert code == 0
        data = json.loads((tmp_path / "s.json").read_text())
        assert data["template_id"] == "radial"

    def test_missing_input_flag_is_usage_error(self, capsys):
        assert main(["run"]) == 1
        assert "error" in capsys.readouterr().err

    def test_nonexistent_input_is_runtime_error(self, tmp_path, capsys):
        assert main(["run", "--input", str(tmp_path / "ghost.txt")]) == 2
        assert "error" in capsys.readouterr().err

    def test_unknown_template_is_runtime_error(self, input_file, capsys):
        assert main(["run", "--input", str(input_file), "--template", "bogus"]) == 2

    def test_custom_template_library(self, tmp_path, input_file):
        doc = [{
            "id": "full", "name": "full-bleed",
            "regions": [{"id": "all", "bbox": [0, 0, 1, 1], "role": "focal", "salience": 0.9}],
        }]
        library = tmp_path / "library.json"
        library.write_text(json.dumps(doc))
        scene_path = tmp_path / "s.json"
        code = main(["run", "--input", str(input_file), "--templates", str(library),
                     "--template", "full", "--out-scene", str(scene_path)])
        assert code == 0
        assert json.loads(scene_path.read_text())["template_id"] == "full"


class TestTemplates:
    def test_list_prints_five_ids_one_per_line(self, capsys):
        assert main(["templates", "list"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines == ["thirds", "radial", "diagonal", "golden", "split"]


class TestEvaluate:
    def test_smoke_report(self, tmp_path, capsys):
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        (corpus / "a.txt").write_text("a watermill beside a frozen river turning slowly")
        (corpus / "b.txt").write_text(SAMPLE_ABSTRACT)
        report_path = tmp_path / "report.json"
        code = main(["evaluate", "--corpus", str(corpus), "--strategy", "sde",
                     "--repeats", "2", "--report", str(report_path)])
        assert code == 0
        out = capsys.readouterr().out
        assert "Theme Conformity" in out
        data = json.loads(report_path.read_text())
        assert data["n_samples"] == 2
        assert data["image_reproducibility"] == 100.0

    def test_missing_corpus_dir_is_runtime_error(self, tmp_path):
        assert main(["evaluate", "--corpus", str(tmp_path / "nope")]) == 2


class TestSession:
    def test_show_unknown_session_is_runtime_error(self, tmp_path, capsys):
        assert main(["session", "show", "missing", "--sessions-dir", str(tmp_path)]) == 2

    def test_show_round_trips_saved_session(self, tmp_path, capsys):
        import random

        from semanticdraw.pipeline import SessionStore
        from conftest import make_session

        store = SessionStore(tmp_path)
        state = make_session(random.Random(4))
        store.save(state)
        assert main(["session", "show", state.id, "--sessions-dir", str(tmp_path)]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["id"] == state.id


class TestUsage:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 1

    def test_unknown_command_is_usage_error(self, capsys):
        assert main(["transmogrify"]) == 1

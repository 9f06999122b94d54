import itertools
import json

import pytest

from semanticdraw.backends import StubTextClient, TextRequest, TextResponse
from semanticdraw.errors import EmptyCorpus, EvaluationFailed, MalformedOutput
from semanticdraw.evaluation import (
    METRIC_LABELS,
    benchmark,
    judge_scores,
    reproducibility,
)
from semanticdraw.pipeline import PipelineBackends, stub_backends

from conftest import SAMPLE_ABSTRACT


def scripted_judge(conformity=90, artistic=80, understandability=70) -> StubTextClient:
    stub = StubTextClient()
    reply = json.dumps({
        "conformity": conformity,
        "artistic_quality": artistic,
        "understandability": understandability,
    })
    original = stub.complete

    def scripted(request: TextRequest) -> TextResponse:
        if "TASK: judge" in request.user:
            return TextResponse(reply, 0)
        return original(request)

    stub.complete = scripted
    return stub


class TestJudgeScores:
    def test_scripted_scores_pass_through(self):
        scores = judge_scores("paper", "prompt", "", scripted_judge(90, 80, 70))
        assert scores == (90.0, 80.0, 70.0)

    def test_out_of_range_scores_rejected(self):
        judge = scripted_judge(conformity=140)
        with pytest.raises(MalformedOutput):
            judge_scores("paper", "prompt", "", judge)

    def test_deterministic(self):
        judge = scripted_judge()
        assert judge_scores("p", "d", "", judge) == judge_scores("p", "d", "", judge)


class TestReproducibility:
    def test_needs_at_least_two_runs(self):
        with pytest.raises(ValueError):
            reproducibility(lambda: "h", 1)

    def test_deterministic_runner_scores_100(self):
        assert reproducibility(lambda: "same-hash", 5) == 100.0

    def test_all_distinct_scores_20(self):
        counter = itertools.count()
        assert reproducibility(lambda: f"h{next(counter)}", 5) == 20.0

    def test_three_two_split_scores_60(self):
        hashes = iter(["a", "b", "a", "b", "a"])
        assert reproducibility(lambda: next(hashes), 5) == 60.0

    def test_values_always_on_k_over_n_grid(self):
        hashes = iter(["a", "a", "b", "c", "d", "e"])
        score = reproducibility(lambda: next(hashes), 6)
        assert score in {100.0 * k / 6 for k in range(1, 7)}


class TestBenchmark:
    def make_backends(self, tmp_path) -> PipelineBackends:
        base = stub_backends(str(tmp_path))
        return PipelineBackends(text=base.text, image=base.image,
                                judge=scripted_judge(), runs_dir=base.runs_dir)

    def test_single_text_report(self, tmp_path):
        backends = self.make_backends(tmp_path)
        report = benchmark([SAMPLE_ABSTRACT], "sde", backends, n_repro=3)
        assert report.theme_conformity == 90.0
        assert report.artistic_quality == 80.0
        assert report.understandability == 70.0
        assert report.image_reproducibility == 100.0
        assert report.n_samples == 1
        assert report.n_failures == 0
        assert report.computation_time_s > 0

    def test_empty_corpus_rejected(self, tmp_path):
        with pytest.raises(EmptyCorpus):
            benchmark([], "sde", self.make_backends(tmp_path))

    def test_unknown_strategy_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            benchmark(["text"], "osmosis", self.make_backends(tmp_path))

    def test_raw_strategy_runs_and_reproduces(self, tmp_path):
        report = benchmark([SAMPLE_ABSTRACT], "raw_prompt", self.make_backends(tmp_path),
                           n_repro=3)
        assert report.image_reproducibility == 100.0
        assert report.strategy == "raw_prompt"

    def test_partial_failure_recorded(self, tmp_path):
        backends = self.make_backends(tmp_path)
        report = benchmark(["", SAMPLE_ABSTRACT], "sde", backends, n_repro=2)
        assert report.n_failures == 1
        assert report.n_samples == 1
        failed = [s for s in report.per_sample if s.error is not None]
        assert len(failed) == 1

    def test_all_failures_raise(self, tmp_path):
        with pytest.raises(EvaluationFailed):
            benchmark(["", "   "], "sde", self.make_backends(tmp_path))

    def test_table_has_five_labels(self, tmp_path):
        report = benchmark([SAMPLE_ABSTRACT], "sde", self.make_backends(tmp_path), n_repro=2)
        table = report.render_table()
        for label in METRIC_LABELS:
            assert label in table

    def test_report_json_round_trip(self, tmp_path):
        report = benchmark([SAMPLE_ABSTRACT], "sde", self.make_backends(tmp_path), n_repro=2)
        data = json.loads(json.dumps(report.to_jsonable()))
        assert data["theme_conformity"] == report.theme_conformity
        assert data["n_samples"] == report.n_samples
        assert len(data["per_sample"]) == len(report.per_sample)

    def test_means_match_per_sample(self, tmp_path):
        texts = [SAMPLE_ABSTRACT, "a watermill beside a frozen river turning slowly",
                 "bees mapping a meadow of wildflowers in spring light"]
        report = benchmark(texts, "sde", self.make_backends(tmp_path), n_repro=2)
        good = [s for s in report.per_sample if s.error is None]
        assert report.computation_time_s == pytest.approx(
            sum(s.computation_time_s for s in good) / len(good), abs=1e-9)
        assert report.image_reproducibility == pytest.approx(
            sum(s.image_reproducibility for s in good) / len(good), abs=1e-9)

    def test_wall_clock_at_least_backend_latency(self, tmp_path):
        import time

        class SlowStub(StubTextClient):
            def complete(self, request):
                start = time.perf_counter()
                response = super().complete(request)
                time.sleep(0.001)
                latency = int((time.perf_counter() - start) * 1000)
                return TextResponse(response.text, latency_ms=latency)

        base = stub_backends(str(tmp_path))
        backends = PipelineBackends(text=SlowStub(), image=base.image,
                                    judge=scripted_judge(), runs_dir=base.runs_dir)
        report = benchmark([SAMPLE_ABSTRACT], "sde", backends, n_repro=2)
        sample = report.per_sample[0]
        assert sample.backend_latency_ms > 0
        assert sample.computation_time_s * 1000 >= sample.backend_latency_ms

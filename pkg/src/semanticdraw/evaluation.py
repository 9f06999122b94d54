"""Measurement harness: judge-scored quality, wall-clock timing, and
hash-based reproducibility, aggregated into a comparison report."""

from __future__ import annotations

import hashlib
import time
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .backends import (
    ImageRequest,
    TextClient,
    TextResponse,
    complete_json,
    image_generate,
    judge_request,
)
from .errors import EmptyCorpus, EvaluationFailed
from .pipeline import PipelineBackends, art_image_creation
from .scene import DEFAULT_CANVAS

METRIC_LABELS = (
    "Theme Conformity",
    "Artistic Quality",
    "Understandability",
    "Image Reproducibility",
    "Computation Time",
)


@dataclass(frozen=True)
class SampleResult:
    index: int
    theme_conformity: float
    artistic_quality: float
    understandability: float
    image_reproducibility: float
    computation_time_s: float
    backend_latency_ms: int = 0
    scene_hash: str = ""
    error: Optional[str] = None


@dataclass(frozen=True)
class EvalReport:
    theme_conformity: float
    artistic_quality: float
    understandability: float
    image_reproducibility: float
    computation_time_s: float
    n_samples: int
    n_failures: int = 0
    strategy: str = "sde"
    per_sample: tuple[SampleResult, ...] = ()

    def to_jsonable(self) -> dict:
        return {
            "artistic_quality": self.artistic_quality,
            "computation_time_s": self.computation_time_s,
            "image_reproducibility": self.image_reproducibility,
            "n_failures": self.n_failures,
            "n_samples": self.n_samples,
            "per_sample": [
                {
                    "artistic_quality": s.artistic_quality,
                    "backend_latency_ms": s.backend_latency_ms,
                    "computation_time_s": s.computation_time_s,
                    "error": s.error,
                    "image_reproducibility": s.image_reproducibility,
                    "index": s.index,
                    "scene_hash": s.scene_hash,
                    "theme_conformity": s.theme_conformity,
                    "understandability": s.understandability,
                }
                for s in self.per_sample
            ],
            "strategy": self.strategy,
            "theme_conformity": self.theme_conformity,
            "understandability": self.understandability,
        }

    def render_table(self) -> str:
        rows = [
            (METRIC_LABELS[0], f"{self.theme_conformity:.1f}%"),
            (METRIC_LABELS[1], f"{self.artistic_quality:.1f}%"),
            (METRIC_LABELS[2], f"{self.understandability:.1f}%"),
            (METRIC_LABELS[3], f"{self.image_reproducibility:.1f}%"),
            (METRIC_LABELS[4], f"{self.computation_time_s:.1f}s"),
        ]
        width = max(len(label) for label, _ in rows)
        header = f"{'Metric'.ljust(width)}  {self.strategy}"
        lines = [header, "-" * len(header)]
        lines.extend(f"{label.ljust(width)}  {value}" for label, value in rows)
        lines.append(f"(samples: {self.n_samples}, failures: {self.n_failures})")
        return "\n".join(lines)


def judge_scores(paper_text: str, scene_or_prompt: str, image_ref: str,
                 judge: TextClient) -> tuple[float, float, float]:
    """One structured judge call scoring conformity, artistic quality, and
    understandability in [0, 100]."""

    def validate(payload):
        if not isinstance(payload, dict):
            raise ValueError("judge reply must be an object")
        scores = []
        for key in ("conformity", "artistic_quality", "understandability"):
            value = float(payload[key])
            if not (0.0 <= value <= 100.0):
                raise ValueError(f"{key} out of [0, 100]: {value}")
            scores.append(value)
        return tuple(scores)

    return complete_json(judge, judge_request(paper_text, scene_or_prompt, image_ref), validate)


def reproducibility(run: Callable[[], str], n: int) -> float:
    """Share (percent) of the largest group of identical hashes over n runs."""
    if n < 2:
        raise ValueError("reproducibility needs n >= 2")
    hashes = [run() for _ in range(n)]
    largest = max(Counter(hashes).values())
    return 100.0 * largest / n


class _LatencyMeter:
    """Wraps text/image clients to accumulate reported backend latency."""

    def __init__(self):
        self.total_ms = 0

    def text(self, client: TextClient) -> TextClient:
        meter = self

        class Wrapped:
            def complete(self, request) -> TextResponse:
                response = client.complete(request)
                meter.total_ms += response.latency_ms
                return response

        return Wrapped()

    def image(self, client):
        meter = self

        class Wrapped:
            def generate(self, request, *, scene=None, template=None, out_dir=None):
                result = client.generate(request, scene=scene, template=template,
                                         out_dir=out_dir)
                meter.total_ms += result.latency_ms
                return result

        return Wrapped()


def _run_sde(text: str, backends: PipelineBackends, seed: int) -> tuple[str, str]:
    scene, prompt, _ = art_image_creation(text, None, backends, seed=seed)
    from .compiler import scene_hash

    return scene_hash(scene), prompt


def _run_raw(text: str, backends: PipelineBackends, seed: int) -> tuple[str, str]:
    """Baseline treatment: the input text goes to the image backend verbatim;
    the run hash is the hash of that prompt."""
    prompt = text.strip()
    if backends.image is not None:
        request = ImageRequest(prompt=prompt, width_px=DEFAULT_CANVAS.width_px,
                               height_px=DEFAULT_CANVAS.height_px, seed=seed)
        image_generate(backends.image, request)
    digest = hashlib.sha256(prompt.encode("utf-8")).hexdigest()
    return digest, prompt


_STRATEGIES = {"sde": _run_sde, "raw_prompt": _run_raw}


def benchmark(
    corpus: Sequence[str],
    strategy: str,
    backends: PipelineBackends,
    n_repro: int = 3,
    *,
    seed: int = 0,
) -> EvalReport:
    """Per text: one timed strategy run, judge scores on its output, and
    reproducibility over n_repro further runs; means over successful samples."""
    if not corpus:
        raise EmptyCorpus("benchmark corpus is empty")
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; options: {sorted(_STRATEGIES)}")
    runner = _STRATEGIES[strategy]
    judge = backends.judge if backends.judge is not None else backends.text

    samples: list[SampleResult] = []
    for i, text in enumerate(corpus):
        meter = _LatencyMeter()
        metered = PipelineBackends(
            text=meter.text(backends.text) if backends.text is not None else None,
            image=meter.image(backends.image) if backends.image is not None else None,
            judge=backends.judge,
            runs_dir=backends.runs_dir,
        )
        try:
            start = time.perf_counter()
            run_hash, prompt = runner(text, metered, seed)
            elapsed = time.perf_counter() - start
            primary_latency_ms = meter.total_ms

            if judge is None:
                raise EvaluationFailed("no judge client configured")
            conformity, artistic, understandability = judge_scores(text, prompt, "", judge)
            repro = reproducibility(lambda: runner(text, metered, seed)[0], n_repro)

            samples.append(SampleResult(
                index=i,
                theme_conformity=conformity,
                artistic_quality=artistic,
                understandability=understandability,
                image_reproducibility=repro,
                computation_time_s=elapsed,
                backend_latency_ms=primary_latency_ms,
                scene_hash=run_hash,
            ))
        except Exception as exc:  # record and continue; partial reports are useful
            samples.append(SampleResult(
                index=i,
                theme_conformity=0.0,
                artistic_quality=0.0,
                understandability=0.0,
                image_reproducibility=0.0,
                computation_time_s=0.0,
                error=f"{type(exc).__name__}: {exc}",
            ))

    good = [s for s in samples if s.error is None]
    if not good:
        raise EvaluationFailed("every benchmark sample failed")

    def mean(values: list[float]) -> float:
        return sum(values) / len(values)

    return EvalReport(
        theme_conformity=mean([s.theme_conformity for s in good]),
        artistic_quality=mean([s.artistic_quality for s in good]),
        understandability=mean([s.understandability for s in good]),
        image_reproducibility=mean([s.image_reproducibility for s in good]),
        computation_time_s=mean([s.computation_time_s for s in good]),
        n_samples=len(good),
        n_failures=len(samples) - len(good),
        strategy=strategy,
        per_sample=tuple(samples),
    )

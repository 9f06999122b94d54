"""Text- and image-model client contracts, live HTTP implementations, and
deterministic stubs.

Live clients speak OpenAI-compatible JSON over HTTP with retry/backoff;
stubs synthesize deterministic responses so the whole pipeline can run
offline.  Requests between pipeline and text backend are plain prompts
tagged with a TASK marker the stub knows how to answer.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import re
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Optional, Protocol

import httpx

from .errors import BackendError, EmptyPrompt, MalformedOutput

FIXED_STYLES = (
    "flat-infographic",
    "watercolor",
    "oil-painting",
    "line-art",
    "isometric",
    "pixel-art",
    "low-poly",
    "photorealistic",
)


@dataclass(frozen=True)
class BackendConfig:
    endpoint_url: str
    api_key_ref: str = ""
    model_name: str = ""
    timeout_s: float = 60.0
    max_retries: int = 2
    temperature: float = 0.0


@dataclass(frozen=True)
class TextRequest:
    system: str
    user: str
    seed: int = 0


@dataclass(frozen=True)
class TextResponse:
    text: str
    latency_ms: int = 0


@dataclass(frozen=True)
class ImageRequest:
    prompt: str
    width_px: int
    height_px: int
    seed: int = 0


@dataclass(frozen=True)
class ImageResult:
    image_ref: str
    latency_ms: int = 0


class TextClient(Protocol):
    def complete(self, request: TextRequest) -> TextResponse: ...


class ImageClient(Protocol):
    def generate(self, request: ImageRequest, *, scene=None, template=None,
                 out_dir: Optional[str] = None) -> ImageResult: ...


def stable_hash(*parts: object) -> int:
    """Platform- and run-stable 64-bit hash of the stringified parts."""
    joined = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(joined.encode("utf-8")).digest()[:8], "big")


# --- request builders --------------------------------------------------------

def theme_request(labels: list[str], text: str = "") -> TextRequest:
    user = "TASK: theme\nLABELS: " + ", ".join(labels)
    if text:
        user += "\nTEXT: " + text
    return TextRequest(system="You phrase concise visual themes.", user=user)


def style_request(text: str) -> TextRequest:
    user = "TASK: style\nCHOICES: " + ", ".join(FIXED_STYLES) + "\nTEXT: " + text
    return TextRequest(system="Pick exactly one style name from CHOICES.", user=user)


def describe_request(theme: str, label: str) -> TextRequest:
    user = f"TASK: describe\nTHEME: {theme}\nLABEL: {label}"
    return TextRequest(system="Describe one picture element in a short phrase.", user=user)


def expand_request(content: str, max_children: int) -> TextRequest:
    user = f"TASK: expand\nMAX: {max_children}\nCONTENT: {content}"
    return TextRequest(
        system=(
            "Propose sub-elements for the given element as a JSON array of "
            '{"name", "position", "description"} objects.'
        ),
        user=user,
    )


def merge_request(current: str, previous: str) -> TextRequest:
    user = f"TASK: merge\nCURRENT: {current}\nPREVIOUS: {previous}"
    return TextRequest(system="Merge the two element descriptions into one.", user=user)


def judge_request(paper_text: str, prompt: str, image_ref: str) -> TextRequest:
    user = (
        "TASK: judge\n"
        'Score the image description against the source text. Reply with JSON '
        '{"conformity": 0-100, "artistic_quality": 0-100, "understandability": 0-100}.\n'
        f"SOURCE: {paper_text}\nDESCRIPTION: {prompt}\nIMAGE: {image_ref}"
    )
    return TextRequest(system="You are a strict image-quality judge.", user=user)


# --- operations ---------------------------------------------------------------

def text_complete(client: TextClient, request: TextRequest) -> TextResponse:
    return client.complete(request)


def image_generate(client: ImageClient, request: ImageRequest, *, scene=None,
                   template=None, out_dir: Optional[str] = None) -> ImageResult:
    if not request.prompt.strip():
        raise EmptyPrompt("image prompt is empty")
    return client.generate(request, scene=scene, template=template, out_dir=out_dir)


def complete_json(client: TextClient, request: TextRequest,
                  validate: Callable[[Any], Any]) -> Any:
    """Structured-output completion: parse JSON from the reply and validate
    its shape, repropting once before giving up."""
    response = text_complete(client, request)
    try:
        return validate(_extract_json(response.text))
    except (ValueError, KeyError, TypeError):
        pass
    reprompt = replace(
        request,
        user=request.user + "\n\nReturn ONLY valid JSON in the requested shape, nothing else.",
    )
    response = text_complete(client, reprompt)
    try:
        return validate(_extract_json(response.text))
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedOutput(f"backend JSON failed validation after reprompt: {exc}") from exc


def _extract_json(text: str) -> Any:
    t = text.strip()
    t = re.sub(r"^```(?:json)?\s*|\s*```$", "", t)
    try:
        return json.loads(t)
    except json.JSONDecodeError:
        m = re.search(r"[\[{].*[\]}]", t, flags=re.DOTALL)
        if not m:
            raise ValueError("no JSON payload in response")
        return json.loads(m.group(0))


# --- deterministic stubs ------------------------------------------------------

_POSITION_CYCLE = ("center", "upper left", "upper right", "lower left", "lower right",
                   "left", "right", "top", "bottom")


class StubTextClient:
    """Offline text client: scripted answers by exact user string, with a
    deterministic synthesizer for every known TASK marker."""

    def __init__(self, script: Optional[dict[str, str]] = None,
                 expand_children: Optional[int] = None):
        self.script = dict(script or {})
        self.expand_children = expand_children

    def complete(self, request: TextRequest) -> TextResponse:
        if request.user in self.script:
            return TextResponse(self.script[request.user], latency_ms=0)
        return TextResponse(self._synthesize(request), latency_ms=0)

    def _synthesize(self, request: TextRequest) -> str:
        fields = _parse_task(request.user)
        task = fields.get("TASK", "")
        if task == "theme":
            labels = [s.strip() for s in fields.get("LABELS", "").split(",") if s.strip()]
            return " and ".join(labels[:3])
        if task == "style":
            return FIXED_STYLES[stable_hash(fields.get("TEXT", "")) % len(FIXED_STYLES)]
        if task == "describe":
            return f"a depiction of {fields.get('LABEL', 'the subject')}"
        if task == "expand":
            want = int(fields.get("MAX", "0") or 0)
            if self.expand_children is not None:
                want = min(self.expand_children, want)
            content = fields.get("CONTENT", "the element")
            items = [
                {
                    "name": f"part-{i + 1}",
                    "position": _POSITION_CYCLE[i % len(_POSITION_CYCLE)],
                    "description": f"part {i + 1} of {content}",
                }
                for i in range(want)
            ]
            return json.dumps(items)
        if task == "merge":
            return f"{fields.get('CURRENT', '')} (was: {fields.get('PREVIOUS', '')})"
        if task == "judge":
            return json.dumps({"conformity": 80, "artistic_quality": 80, "understandability": 80})
        return ""


def _parse_task(user: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for line in user.splitlines():
        m = re.match(r"^([A-Z]+):\s*(.*)$", line)
        if m:
            fields[m.group(1)] = m.group(2)
    return fields


class StubImageClient:
    """Offline image client: writes the scene's debug SVG (or a plain
    placeholder when no scene is available) and returns its path."""

    def __init__(self, out_dir: str, scene=None, template=None):
        self.out_dir = out_dir
        self.scene = scene
        self.template = template

    def generate(self, request: ImageRequest, *, scene=None, template=None,
                 out_dir: Optional[str] = None) -> ImageResult:
        from .compiler import render_debug_svg

        scene = scene if scene is not None else self.scene
        template = template if template is not None else self.template
        if scene is not None and template is not None:
            svg = render_debug_svg(scene, template)
        else:
            svg = _placeholder_svg(request)
        target = Path(out_dir or self.out_dir)
        target.mkdir(parents=True, exist_ok=True)
        digest = hashlib.sha256(svg.encode("utf-8")).hexdigest()[:12]
        path = target / f"img-{digest}.svg"
        path.write_text(svg, encoding="utf-8")
        return ImageResult(image_ref=str(path), latency_ms=0)


def _placeholder_svg(request: ImageRequest) -> str:
    from xml.sax.saxutils import escape

    snippet = escape(request.prompt[:120])
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{request.width_px}" '
        f'height="{request.height_px}" viewBox="0 0 {request.width_px} {request.height_px}">\n'
        f'<rect x="0" y="0" width="{request.width_px}" height="{request.height_px}" fill="#FFFFFF"/>\n'
        f'<text x="8" y="24" font-family="monospace" font-size="14" fill="#111111">{snippet}</text>\n'
        f"</svg>\n"
    )


# --- live HTTP clients --------------------------------------------------------

class _Transient(Exception):
    def __init__(self, message: str, status: Optional[int] = None):
        self.status = status
        super().__init__(message)


class _Fatal(Exception):
    def __init__(self, message: str, status: Optional[int] = None):
        self.status = status
        super().__init__(message)


def _run_with_retries(fn: Callable[[], Any], max_retries: int,
                      sleep: Callable[[float], None]) -> Any:
    """Retry transient failures (timeouts, 5xx) with exponential backoff
    (base 1s, factor 2); 4xx failures are never retried."""
    attempts = 0
    while True:
        attempts += 1
        try:
            return fn()
        except _Fatal as exc:
            raise BackendError(str(exc), status=exc.status, attempts=attempts) from exc
        except _Transient as exc:
            if attempts > max_retries:
                raise BackendError(str(exc), status=exc.status, attempts=attempts) from exc
            sleep(1.0 * 2 ** (attempts - 1))


def _post_json(config: BackendConfig, body: dict, transport=None) -> dict:
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_ref, "") if config.api_key_ref else ""
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    try:
        with httpx.Client(timeout=config.timeout_s, transport=transport) as client:
            response = client.post(config.endpoint_url, json=body, headers=headers)
    except httpx.TimeoutException as exc:
        raise _Transient(f"timeout calling {config.endpoint_url}") from exc
    except httpx.HTTPError as exc:
        raise _Transient(f"connection failure calling {config.endpoint_url}") from exc
    if response.status_code >= 500:
        raise _Transient(f"server error {response.status_code}", status=response.status_code)
    if response.status_code >= 400:
        raise _Fatal(f"client error {response.status_code}", status=response.status_code)
    try:
        return response.json()
    except (json.JSONDecodeError, ValueError) as exc:
        raise _Fatal("non-JSON response body") from exc


class HttpTextClient:
    """OpenAI-compatible chat-completions client."""

    def __init__(self, config: BackendConfig, transport=None,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._transport = transport
        self._sleep = sleep

    def complete(self, request: TextRequest) -> TextResponse:
        body = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": self.config.temperature,
            "seed": request.seed,
        }

        def call() -> TextResponse:
            start = time.perf_counter()
            data = _post_json(self.config, body, self._transport)
            latency = int((time.perf_counter() - start) * 1000)
            return TextResponse(_parse_text_payload(data), latency_ms=latency)

        return _run_with_retries(call, self.config.max_retries, self._sleep)


def _parse_text_payload(data: dict) -> str:
    choices = data.get("choices")
    if isinstance(choices, list) and choices:
        first = choices[0]
        if isinstance(first, dict):
            message = first.get("message")
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
            if isinstance(first.get("text"), str):
                return first["text"]
    for key in ("text", "output", "result"):
        if isinstance(data.get(key), str):
            return data[key]
    raise _Fatal("no text content in response")


class HttpImageClient:
    """OpenAI-compatible image-generation client; stores each result under
    the run directory and returns the stored path."""

    def __init__(self, config: BackendConfig, out_dir: str, transport=None,
                 sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self.out_dir = out_dir
        self._transport = transport
        self._sleep = sleep

    def generate(self, request: ImageRequest, *, scene=None, template=None,
                 out_dir: Optional[str] = None) -> ImageResult:
        body = {
            "model": self.config.model_name,
            "prompt": request.prompt,
            "size": f"{request.width_px}x{request.height_px}",
            "n": 1,
            "seed": request.seed,
        }

        def call() -> ImageResult:
            start = time.perf_counter()
            data = _post_json(self.config, body, self._transport)
            latency = int((time.perf_counter() - start) * 1000)
            target = Path(out_dir or self.out_dir)
            target.mkdir(parents=True, exist_ok=True)
            return ImageResult(_store_image_payload(data, target), latency_ms=latency)

        return _run_with_retries(call, self.config.max_retries, self._sleep)


def _store_image_payload(data: dict, target: Path) -> str:
    items = data.get("data")
    first = items[0] if isinstance(items, list) and items else {}
    if isinstance(first, dict) and isinstance(first.get("b64_json"), str):
        raw = base64.b64decode(first["b64_json"])
        path = target / f"img-{hashlib.sha256(raw).hexdigest()[:12]}.png"
        path.write_bytes(raw)
        return str(path)
    if isinstance(first, dict) and isinstance(first.get("url"), str):
        url = first["url"]
        path = target / f"img-{hashlib.sha256(url.encode()).hexdigest()[:12]}.url"
        path.write_text(url + "\n", encoding="utf-8")
        return str(path)
    raise _Fatal("no image payload in response")


# --- environment wiring -------------------------------------------------------

def text_config_from_env() -> BackendConfig:
    return BackendConfig(
        endpoint_url=os.environ.get("SDE_TEXT_API_URL", ""),
        api_key_ref="SDE_TEXT_API_KEY",
        model_name=os.environ.get("SDE_TEXT_MODEL", ""),
    )


def image_config_from_env() -> BackendConfig:
    return BackendConfig(
        endpoint_url=os.environ.get("SDE_IMAGE_API_URL", ""),
        api_key_ref="SDE_IMAGE_API_KEY",
        model_name=os.environ.get("SDE_IMAGE_MODEL", ""),
    )

"""Prompt rendering, generation backends, and response parsing.

The four instruction variants are fixed strings; rendering wraps them in a
byte-stable "Text: ... Questions:" scaffold so responses are easy to parse
back into individual questions. Backends implement a single
``complete(request)`` call; the HTTP flavors retry transport failures and
5xx with exponential backoff, and the mock flavor fabricates deterministic
questions from the context so whole pipeline runs are reproducible
offline.
"""

from __future__ import annotations

import hashlib
import re
import time
from dataclasses import dataclass
from typing import Callable, Protocol

import requests

from .errors import (
    BackendRejected,
    BackendTimeout,
    BackendUnavailable,
    NoQuestionsFound,
)
from .rng import Xoshiro256

PROMPT_IDS = ("A", "B", "C", "D")

_INSTRUCTIONS = {
    "A": "Generate 5 questions from the text;",
    "B": "Generate 5 complex questions from the text.",
    "C": "Generate 5 questions from the text; make sure the questions can be answered.",
    "D": (
        "Generate 5 questions from the text; answer the question in the text; "
        "if the question is answered in the context, output 5 questions."
    ),
}


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    instruction: str

    def __post_init__(self) -> None:
        if self.id not in PROMPT_IDS:
            raise ValueError(f"unknown prompt id {self.id!r}")


def default_templates(ids: str = "ABCD") -> list[PromptTemplate]:
    return [PromptTemplate(id=i, instruction=_INSTRUCTIONS[i]) for i in ids]


@dataclass(frozen=True)
class GenerationConfig:
    temperature: float = 0.5
    questions_per_prompt: int = 5
    max_output_tokens: int = 256
    seed: int = 0  # consumed by the mock backend only

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.questions_per_prompt < 1:
            raise ValueError("questions_per_prompt must be >= 1")


@dataclass(frozen=True)
class GeneratedQuestion:
    context_id: int
    prompt_id: str
    index: int
    text: str


@dataclass(frozen=True)
class BackendRequest:
    prompt: str
    temperature: float
    max_tokens: int


@dataclass(frozen=True)
class BackendResponse:
    text: str


@dataclass
class CallRecord:
    latency_s: float
    retries: int


def render_prompt(template: PromptTemplate, context: str) -> str:
    """Instruction, then the context, then the answer cue; byte-stable."""
    if not context:
        raise ValueError("context must be non-empty")
    return f"{template.instruction}\nText: {context}\nQuestions:"


class Backend(Protocol):
    def complete(self, request: BackendRequest) -> str: ...

    def identity(self) -> dict: ...


def generate(
    backend: Backend,
    prompt: str,
    cfg: GenerationConfig,
    call_log: list[CallRecord] | None = None,
) -> BackendResponse:
    """Send one prompt and return the raw completion text.

    Latency and the backend's retry count for the call are appended to
    ``call_log`` when one is supplied.
    """
    started = time.monotonic()
    text = backend.complete(
        BackendRequest(
            prompt=prompt,
            temperature=cfg.temperature,
            max_tokens=cfg.max_output_tokens,
        )
    )
    if call_log is not None:
        retries = getattr(backend, "last_retries", 0)
        call_log.append(CallRecord(latency_s=time.monotonic() - started, retries=retries))
    return BackendResponse(text=text)


# -- mock backend ------------------------------------------------------------

_SENTENCE_RE = re.compile(r"[^.!?]+[.!?]?")
_CAPWORD_RE = re.compile(r"[A-Z][\w'-]*(?:\s+[A-Z][\w'-]*)*")
_COUNT_RE = re.compile(r"Generate (\d+)")
_CONTEXT_RE = re.compile(r"\nText: (.*)\nQuestions:$", re.DOTALL)

_QUESTION_FORMS = (
    "What is mentioned about {np}?",
    "Who is associated with {np}?",
    "When is {np} relevant in the passage?",
    "What does the text say about {np}?",
)


class MockBackend:
    """Deterministic stand-in for a text-generation service.

    Fabricates a numbered list of question-shaped lines from the context
    embedded in the prompt: it picks sentences with a seeded choice and
    rewrites each around the sentence's leading capitalized token span.
    The per-call stream is derived from (seed, sha256(prompt)), so a fixed
    seed and prompt always produce the same bytes, calls are stateless,
    and concurrent dispatch is safe. Useful for pipeline testing, not for
    linguistic quality.
    """

    last_retries = 0

    def __init__(self, seed: int = 0) -> None:
        self.seed = seed

    def identity(self) -> dict:
        return {"kind": "mock", "seed": self.seed}

    def complete(self, request: BackendRequest) -> str:
        match = _CONTEXT_RE.search(request.prompt)
        source = match.group(1) if match else request.prompt
        count_match = _COUNT_RE.search(request.prompt)
        count = int(count_match.group(1)) if count_match else 5

        digest = hashlib.sha256(request.prompt.encode("utf-8")).digest()
        rng = Xoshiro256(self.seed ^ int.from_bytes(digest[:8], "big"))

        sentences = [s.strip() for s in _SENTENCE_RE.findall(source) if s.strip()]
        if not sentences:
            sentences = [source.strip() or "the text"]
        lines = []
        for i in range(count):
            sentence = rng.choice(sentences)
            cap = _CAPWORD_RE.search(sentence)
            subject = cap.group(0) if cap else sentence.split()[0]
            form = rng.choice(_QUESTION_FORMS)
            lines.append(f"{i + 1}. {form.format(np=subject)}")
        return "\n".join(lines)


# -- HTTP backends -----------------------------------------------------------

def _retrying_post(
    session: requests.Session,
    url: str,
    payload: dict,
    headers: dict,
    timeout_s: float,
    attempts: int,
    backoff_base_s: float,
    sleep: Callable[[float], None],
) -> tuple[requests.Response, int]:
    """POST with bounded retries on transport errors and 5xx.

    Returns the successful response and the number of retries consumed.
    4xx responses raise immediately; exhausted retries raise
    BackendTimeout for timeouts and BackendUnavailable otherwise.
    """
    last_exc: Exception | None = None
    timed_out = False
    for attempt in range(attempts):
        if attempt > 0:
            sleep(backoff_base_s * (2 ** (attempt - 1)))
        try:
            resp = session.post(url, json=payload, headers=headers, timeout=timeout_s)
        except requests.Timeout as exc:
            last_exc = exc
            timed_out = True
            continue
        except requests.RequestException as exc:
            last_exc = exc
            timed_out = False
            continue
        if 400 <= resp.status_code < 500:
            raise BackendRejected(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 500:
            last_exc = BackendUnavailable(f"HTTP {resp.status_code}")
            timed_out = False
            continue
        return resp, attempt
    if timed_out:
        raise BackendTimeout(
            f"no answer from {url} within {timeout_s}s after {attempts} attempts"
        ) from last_exc
    raise BackendUnavailable(
        f"{url} unavailable after {attempts} attempts: {last_exc}"
    ) from last_exc


class HttpBackend:
    """Minimal wire contract: POST {prompt, temperature, max_tokens} -> {text}."""

    def __init__(
        self,
        url: str,
        token: str | None = None,
        timeout_s: float = 30.0,
        attempts: int = 3,
        backoff_base_s: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.url = url
        self.token = token
        self.timeout_s = timeout_s
        self.attempts = attempts
        self.backoff_base_s = backoff_base_s
        self.sleep = sleep
        self.last_retries = 0

    def identity(self) -> dict:
        return {"kind": "http", "url": self.url}

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    def complete(self, request: BackendRequest) -> str:
        payload = {
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        with requests.Session() as session:
            resp, retries = _retrying_post(
                session,
                self.url,
                payload,
                self._headers(),
                self.timeout_s,
                self.attempts,
                self.backoff_base_s,
                self.sleep,
            )
        self.last_retries = retries
        return self._extract(resp)

    def _extract(self, resp: requests.Response) -> str:
        try:
            body = resp.json()
            text = body["text"]
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendRejected(f"response body lacks 'text': {exc}") from exc
        if not isinstance(text, str):
            raise BackendRejected("'text' field is not a string")
        return text


class OpenAICompletionsBackend(HttpBackend):
    """Adapter for OpenAI-compatible /completions endpoints.

    Same request fields plus an optional model name; the completion text
    is read from choices[0].text.
    """

    def __init__(self, url: str, token: str | None = None, model: str | None = None, **kw) -> None:
        super().__init__(url, token, **kw)
        self.model = model

    def identity(self) -> dict:
        return {"kind": "openai", "url": self.url, "model": self.model}

    def complete(self, request: BackendRequest) -> str:
        payload = {
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if self.model:
            payload["model"] = self.model
        with requests.Session() as session:
            resp, retries = _retrying_post(
                session,
                self.url,
                payload,
                self._headers(),
                self.timeout_s,
                self.attempts,
                self.backoff_base_s,
                self.sleep,
            )
        self.last_retries = retries
        try:
            body = resp.json()
            text = body["choices"][0]["text"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendRejected(f"response body lacks choices[0].text: {exc}") from exc
        if not isinstance(text, str):
            raise BackendRejected("choices[0].text is not a string")
        return text


# -- response parsing ----------------------------------------------------------

@dataclass(frozen=True)
class ParsedQuestions:
    texts: tuple[str, ...]
    shortfall: bool


_NUM_LINE_RE = re.compile(r"^\d{1,3}[.)]\s+")
_NUM_MARKER_RE = re.compile(r"(?:^|(?<=\s))\d{1,3}[.)]\s+")
_BULLET_RE = re.compile(r"^[-*]\s+")
_TRAILING_TERMINAL_RE = re.compile(r"[.?!]+$")


def _normalize(text: str) -> str:
    text = text.strip()
    match = _TRAILING_TERMINAL_RE.search(text)
    if match:
        text = text[: match.start()] + match.group(0)[-1]
    return text


def parse_questions(raw: str, expected: int) -> ParsedQuestions:
    """Pull individual questions out of a completion.

    Accepts numbered items ("1.", "1)", inline or one per line), bulleted
    items ("-", "*"), and bare lines ending in a question mark. Markers and
    surrounding whitespace are stripped, repeated terminal punctuation is
    collapsed, and at most ``expected`` items are returned in order.
    ``shortfall`` is set when fewer than ``expected`` were found; zero
    items raises NoQuestionsFound.
    """
    items: list[str] = []
    for line in raw.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if _NUM_LINE_RE.match(stripped):
            segments = _NUM_MARKER_RE.split(stripped)
            items.extend(seg for seg in (s.strip() for s in segments) if seg)
        elif _BULLET_RE.match(stripped):
            item = _BULLET_RE.sub("", stripped).strip()
            if item:
                items.append(item)
        elif stripped.endswith("?"):
            items.append(stripped)
    items = [_normalize(i) for i in items]
    items = [i for i in items if i]
    if not items:
        raise NoQuestionsFound("response contained no parseable questions")
    kept = items[:expected]
    return ParsedQuestions(texts=tuple(kept), shortfall=len(kept) < expected)

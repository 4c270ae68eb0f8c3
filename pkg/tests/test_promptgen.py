"""Prompt rendering, mock and HTTP backends, response parsing."""

from __future__ import annotations

import json
import socket
import threading
import time
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from qgen.errors import (
    BackendRejected,
    BackendTimeout,
    BackendUnavailable,
    NoQuestionsFound,
)
from qgen.promptgen import (
    PROMPT_IDS,
    BackendRequest,
    CallRecord,
    GenerationConfig,
    HttpBackend,
    MockBackend,
    OpenAICompletionsBackend,
    PromptTemplate,
    default_templates,
    generate,
    parse_questions,
    render_prompt,
)

EXPECTED_INSTRUCTIONS = {
    "A": "Generate 5 questions from the text;",
    "B": "Generate 5 complex questions from the text.",
    "C": "Generate 5 questions from the text; make sure the questions can be answered.",
    "D": (
        "Generate 5 questions from the text; answer the question in the text; "
        "if the question is answered in the context, output 5 questions."
    ),
}


# -- templates and rendering -----------------------------------------------------

def test_instruction_strings_byte_exact():
    templates = {t.id: t.instruction for t in default_templates()}
    assert templates == EXPECTED_INSTRUCTIONS


def test_default_templates_order_and_subset():
    assert [t.id for t in default_templates()] == list(PROMPT_IDS)
    assert [t.id for t in default_templates("DB")] == ["D", "B"]


def test_unknown_prompt_id_rejected():
    with pytest.raises(ValueError):
        PromptTemplate(id="E", instruction="whatever")
    with pytest.raises(KeyError):
        default_templates("AX")


def test_render_prompt_example():
    tpl = default_templates("A")[0]
    assert render_prompt(tpl, "Hello world.") == (
        "Generate 5 questions from the text;\nText: Hello world.\nQuestions:"
    )


def test_render_prompt_rejects_empty_context():
    with pytest.raises(ValueError):
        render_prompt(default_templates("A")[0], "")


def test_generation_config_validation():
    cfg = GenerationConfig()
    assert (cfg.temperature, cfg.questions_per_prompt, cfg.max_output_tokens) == (
        0.5,
        5,
        256,
    )
    with pytest.raises(ValueError):
        GenerationConfig(temperature=-0.1)
    with pytest.raises(ValueError):
        GenerationConfig(questions_per_prompt=0)


# -- mock backend -------------------------------------------------------------------

CONTEXT = (
    "The Aster Observatory sits on Mount Calder. "
    "Construction finished in 1928. "
    "Lena Moss directed the first survey."
)


def mock_prompt(context: str = CONTEXT, prompt_id: str = "A") -> str:
    return render_prompt(default_templates(prompt_id)[0], context)


def test_mock_is_deterministic_per_seed_and_prompt():
    req = BackendRequest(prompt=mock_prompt(), temperature=0.5, max_tokens=256)
    a = MockBackend(seed=7).complete(req)
    b = MockBackend(seed=7).complete(req)
    assert a == b
    assert MockBackend(seed=8).complete(req) != a


def test_mock_outputs_vary_across_seeds():
    req = BackendRequest(prompt=mock_prompt(), temperature=0.5, max_tokens=256)
    outputs = {MockBackend(seed=s).complete(req) for s in range(100)}
    assert len(outputs) >= 95


def test_mock_outputs_vary_across_prompts():
    backend = MockBackend(seed=0)
    seen = {
        backend.complete(
            BackendRequest(prompt=mock_prompt(prompt_id=pid), temperature=0.5, max_tokens=256)
        )
        for pid in PROMPT_IDS
    }
    assert len(seen) == 4


def test_mock_emits_numbered_question_lines():
    req = BackendRequest(prompt=mock_prompt(), temperature=0.5, max_tokens=256)
    lines = MockBackend(seed=3).complete(req).splitlines()
    assert len(lines) == 5
    for i, line in enumerate(lines, start=1):
        assert line.startswith(f"{i}. ")
        assert line.endswith("?")


def test_mock_honors_requested_count():
    prompt = mock_prompt().replace("Generate 5", "Generate 3")
    req = BackendRequest(prompt=prompt, temperature=0.5, max_tokens=256)
    assert len(MockBackend(seed=1).complete(req).splitlines()) == 3


def test_mock_is_stateless_across_calls():
    backend = MockBackend(seed=5)
    req1 = BackendRequest(prompt=mock_prompt(prompt_id="A"), temperature=0.5, max_tokens=256)
    req2 = BackendRequest(prompt=mock_prompt(prompt_id="B"), temperature=0.5, max_tokens=256)
    first = backend.complete(req1)
    backend.complete(req2)
    assert backend.complete(req1) == first


def test_mock_handles_prompt_without_scaffold():
    req = BackendRequest(prompt="just words, no scaffold", temperature=0.5, max_tokens=256)
    out = MockBackend(seed=0).complete(req)
    assert len(out.splitlines()) == 5


def test_mock_identity():
    assert MockBackend(seed=9).identity() == {"kind": "mock", "seed": 9}


def test_generate_records_call_log():
    log: list[CallRecord] = []
    backend = MockBackend(seed=2)
    resp = generate(backend, mock_prompt(), GenerationConfig(), call_log=log)
    assert resp.text
    assert len(log) == 1
    assert log[0].latency_s >= 0.0
    assert log[0].retries == 0


# -- HTTP wire contract ----------------------------------------------------------------

@contextmanager
def scripted_server(script: list, reply: dict | str | None = None):
    """Serve scripted statuses; "ok" entries reply 200 with ``reply`` JSON."""
    state = {"captured": [], "script": list(script)}
    ok_body = reply if reply is not None else {"text": "1. Why?"}

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            length = int(self.headers.get("Content-Length", 0))
            state["captured"].append(
                {
                    "path": self.path,
                    "headers": dict(self.headers),
                    "body": json.loads(self.rfile.read(length) or b"{}"),
                }
            )
            step = state["script"].pop(0) if state["script"] else "ok"
            if step == "ok":
                data = (
                    ok_body.encode("utf-8")
                    if isinstance(ok_body, str)
                    else json.dumps(ok_body).encode("utf-8")
                )
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)
            elif step == "sleep":
                time.sleep(0.75)
                try:
                    self.send_response(200)
                    self.end_headers()
                except OSError:
                    pass
            else:
                self.send_response(int(step))
                self.send_header("Content-Length", "0")
                self.end_headers()

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    server.daemon_threads = True
    server.block_on_close = False
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}/complete", state
    finally:
        server.shutdown()
        server.server_close()


REQ = BackendRequest(prompt="Generate 5 questions.", temperature=0.5, max_tokens=128)


def test_http_request_fields_and_auth_header():
    with scripted_server(["ok"]) as (url, state):
        backend = HttpBackend(url, token="tok123", sleep=lambda s: None)
        text = backend.complete(REQ)
    assert text == "1. Why?"
    captured = state["captured"]
    assert len(captured) == 1
    body = captured[0]["body"]
    assert body == {
        "prompt": "Generate 5 questions.",
        "temperature": 0.5,
        "max_tokens": 128,
    }
    assert captured[0]["headers"]["Authorization"] == "Bearer tok123"
    assert captured[0]["headers"]["Content-Type"].startswith("application/json")


def test_http_no_token_no_auth_header():
    with scripted_server(["ok"]) as (url, state):
        HttpBackend(url, sleep=lambda s: None).complete(REQ)
    assert "Authorization" not in state["captured"][0]["headers"]


def test_http_retries_5xx_then_succeeds():
    sleeps: list[float] = []
    with scripted_server([503, 503, "ok"]) as (url, state):
        backend = HttpBackend(url, sleep=sleeps.append)
        text = backend.complete(REQ)
    assert text == "1. Why?"
    assert backend.last_retries == 2
    assert len(state["captured"]) == 3
    assert sleeps == [1.0, 2.0]


def test_http_gives_up_after_three_5xx():
    sleeps: list[float] = []
    with scripted_server([503, 503, 503]) as (url, state):
        backend = HttpBackend(url, sleep=sleeps.append)
        with pytest.raises(BackendUnavailable):
            backend.complete(REQ)
    assert len(state["captured"]) == 3
    assert sleeps == [1.0, 2.0]


def test_http_4xx_rejected_without_retry():
    sleeps: list[float] = []
    with scripted_server([400]) as (url, state):
        backend = HttpBackend(url, sleep=sleeps.append)
        with pytest.raises(BackendRejected):
            backend.complete(REQ)
    assert len(state["captured"]) == 1
    assert sleeps == []


def test_http_timeout_raises_backend_timeout():
    with scripted_server(["sleep", "sleep"]) as (url, _):
        backend = HttpBackend(url, timeout_s=0.2, attempts=2, sleep=lambda s: None)
        with pytest.raises(BackendTimeout):
            backend.complete(REQ)


def test_http_connection_refused_unavailable():
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    backend = HttpBackend(
        f"http://127.0.0.1:{port}/complete", attempts=2, sleep=lambda s: None
    )
    with pytest.raises(BackendUnavailable):
        backend.complete(REQ)


def test_http_malformed_body_rejected():
    with scripted_server(["ok"], reply={"wrong": "shape"}) as (url, _):
        with pytest.raises(BackendRejected):
            HttpBackend(url, sleep=lambda s: None).complete(REQ)
    with scripted_server(["ok"], reply="not json at all") as (url, _):
        with pytest.raises(BackendRejected):
            HttpBackend(url, sleep=lambda s: None).complete(REQ)


def test_http_identity_and_call_log():
    with scripted_server([503, "ok"]) as (url, _):
        backend = HttpBackend(url, sleep=lambda s: None)
        assert backend.identity() == {"kind": "http", "url": url}
        log: list[CallRecord] = []
        generate(backend, "Generate 5 questions.\nText: x\nQuestions:",
                 GenerationConfig(max_output_tokens=128), call_log=log)
        assert log[0].retries == 1
        assert log[0].latency_s >= 0.0


def test_openai_adapter_reads_choices():
    reply = {"choices": [{"text": "1. What?\n2. Who?"}]}
    with scripted_server(["ok"], reply=reply) as (url, state):
        backend = OpenAICompletionsBackend(url, token="k", model="m-1", sleep=lambda s: None)
        text = backend.complete(REQ)
    assert text == "1. What?\n2. Who?"
    body = state["captured"][0]["body"]
    assert body["model"] == "m-1"
    assert body["prompt"] == REQ.prompt
    assert backend.identity() == {"kind": "openai", "url": url, "model": "m-1"}


def test_openai_adapter_rejects_missing_choices():
    with scripted_server(["ok"], reply={"choices": []}) as (url, _):
        with pytest.raises(BackendRejected):
            OpenAICompletionsBackend(url, sleep=lambda s: None).complete(REQ)


# -- response parsing -----------------------------------------------------------------

def test_parse_inline_numbered_shortfall():
    parsed = parse_questions("1. Who? 2. What?", expected=5)
    assert parsed.texts == ("Who?", "What?")
    assert parsed.shortfall is True


def test_parse_paren_numbered_lines():
    raw = "1) First one?\n2) Second one?\n3) Third one?\n4) Fourth one?\n5) Fifth one?"
    parsed = parse_questions(raw, expected=5)
    assert len(parsed.texts) == 5
    assert parsed.texts[0] == "First one?"
    assert parsed.shortfall is False


def test_parse_bulleted_items():
    parsed = parse_questions("- Who came first?\n* What came next?", expected=2)
    assert parsed.texts == ("Who came first?", "What came next?")


def test_parse_bare_question_lines():
    raw = "Here are some questions:\nWhat is the answer?\nnot a question line\nWhy now?"
    parsed = parse_questions(raw, expected=2)
    assert parsed.texts == ("What is the answer?", "Why now?")


def test_parse_does_not_split_mid_line_prose_numbers():
    parsed = parse_questions("Question 1. What is X?", expected=1)
    assert parsed.texts == ("Question 1. What is X?",)


def test_parse_truncates_to_expected():
    raw = "\n".join(f"{i}. Item {i}?" for i in range(1, 8))
    parsed = parse_questions(raw, expected=5)
    assert len(parsed.texts) == 5
    assert parsed.shortfall is False
    assert parsed.texts[-1] == "Item 5?"


def test_parse_collapses_repeated_terminal_punctuation():
    parsed = parse_questions("1. What???\n2. Where...", expected=2)
    assert parsed.texts == ("What?", "Where.")


def test_parse_drops_empty_items():
    parsed = parse_questions("1. \n2. What?", expected=5)
    assert parsed.texts == ("What?",)


def test_parse_no_questions_found():
    with pytest.raises(NoQuestionsFound):
        parse_questions("no questions in here.", expected=5)
    with pytest.raises(NoQuestionsFound):
        parse_questions("", expected=5)


def test_parse_mock_output_round_trip():
    req = BackendRequest(prompt=mock_prompt(), temperature=0.5, max_tokens=256)
    raw = MockBackend(seed=4).complete(req)
    parsed = parse_questions(raw, expected=5)
    assert len(parsed.texts) == 5
    assert parsed.shortfall is False
    assert all(t.endswith("?") for t in parsed.texts)

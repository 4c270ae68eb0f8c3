"""Shared fixtures: tiny corpora, deterministic vector files, summary hook.

The synthetic corpus builder writes SQuAD-format files whose answer
offsets are located with str.index at build time, so fixtures are valid
by construction. Vector files assign each token a sha256-derived vector;
the values are arbitrary but stable across platforms, which is all the
determinism tests need.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from pathlib import Path

import pytest

from qgen.similarity import tokenize

DEMO_DATA = Path(__file__).resolve().parent.parent / "demos" / "data"

# words the mock backend's question templates can introduce, which the
# vector files must cover to avoid accidental zero vectors
MOCK_TEMPLATE_WORDS = (
    "what is mentioned about who associated with when relevant in the "
    "passage does text say"
)


def make_squad_doc(articles) -> dict:
    """Build a SQuAD v1.1 document from (title, [(context, [(q, a)])]).

    Answer offsets are found with str.index, so every span is valid by
    construction; the answer string must occur in its context.
    """
    data = []
    qid = 0
    for title, paras in articles:
        paragraphs = []
        for context, qas_src in paras:
            qas = []
            for question, answer in qas_src:
                start = context.index(answer)
                qas.append(
                    {
                        "id": f"fx-{qid:05d}",
                        "question": question,
                        "answers": [{"text": answer, "answer_start": start}],
                    }
                )
                qid += 1
            paragraphs.append({"context": context, "qas": qas})
        data.append({"title": title, "paragraphs": paragraphs})
    return {"version": "1.1", "data": data}


def sha_vector(token: str, dim: int) -> list[float]:
    """Deterministic pseudo-vector in [-1, 1]^dim; never the zero vector."""
    out: list[float] = []
    counter = 0
    while len(out) < dim:
        h = hashlib.sha256(f"{token}\x00{counter}".encode()).digest()
        for i in range(0, 32, 4):
            if len(out) >= dim:
                break
            u = struct.unpack(">I", h[i : i + 4])[0]
            out.append((u / 2**32) * 2.0 - 1.0)
        counter += 1
    return out


def write_vector_file(path: Path, vocab, dim: int = 32) -> Path:
    lines = []
    for token in sorted(set(vocab)):
        comps = " ".join(f"{v:.6f}" for v in sha_vector(token, dim))
        lines.append(f"{token} {comps}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def corpus_vocab(doc: dict) -> set[str]:
    vocab: set[str] = set(tokenize(MOCK_TEMPLATE_WORDS))
    for article in doc["data"]:
        for para in article["paragraphs"]:
            vocab |= set(tokenize(para["context"]))
            for qa in para["qas"]:
                vocab |= set(tokenize(qa["question"]))
    return vocab


_TOPICS = [
    ("Harbor Lights", "lighthouse", "keeper"),
    ("Iron Road", "railway", "engineer"),
    ("Glass Works", "factory", "founder"),
    ("Stone Bridge", "bridge", "architect"),
    ("North Field", "farm", "owner"),
    ("Mill Creek", "mill", "miller"),
]

_NAMES = [
    "Adler", "Boryn", "Calder", "Devin", "Elsmore", "Fairow", "Garrick",
    "Halden", "Ingram", "Jessop", "Kirwan", "Lowell", "Marric", "Norwood",
    "Orman", "Peralt", "Quiller", "Rostov", "Seabrook", "Tavish",
]


def build_synth_articles(n_contexts: int):
    """Deterministic corpus of distinct single-paragraph articles."""
    articles = []
    for i in range(n_contexts):
        topic, thing, role = _TOPICS[i % len(_TOPICS)]
        name = f"{_NAMES[i % len(_NAMES)]} {_NAMES[(i * 7 + 3) % len(_NAMES)]}"
        year = 1800 + (i * 13) % 180
        count = 3 + (i * 5) % 40
        place = f"{_NAMES[(i * 11 + 5) % len(_NAMES)]}ton"
        context = (
            f"The {thing} at {place} number {i} opened in {year}. "
            f"Its first {role} was {name}, who served for {count} years. "
            f"Records from {place} describe the {thing} as the busiest in the district."
        )
        qas = [
            (f"When did the {thing} at {place} number {i} open?", str(year)),
            (f"Who was the first {role} of the {thing} at {place}?", name),
            (f"How many years did the first {role} serve?", str(count)),
        ]
        articles.append((f"{topic} {i}", [(context, qas)]))
    return articles


@pytest.fixture(scope="session")
def mini_squad_path() -> Path:
    return DEMO_DATA / "mini_squad.json"

@pytest.fixture(scope="session")
def demo_vectors_path() -> Path:
    return DEMO_DATA / "vectors_50d.txt"


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory) -> tuple[Path, Path]:
    """60-context dataset plus a vector file covering its vocabulary."""
    root = tmp_path_factory.mktemp("synth")
    doc = make_squad_doc(build_synth_articles(60))
    dataset = root / "synth_squad.json"
    dataset.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
    vectors = write_vector_file(root / "synth_vectors.txt", corpus_vocab(doc))
    return dataset, vectors


# -- acceptance summary ----------------------------------------------------

ACCEPTANCE_LABELS = {
    1: "SQuAD fidelity (official train/dev counts)",
    2: "Table 2 aggregation oracle",
    3: "similarity property suite (10k pairs)",
    4: "brute-force equivalence (1000 instances)",
    5: "chunking property (coverage, overlap, containment)",
    6: "deterministic end-to-end (mock backend)",
    7: "reference values documented, not asserted",
    8: "histogram conservation",
}

_CRITERION_RE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results: dict[int, str] = {}
    for outcome, word in (("passed", "PASS"), ("failed", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(outcome, []):
            match = _CRITERION_RE.search(report.nodeid)
            if match:
                results[int(match.group(1))] = word
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(results):
        label = ACCEPTANCE_LABELS.get(number, "")
        terminalreporter.write_line(
            f"criterion {number}: {results[number]} - {label}"
        )

"""Word-vector sentence similarity.

A sentence vector is the arithmetic mean of the word vectors of its
in-vocabulary tokens; sentence similarity is the cosine of two such
vectors. Out-of-vocabulary tokens are skipped but counted, and a sentence
with no known tokens gets the zero vector, which compares as 0.0 to
everything rather than raising. Accumulation is plain left-to-right
float64 so repeated runs are bit-identical.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import IO, Iterable, Mapping

import numpy as np

from .errors import BadFloat, DimensionMismatch, DuplicateToken


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    entries: Mapping[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class SentenceVector:
    values: np.ndarray
    covered: int
    total: int

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def is_zero(self) -> bool:
        return self.covered == 0


def _parse_header(line: str) -> bool:
    parts = line.split()
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def load_vectors(source: str | IO | Iterable[str]) -> EmbeddingTable:
    """Load a GloVe-style text vector file: ``token v1 v2 ... vd`` per line.

    The dimension is inferred from the first vector line. A leading
    word2vec-style ``count dim`` header (two bare integers) is skipped.
    Tokens are lowercased on load. Blank lines are ignored.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    entries: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip("\n").strip("\r")
        if not line.strip():
            continue
        if dim is None and not entries and _parse_header(line):
            continue
        parts = line.split()
        token = parts[0].lower()
        comps = parts[1:]
        if dim is None:
            if not comps:
                raise DimensionMismatch(
                    f"line {lineno}: no vector components after token {token!r}"
                )
            dim = len(comps)
        if len(comps) != dim:
            raise DimensionMismatch(
                f"line {lineno}: expected {dim} components, got {len(comps)}"
            )
        if token in entries:
            raise DuplicateToken(f"line {lineno}: token {token!r} seen before")
        try:
            vec = np.array([float(c) for c in comps], dtype=np.float64)
        except ValueError as exc:
            raise BadFloat(f"line {lineno}: {exc}") from exc
        vec.flags.writeable = False
        entries[token] = vec
    return EmbeddingTable(dim=dim if dim is not None else 0, entries=entries)


def load_vectors_path(path) -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as fh:
        return load_vectors(fh)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip edge punctuation.

    Punctuation is any Unicode P* category character; only leading and
    trailing marks are stripped, so interior apostrophes and hyphens
    survive ("don't", "stop-gap"). Tokens that strip to nothing are
    dropped.
    """
    out: list[str] = []
    for piece in text.lower().split():
        start = 0
        end = len(piece)
        while start < end and unicodedata.category(piece[start]).startswith("P"):
            start += 1
        while end > start and unicodedata.category(piece[end - 1]).startswith("P"):
            end -= 1
        if end > start:
            out.append(piece[start:end])
    return out


def sentence_vector(sentence: str | list[str], table: EmbeddingTable) -> SentenceVector:
    """Mean-pool the vectors of the sentence's in-vocabulary tokens.

    Accepts raw text (tokenized with :func:`tokenize`) or a pre-split
    token list. Summation runs in token order and divides once at the
    end; a sentence with zero known tokens yields the zero vector.
    """
    tokens = tokenize(sentence) if isinstance(sentence, str) else sentence
    acc = np.zeros(table.dim, dtype=np.float64)
    covered = 0
    for tok in tokens:
        vec = table.entries.get(tok)
        if vec is not None:
            acc = acc + vec
            covered += 1
    if covered > 0:
        acc = acc / covered
    acc.flags.writeable = False
    return SentenceVector(values=acc, covered=covered, total=len(tokens))


def cosine_similarity(a: SentenceVector, b: SentenceVector) -> float:
    """Cosine of two sentence vectors, clamped to [-1, 1].

    Returns 0.0 when either vector has zero norm, so fully-OOV sentences
    score as non-matches instead of aborting a run.
    """
    va, vb = a.values, b.values
    if va.shape[0] != vb.shape[0]:
        raise DimensionMismatch(
            f"sentence vectors have dims {va.shape[0]} and {vb.shape[0]}"
        )
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    value = float(np.dot(va, vb)) / (norm_a * norm_b)
    return max(-1.0, min(1.0, value))

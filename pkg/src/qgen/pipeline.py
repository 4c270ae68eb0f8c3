"""End-to-end orchestration: config, run execution, artifacts, figures.

A run parses the dataset, samples contexts, renders the prompt variants,
collects completions with bounded concurrency, parses and scores the
questions as completions arrive, and persists everything into one output
directory:

- ``manifest.json``  config snapshot, vector digest, backend identity,
  timestamps, status (the only file containing wall-clock values)
- ``scores.jsonl``   one scored question per line
- ``table2.csv``     context_id, prompt, question, question_max, prompt_max
- ``run.json``       summaries, max series, run metadata
- ``report.md``      human-readable summary
- ``fig*.csv``       figure data series

Aside from manifest timestamps, every artifact is a pure function of the
config, so rerunning with the mock backend and the same seed reproduces
the directory byte for byte. On an abort mid-run, completed cells are
persisted next to a manifest with status "failed".
"""

from __future__ import annotations

import hashlib
import io
import json
import os
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from string import Template

from .corpus import SquadDataset, load_squad, sample_contexts
from .errors import ConfigError, PipelineError
from .promptgen import (
    PROMPT_IDS,
    Backend,
    CallRecord,
    GeneratedQuestion,
    GenerationConfig,
    HttpBackend,
    MockBackend,
    OpenAICompletionsBackend,
    default_templates,
    generate,
    parse_questions,
    render_prompt,
)
from .rng import ALGORITHM as RNG_ALGORITHM
from .scoring import (
    EvalRun,
    PromptContextResult,
    PromptSummary,
    RunInfo,
    ScoreRecord,
    assemble_run,
    score_cell,
)
from .similarity import load_vectors_path
from .textstats import (
    bundled_stopwords,
    frequent_words,
    histogram_to_csv,
    keywords_to_csv,
    question_length_histogram,
)

ENV_URL = "QGEN_BACKEND_URL"
ENV_TOKEN = "QGEN_BACKEND_TOKEN"

_BACKEND_KINDS = ("mock", "http", "openai")


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration for one pipeline run."""

    dataset: str
    vectors: str
    out: str
    backend: str = "mock"
    backend_url: str | None = None
    backend_token: str | None = None
    backend_model: str | None = None
    seed: int = 0
    sample_size: int = 50
    temperature: float = 0.5
    questions_per_prompt: int = 5
    threshold: float = 0.7
    prompts: str = "ABCD"
    max_output_tokens: int = 256
    max_in_flight: int = 4
    top_keywords: int = 20

    def validate(self) -> None:
        if self.backend not in _BACKEND_KINDS:
            raise ConfigError(
                f"backend must be one of {_BACKEND_KINDS}, got {self.backend!r}"
            )
        if self.backend != "mock" and not self.backend_url:
            raise ConfigError(f"backend {self.backend!r} requires backend_url")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if self.sample_size < 1:
            raise ConfigError("sample_size must be >= 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must be in [0, 1]")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.questions_per_prompt < 1:
            raise ConfigError("questions_per_prompt must be >= 1")
        if self.max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if self.max_output_tokens < 1:
            raise ConfigError("max_output_tokens must be >= 1")
        if self.top_keywords < 1:
            raise ConfigError("top_keywords must be >= 1")
        if not self.prompts:
            raise ConfigError("prompts must name at least one template")
        seen = set()
        for pid in self.prompts:
            if pid not in PROMPT_IDS:
                raise ConfigError(f"unknown prompt id {pid!r} (valid: A-D)")
            if pid in seen:
                raise ConfigError(f"duplicate prompt id {pid!r}")
            seen.add(pid)
        for label, path in (("dataset", self.dataset), ("vectors", self.vectors)):
            if not Path(path).is_file():
                raise ConfigError(f"{label} file not found: {path}")


_CONFIG_FIELDS = frozenset(RunConfig.__dataclass_fields__)
_REQUIRED_FIELDS = ("dataset", "vectors", "out")
_PATH_FIELDS = ("dataset", "vectors", "out")


def load_config(path: str | Path, env: dict | None = None) -> RunConfig:
    """Read a JSON config file and apply environment overrides.

    The file is a single JSON object whose keys mirror RunConfig fields;
    unknown keys are rejected so typos fail loudly. QGEN_BACKEND_URL and
    QGEN_BACKEND_TOKEN override endpoint and auth only. Relative paths in
    the file resolve against the file's directory.
    """
    env = dict(os.environ) if env is None else env
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(doc) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED_FIELDS if k not in doc]
    if missing:
        raise ConfigError(f"config missing required keys: {', '.join(missing)}")
    for key in _PATH_FIELDS:
        value = doc[key]
        if not isinstance(value, str) or not value:
            raise ConfigError(f"config key {key!r} must be a non-empty string")
        if not Path(value).is_absolute():
            doc[key] = str(p.parent / value)
    try:
        cfg = RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    if env.get(ENV_URL):
        cfg = replace(cfg, backend_url=env[ENV_URL])
    if env.get(ENV_TOKEN):
        cfg = replace(cfg, backend_token=env[ENV_TOKEN])
    return cfg


def make_backend(cfg: RunConfig) -> Backend:
    if cfg.backend == "mock":
        return MockBackend(seed=cfg.seed)
    if cfg.backend == "http":
        return HttpBackend(url=cfg.backend_url, token=cfg.backend_token)
    return OpenAICompletionsBackend(
        url=cfg.backend_url, token=cfg.backend_token, model=cfg.backend_model
    )


def _sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _json_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _public_config(cfg: RunConfig) -> dict:
    """Config snapshot for the manifest; auth material is never persisted."""
    doc = asdict(cfg)
    doc["backend_token"] = bool(cfg.backend_token)
    return doc


def run_pipeline(cfg: RunConfig) -> EvalRun:
    """Execute a full run and persist all artifacts under cfg.out.

    Completions are scored as they arrive; the final assembly re-sorts by
    (context_id, prompt_id), so outputs do not depend on completion
    order. On an abort mid-run, completed cells are written to
    scores.jsonl next to a manifest with status "failed" naming the stage
    and cause, and the error is re-raised wrapped in PipelineError.
    """
    cfg.validate()
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _utcnow()

    stage = "load"
    try:
        dataset = load_squad(cfg.dataset)
        table = load_vectors_path(cfg.vectors)
        vector_digest = _sha256_file(cfg.vectors)
        stage = "sample"
        sampled = sample_contexts(dataset, cfg.sample_size, cfg.seed)
    except Exception as exc:
        _write_failure_manifest(out_dir, cfg, started, stage, exc, cells_done=0)
        raise PipelineError(stage, exc, cells_done=0) from exc

    backend = make_backend(cfg)
    info = RunInfo(
        seed=cfg.seed,
        threshold=cfg.threshold,
        sample_size=cfg.sample_size,
        backend=backend.identity(),
        vector_digest=vector_digest,
        rng_algorithm=RNG_ALGORITHM,
    )
    gen_cfg = GenerationConfig(
        temperature=cfg.temperature,
        questions_per_prompt=cfg.questions_per_prompt,
        max_output_tokens=cfg.max_output_tokens,
        seed=cfg.seed,
    )
    baselines = {r.context_id: r.baselines for r in sampled}
    jobs = [
        (record.context_id, template.id, render_prompt(template, record.text))
        for record in sampled
        for template in default_templates(cfg.prompts)
    ]

    cells: list[PromptContextResult] = []
    shortfalls: list[dict] = []
    call_log: list[CallRecord] = []
    stage = "generate"
    try:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            futures = {
                pool.submit(generate, backend, prompt, gen_cfg, call_log): (cid, pid)
                for cid, pid, prompt in jobs
            }
            pending = set(futures)
            while pending:
                done, pending = wait(pending, return_when=FIRST_EXCEPTION)
                # score completed cells before surfacing any failure so
                # partial persistence salvages everything that finished
                for future in sorted(done, key=lambda f: f.exception() is not None):
                    cid, pid = futures[future]
                    stage = "generate"
                    raw = future.result().text
                    stage = "score"
                    parsed = parse_questions(raw, cfg.questions_per_prompt)
                    if parsed.shortfall:
                        shortfalls.append(
                            {
                                "context_id": cid,
                                "prompt_id": pid,
                                "got": len(parsed.texts),
                                "expected": cfg.questions_per_prompt,
                            }
                        )
                    cells.append(
                        score_cell(cid, pid, list(parsed.texts), baselines[cid], table)
                    )
        stage = "aggregate"
        shortfalls.sort(key=lambda s: (s["context_id"], s["prompt_id"]))
        run = assemble_run(info, cells, cfg.threshold)
        stage = "persist"
        persist_run(run, cfg, out_dir, started, shortfalls, call_log)
        emit_figures(run, out_dir, top_keywords=cfg.top_keywords)
        write_report(run, out_dir, shortfalls)
    except Exception as exc:
        _persist_partial(out_dir, cells)
        _write_failure_manifest(
            out_dir, cfg, started, stage, exc, cells_done=len(cells)
        )
        raise PipelineError(stage, exc, cells_done=len(cells)) from exc
    return run


# -- persistence ---------------------------------------------------------------

def _record_to_json(rec: ScoreRecord) -> dict:
    return {
        "context_id": rec.generated.context_id,
        "prompt_id": rec.generated.prompt_id,
        "index": rec.generated.index,
        "question": rec.generated.text,
        "per_baseline": [[bid, score] for bid, score in rec.per_baseline],
        "question_max": rec.question_max,
        "zero_vector_flag": rec.zero_vector_flag,
    }


def _record_from_json(doc: dict) -> ScoreRecord:
    return ScoreRecord(
        generated=GeneratedQuestion(
            context_id=doc["context_id"],
            prompt_id=doc["prompt_id"],
            index=doc["index"],
            text=doc["question"],
        ),
        per_baseline=tuple((bid, score) for bid, score in doc["per_baseline"]),
        question_max=doc["question_max"],
        zero_vector_flag=doc["zero_vector_flag"],
    )


def scores_to_jsonl(cells: list[PromptContextResult]) -> str:
    out = io.StringIO()
    for cell in cells:
        for rec in cell.records:
            out.write(_json_dumps(_record_to_json(rec)))
            out.write("\n")
    return out.getvalue()


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def _fmt(x: float) -> str:
    return repr(float(x))


def table2_csv(cells: list[PromptContextResult]) -> str:
    """Per-question rows mirroring a prompt-max table layout."""
    out = io.StringIO()
    out.write("context_id,prompt,question,question_max,prompt_max\n")
    for cell in cells:
        for rec in cell.records:
            out.write(
                f"{cell.context_id},{cell.prompt_id},"
                f"{_csv_quote(rec.generated.text)},"
                f"{_fmt(rec.question_max)},{_fmt(cell.prompt_max)}\n"
            )
    return out.getvalue()


def _summary_to_json(s: PromptSummary) -> dict:
    return {
        "prompt_id": s.prompt_id,
        "n_questions": s.n_questions,
        "mean": s.mean,
        "median": s.median,
        "q1": s.q1,
        "q3": s.q3,
        "whisker_lo": s.whisker_lo,
        "whisker_hi": s.whisker_hi,
        "outliers": list(s.outliers),
        "match_count": s.match_count,
    }


def _summary_from_json(doc: dict) -> PromptSummary:
    return PromptSummary(
        prompt_id=doc["prompt_id"],
        n_questions=doc["n_questions"],
        mean=doc["mean"],
        median=doc["median"],
        q1=doc["q1"],
        q3=doc["q3"],
        whisker_lo=doc["whisker_lo"],
        whisker_hi=doc["whisker_hi"],
        outliers=tuple(doc["outliers"]),
        match_count=doc["match_count"],
    )


def run_to_json(run: EvalRun, shortfalls: list[dict]) -> str:
    doc = {
        "info": {
            "seed": run.info.seed,
            "threshold": run.info.threshold,
            "sample_size": run.info.sample_size,
            "backend": run.info.backend,
            "vector_digest": run.info.vector_digest,
            "rng_algorithm": run.info.rng_algorithm,
        },
        "summaries": {pid: _summary_to_json(s) for pid, s in run.summaries.items()},
        "max_series": {
            pid: [[cid, value] for cid, value in series]
            for pid, series in run.max_series.items()
        },
        "prompt_max": {
            pid: max(v for _, v in series)
            for pid, series in run.max_series.items()
        },
        "zero_vector_count": run.zero_vector_count,
        "shortfalls": shortfalls,
    }
    return _json_dumps(doc) + "\n"


def persist_run(
    run: EvalRun,
    cfg: RunConfig,
    out_dir: Path,
    started: str,
    shortfalls: list[dict],
    call_log: list[CallRecord] | None = None,
) -> None:
    (out_dir / "scores.jsonl").write_text(
        scores_to_jsonl(run.results), encoding="utf-8"
    )
    (out_dir / "table2.csv").write_text(table2_csv(run.results), encoding="utf-8")
    (out_dir / "run.json").write_text(run_to_json(run, shortfalls), encoding="utf-8")
    calls = call_log or []
    manifest = {
        "status": "complete",
        "config": _public_config(cfg),
        "seed": cfg.seed,
        "rng_algorithm": run.info.rng_algorithm,
        "vector_digest": run.info.vector_digest,
        "backend": run.info.backend,
        "started_at": started,
        "finished_at": _utcnow(),
        "cells": len(run.results),
        "questions": sum(len(c.records) for c in run.results),
        "zero_vector_count": run.zero_vector_count,
        "shortfall_count": len(shortfalls),
        "backend_calls": len(calls),
        "backend_retries": sum(c.retries for c in calls),
        "backend_latency_s": round(sum(c.latency_s for c in calls), 6),
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def _persist_partial(out_dir: Path, cells: list[PromptContextResult]) -> None:
    ordered = sorted(cells, key=lambda c: (c.context_id, c.prompt_id))
    (out_dir / "scores.jsonl").write_text(scores_to_jsonl(ordered), encoding="utf-8")


def _write_failure_manifest(
    out_dir: Path,
    cfg: RunConfig,
    started: str,
    stage: str,
    exc: Exception,
    cells_done: int,
) -> None:
    manifest = {
        "status": "failed",
        "stage": stage,
        "error": f"{type(exc).__name__}: {exc}",
        "config": _public_config(cfg),
        "seed": cfg.seed,
        "started_at": started,
        "finished_at": _utcnow(),
        "cells": cells_done,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_shortfalls(out_dir: str | Path) -> list[dict]:
    doc = json.loads((Path(out_dir) / "run.json").read_text(encoding="utf-8"))
    return doc.get("shortfalls", [])


def load_run(out_dir: str | Path) -> EvalRun:
    """Rebuild an EvalRun from a persisted run directory."""
    out = Path(out_dir)
    doc = json.loads((out / "run.json").read_text(encoding="utf-8"))
    records = [
        _record_from_json(json.loads(line))
        for line in (out / "scores.jsonl").read_text(encoding="utf-8").splitlines()
        if line
    ]
    by_cell: dict[tuple[int, str], list[ScoreRecord]] = {}
    for rec in records:
        key = (rec.generated.context_id, rec.generated.prompt_id)
        by_cell.setdefault(key, []).append(rec)
    cells = []
    for (cid, pid) in sorted(by_cell):
        recs = sorted(by_cell[(cid, pid)], key=lambda r: r.generated.index)
        cells.append(
            PromptContextResult(
                context_id=cid,
                prompt_id=pid,
                records=tuple(recs),
                prompt_max=max(r.question_max for r in recs),
            )
        )
    info = RunInfo(
        seed=doc["info"]["seed"],
        threshold=doc["info"]["threshold"],
        sample_size=doc["info"]["sample_size"],
        backend=doc["info"]["backend"],
        vector_digest=doc["info"]["vector_digest"],
        rng_algorithm=doc["info"].get("rng_algorithm", ""),
    )
    return EvalRun(
        info=info,
        results=cells,
        summaries={pid: _summary_from_json(s) for pid, s in doc["summaries"].items()},
        max_series={
            pid: [(cid, value) for cid, value in series]
            for pid, series in doc["max_series"].items()
        },
        zero_vector_count=doc["zero_vector_count"],
    )


# -- figures -------------------------------------------------------------------

def fig6_csv(run: EvalRun) -> str:
    out = io.StringIO()
    out.write("prompt,mean,median,q1,q3,whisker_lo,whisker_hi,outliers\n")
    for pid in sorted(run.summaries):
        s = run.summaries[pid]
        outliers = ";".join(_fmt(v) for v in s.outliers)
        out.write(
            f"{pid},{_fmt(s.mean)},{_fmt(s.median)},{_fmt(s.q1)},{_fmt(s.q3)},"
            f"{_fmt(s.whisker_lo)},{_fmt(s.whisker_hi)},{_csv_quote(outliers)}\n"
        )
    return out.getvalue()


def fig7_csv(run: EvalRun) -> str:
    out = io.StringIO()
    out.write("prompt,match_count\n")
    for pid in sorted(run.summaries):
        out.write(f"{pid},{run.summaries[pid].match_count}\n")
    return out.getvalue()


def fig8_csv(run: EvalRun) -> str:
    prompt_ids = sorted(run.max_series)
    out = io.StringIO()
    out.write("context_id," + ",".join(prompt_ids) + "\n")
    series = {pid: dict(run.max_series[pid]) for pid in prompt_ids}
    context_ids = sorted({cid for s in run.max_series.values() for cid, _ in s})
    for cid in context_ids:
        row = ",".join(_fmt(series[pid][cid]) for pid in prompt_ids)
        out.write(f"{cid},{row}\n")
    return out.getvalue()


def emit_figures(run: EvalRun, out: str | Path, top_keywords: int = 20) -> list[Path]:
    """Write the five figure-data CSVs for a completed run.

    Figure 1/2 series here are over the run's generated questions; the
    dataset-level variants come from emit_dataset_figures instead.
    """
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    questions = [rec.generated.text for rec in run.records()]
    hist = question_length_histogram(questions)
    keywords = frequent_words(questions, bundled_stopwords(), top_k=top_keywords)
    files = {
        "fig1_lengths.csv": histogram_to_csv(hist),
        "fig2_keywords.csv": keywords_to_csv(keywords),
        "fig6_boxplot.csv": fig6_csv(run),
        "fig7_matches.csv": fig7_csv(run),
        "fig8_max_series.csv": fig8_csv(run),
    }
    written = []
    for name, text in files.items():
        target = out_dir / name
        target.write_text(text, encoding="utf-8")
        written.append(target)
    return written


def emit_dataset_figures(
    dataset: SquadDataset, out: str | Path, top_keywords: int = 20
) -> list[Path]:
    """Write fig1/fig2 series over the dataset's baseline questions."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    questions = dataset.questions()
    hist = question_length_histogram(questions)
    keywords = frequent_words(questions, bundled_stopwords(), top_k=top_keywords)
    files = {
        "fig1_lengths.csv": histogram_to_csv(hist),
        "fig2_keywords.csv": keywords_to_csv(keywords),
    }
    written = []
    for name, text in files.items():
        target = out_dir / name
        target.write_text(text, encoding="utf-8")
        written.append(target)
    return written


# -- report --------------------------------------------------------------------

def _report_template() -> Template:
    text = (
        resources.files("qgen")
        .joinpath("data/report_template.md")
        .read_text(encoding="utf-8")
    )
    return Template(text)


def write_report(run: EvalRun, out: str | Path, shortfalls: list[dict]) -> Path:
    out_dir = Path(out)
    rows = []
    for pid in sorted(run.summaries):
        s = run.summaries[pid]
        rows.append(
            f"| {pid} | {s.n_questions} | {s.mean:.4f} | {s.median:.4f} "
            f"| {s.match_count} |"
        )
    shortfall_note = ""
    if shortfalls:
        shortfall_note = (
            f"\n{len(shortfalls)} prompt cell(s) yielded fewer than the "
            "configured questions per prompt; per-prompt totals above "
            "reflect the questions actually parsed.\n"
        )
    body = _report_template().substitute(
        backend=_json_dumps(run.info.backend),
        seed=str(run.info.seed),
        sample_size=str(run.info.sample_size),
        threshold=_fmt(run.info.threshold),
        vector_digest=run.info.vector_digest,
        summary_rows="\n".join(rows),
        zero_vector_count=str(run.zero_vector_count),
        shortfall_note=shortfall_note,
    )
    target = out_dir / "report.md"
    target.write_text(body, encoding="utf-8")
    return target

"""Prompt-based question generation over SQuAD, with similarity scoring.

The package splits into corpus handling (parse, reverse, sample, chunk),
text statistics (length histogram, keyword frequencies), sentence
similarity over word-vector files, prompt templates and generation
backends, score aggregation, and a pipeline/CLI layer that ties a full
run together and persists its artifacts.
"""

from .corpus import (
    Answer,
    BaselineQuestion,
    Chunk,
    ContextRecord,
    ReversedExample,
    SquadDataset,
    chunk_context,
    load_squad,
    parse_squad,
    reverse_dataset,
    sample_contexts,
    to_squad_json,
)
from .errors import (
    BackendError,
    BackendRejected,
    BackendTimeout,
    BackendUnavailable,
    BadFloat,
    ConfigError,
    DimensionMismatch,
    DuplicateToken,
    EmptyInput,
    EmptyRecords,
    InvalidChunkParams,
    MalformedJson,
    MissingCell,
    NoQuestionsFound,
    PipelineError,
    QgenError,
    SampleTooLarge,
    SchemaError,
    SpanError,
)
from .pipeline import (
    RunConfig,
    emit_dataset_figures,
    emit_figures,
    load_config,
    load_run,
    run_pipeline,
)
from .promptgen import (
    PROMPT_IDS,
    GeneratedQuestion,
    GenerationConfig,
    HttpBackend,
    MockBackend,
    OpenAICompletionsBackend,
    ParsedQuestions,
    PromptTemplate,
    default_templates,
    generate,
    parse_questions,
    render_prompt,
)
from .scoring import (
    BoxStats,
    EvalRun,
    PromptContextResult,
    PromptSummary,
    RunInfo,
    ScoreRecord,
    assemble_run,
    build_max_series,
    count_matches,
    prompt_max,
    score_cell,
    score_question,
    summarize,
    summarize_prompt,
)
from .similarity import (
    EmbeddingTable,
    SentenceVector,
    cosine_similarity,
    load_vectors,
    load_vectors_path,
    sentence_vector,
    tokenize,
)
from .textstats import (
    Histogram,
    KeywordFrequency,
    bundled_stopwords,
    frequent_words,
    histogram_to_csv,
    keywords_to_csv,
    load_stopwords,
    question_length_histogram,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "BackendError",
    "BackendRejected",
    "BackendTimeout",
    "BackendUnavailable",
    "BadFloat",
    "BaselineQuestion",
    "BoxStats",
    "Chunk",
    "ConfigError",
    "ContextRecord",
    "DimensionMismatch",
    "DuplicateToken",
    "EmbeddingTable",
    "EmptyInput",
    "EmptyRecords",
    "EvalRun",
    "GeneratedQuestion",
    "GenerationConfig",
    "Histogram",
    "HttpBackend",
    "InvalidChunkParams",
    "KeywordFrequency",
    "MalformedJson",
    "MissingCell",
    "MockBackend",
    "NoQuestionsFound",
    "OpenAICompletionsBackend",
    "PROMPT_IDS",
    "ParsedQuestions",
    "PipelineError",
    "PromptContextResult",
    "PromptSummary",
    "PromptTemplate",
    "QgenError",
    "ReversedExample",
    "RunConfig",
    "RunInfo",
    "SampleTooLarge",
    "SchemaError",
    "ScoreRecord",
    "SentenceVector",
    "SpanError",
    "SquadDataset",
    "assemble_run",
    "build_max_series",
    "bundled_stopwords",
    "chunk_context",
    "cosine_similarity",
    "count_matches",
    "default_templates",
    "emit_dataset_figures",
    "emit_figures",
    "frequent_words",
    "generate",
    "histogram_to_csv",
    "keywords_to_csv",
    "load_config",
    "load_run",
    "load_squad",
    "load_stopwords",
    "load_vectors",
    "load_vectors_path",
    "parse_questions",
    "parse_squad",
    "prompt_max",
    "question_length_histogram",
    "render_prompt",
    "reverse_dataset",
    "run_pipeline",
    "sample_contexts",
    "score_cell",
    "score_question",
    "sentence_vector",
    "summarize",
    "summarize_prompt",
    "to_squad_json",
    "tokenize",
]

"""Tour of the corpus layer: parsing, reversing, sampling, chunking.

Loads the bundled miniature SQuAD-format file, shows how paragraphs
become validated context records, flips a record into a
question-generation example, draws a reproducible sample, and splits a
long context into overlapping token windows.
"""

from pathlib import Path

from qgen import chunk_context, load_squad, reverse_dataset, sample_contexts

DATA = Path(__file__).parent / "data" / "mini_squad.json"

dataset = load_squad(DATA)
print(f"{len(dataset.records)} contexts, {dataset.example_count} questions")
print()

# Each paragraph is one record; answer spans were validated during parsing.
record = dataset.records[0]
print(f"context_id={record.context_id} title={record.title!r}")
print(record.text)
for baseline in record.baselines:
    answer = baseline.answers[0]
    print(f"  [{baseline.id}] {baseline.question}")
    print(f"      answer={answer.text!r} at offset {answer.answer_start}")
print()

# Reversing turns (context, question -> answer) into (context, answer -> question),
# the direction a question generator trains or is prompted in.
reversed_examples = reverse_dataset(dataset)
ex = reversed_examples[0]
print("reversed example:")
print(f"  input answer:    {ex.input_answer!r}")
print(f"  target question: {ex.target_question!r}")
print()

# Sampling is seeded and reproducible: the same seed always returns the
# same contexts, in context_id order.
for seed in (7, 7, 8):
    sample = sample_contexts(dataset, 3, seed=seed)
    print(f"seed {seed}: sampled context_ids {[r.context_id for r in sample]}")
print()

# Long contexts are split into max_len-token windows that overlap by
# doc_stride tokens, so answers near a cut survive in some window.
text = dataset.records[0].text
chunks = chunk_context(text, max_len=12, doc_stride=4)
print(f"chunking {len(text.split())} tokens into max_len=12, doc_stride=4:")
for i, chunk in enumerate(chunks):
    print(f"  window {i}: chars [{chunk.start},{chunk.end}) {chunk.text[:48]!r}...")

"""Sentence similarity from word vectors, step by step.

Loads a small deterministic vector file, builds mean-pooled sentence
vectors, and walks through the properties the scoring layer relies on:
self-similarity, symmetry, tokenization behavior, out-of-vocabulary
handling, and the zero-vector policy.
"""

from pathlib import Path

from qgen import cosine_similarity, load_vectors_path, sentence_vector, tokenize

VECTORS = Path(__file__).parent / "data" / "vectors_50d.txt"

table = load_vectors_path(VECTORS)
print(f"loaded {len(table)} vectors of dimension {table.dim}")
print()

# Tokenization lowercases, splits on whitespace, and strips edge
# punctuation while keeping interior apostrophes and hyphens.
print(tokenize("Who designed the largest weir on the River Kess?"))
print(tokenize("It kept time -- within two seconds per day!"))
print()

pairs = [
    ("Who opened the first clock workshop?",
     "Who opened the first clock workshop?"),
    ("Who opened the first clock workshop?",
     "The first clock workshop was opened by whom?"),
    ("Who opened the first clock workshop?",
     "How long is the River Kess?"),
]
for left, right in pairs:
    a = sentence_vector(left, table)
    b = sentence_vector(right, table)
    forward = cosine_similarity(a, b)
    backward = cosine_similarity(b, a)
    assert forward == backward  # symmetric, exactly
    print(f"{forward:6.3f}  {left!r} vs {right!r}")
print()

# Out-of-vocabulary tokens are skipped but counted; a fully unknown
# sentence gets the zero vector and compares as 0.0 to everything.
mixed = sentence_vector("Who visited Zanzibar wearing chartreuse snowshoes?", table)
print(f"mixed sentence: covered {mixed.covered} of {mixed.total} tokens")
unknown = sentence_vector("zxqv qqvz vqzx", table)
known = sentence_vector("Who opened the first clock workshop?", table)
print(f"fully unknown sentence: is_zero={unknown.is_zero}, "
      f"cosine vs known = {cosine_similarity(unknown, known)}")

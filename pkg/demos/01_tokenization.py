"""Tokenizing sequences into kmer documents.

A sequence has no natural word boundaries, so we impose them: either
slide a window one letter at a time (overlapping), or tile the sequence
with disjoint kmers from k different starting offsets (non-overlapping).
"""

import numpy as np

from seqvec import (
    SequenceRecord,
    TokenizerConfig,
    build_corpus,
    build_huffman,
    kmers_nonoverlapping,
    kmers_overlapping,
    subsample_filter,
)

# --- the two schemes on a DNA fragment and a toy protein ----------------

print("overlapping  ACGTTA, k=3 :", kmers_overlapping("ACGTTA", 3))

print("\nnon-overlapping QWERTYQWERTY, k=3 gives one document per phase:")
for phase, kmers in enumerate(kmers_nonoverlapping("QWERTYQWERTY", 3)):
    print(f"  phase {phase}:", " ".join(kmers))

print("\noverlapping QWERTYQWERTY, k=3 :",
      " ".join(kmers_overlapping("QWERTYQWERTY", 3)))

# --- a corpus ties documents to a vocabulary -----------------------------

records = [
    SequenceRecord("seq1", "", "QWERTYQWERTY"),
    SequenceRecord("seq2", "", "QWERTYQWERTYQW"),
]
docs, vocab = build_corpus(records, TokenizerConfig(k=3, mode="nonoverlap"))

print(f"\ncorpus: {len(docs)} documents over {len(records)} sequences "
      f"(each sequence's 3 phase documents share one tag)")
print("vocabulary:", {t: int(c) for t, c in zip(vocab.tokens, vocab.counts)})

# tokens below a count threshold can be dropped at build time
docs2, vocab2 = build_corpus(records, TokenizerConfig(3), min_count=2)
print("with min_count=2:", vocab2.tokens)

# --- frequency machinery used by training --------------------------------

# the negative-sampling table is a cumulative distribution over counts^0.75
print("\nsampling table:", np.round(vocab.sampling_table, 3))

# high-frequency tokens can be randomly thinned; survivors keep their order
rng = np.random.default_rng(0)
tokens = docs[0].tokens
print("subsample t=1e-2 keeps:",
      subsample_filter(tokens, vocab, 1e-2, rng).tolist(), "of", tokens.tolist())

# Huffman codes over token counts drive the hierarchical-softmax objective
huffman = build_huffman(vocab)
print("\nHuffman codes (frequent tokens get short codes):")
for tok, code in zip(vocab.tokens, huffman.codes):
    print(f"  {tok}: {''.join(map(str, code.tolist()))}")

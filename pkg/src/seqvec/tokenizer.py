"""Kmer tokenization and vocabulary construction.

A sequence becomes one or more token documents:

* overlapping mode emits every kmer at stride 1, one document per
  sequence ("ACGTTA", k=3 -> ACG CGT GTT TTA);
* non-overlapping mode emits k phase-shifted readings, each tiling the
  sequence with disjoint kmers ("QWERTYQWERTY", k=3 -> "QWE RTY QWE RTY",
  "WER TYQ WER", "ERT YQW ERT"). All k phase documents of one sequence
  share a document tag, so training learns a single vector per sequence.

The vocabulary assigns dense integer ids in first-occurrence order,
drops tokens rarer than ``min_count`` (removing their occurrences from
the documents), and carries the cumulative count^0.75 table used to draw
negative samples plus, on demand, a Huffman coding of the tokens.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .sequences import SequenceRecord

__all__ = [
    "TokenizerConfig",
    "TokenizedDoc",
    "Vocabulary",
    "HuffmanCoding",
    "Corpus",
    "kmers_overlapping",
    "kmers_nonoverlapping",
    "build_corpus",
    "build_vocabulary",
    "subsample_filter",
    "build_huffman",
    "write_corpus",
    "read_corpus",
]

MODES = ("nonoverlap", "overlap")

#: Exponent flattening the unigram distribution for negative sampling.
NEGATIVE_EXPONENT = 0.75


@dataclass(frozen=True)
class TokenizerConfig:
    k: int
    mode: str = "nonoverlap"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"kmer length must be >= 1, got {self.k}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")

    def min_length(self) -> int:
        """Shortest sequence this configuration can tokenize."""
        return self.k if self.mode == "overlap" else 2 * self.k - 1


@dataclass(frozen=True)
class TokenizedDoc:
    """One token document: a tag identifying the source sequence, the
    phase offset it was read at (0 in overlapping mode), and its token ids."""

    doc_tag: int
    phase: int
    tokens: np.ndarray  # int32, non-empty

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class HuffmanCoding:
    """Per-token Huffman code bits and the inner-node path that spells them.

    ``paths[t][i]`` is the inner-node index whose sigmoid decision consumes
    ``codes[t][i]``; paths run root to leaf parent. Inner nodes are numbered
    in creation (merge) order, so the root is node ``n_inner - 1``.
    """

    codes: list[np.ndarray]  # uint8 bit arrays
    paths: list[np.ndarray]  # int32 inner-node indices
    n_inner: int


@dataclass
class Vocabulary:
    tokens: list[str]
    counts: np.ndarray  # int64, aligned with tokens
    min_count: int
    total: int = field(init=False)
    index: dict[str, int] = field(init=False, repr=False)
    sampling_table: np.ndarray = field(init=False, repr=False)
    huffman: HuffmanCoding | None = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.tokens) != len(self.counts):
            raise ConfigError("tokens and counts length mismatch")
        if len(self.tokens) and int(self.counts.min()) < max(self.min_count, 1):
            raise ConfigError("vocabulary contains tokens below min_count")
        self.total = int(self.counts.sum())
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ConfigError("duplicate token strings in vocabulary")
        weights = self.counts.astype(np.float64) ** NEGATIVE_EXPONENT
        cum = np.cumsum(weights)
        self.sampling_table = cum / cum[-1] if len(cum) else cum

    def __len__(self) -> int:
        return len(self.tokens)

    def token_frequencies(self) -> np.ndarray:
        """Per-token corpus frequency count/total."""
        return self.counts / self.total


def kmers_overlapping(residues: str, k: int) -> list[str]:
    """All kmers of ``residues`` at stride 1, in source order.

    Yields ``len(residues) - k + 1`` kmers; consecutive outputs overlap in
    k-1 letters. Raises DataError when the sequence is shorter than k.
    """
    if k < 1:
        raise ConfigError(f"kmer length must be >= 1, got {k}")
    if len(residues) < k:
        raise DataError(
            f"sequence of length {len(residues)} is shorter than k={k}"
        )
    return [residues[i : i + k] for i in range(len(residues) - k + 1)]


def kmers_nonoverlapping(residues: str, k: int) -> list[list[str]]:
    """The k phase readings of ``residues``, each tiled by disjoint kmers.

    Phase p starts at offset p and drops any trailing partial kmer, so it
    holds floor((L - p) / k) kmers. Requires L >= 2k - 1 so that every
    phase yields at least one kmer.
    """
    if k < 1:
        raise ConfigError(f"kmer length must be >= 1, got {k}")
    if len(residues) < 2 * k - 1:
        raise DataError(
            f"sequence of length {len(residues)} too short for {k} phases "
            f"(need >= {2 * k - 1})"
        )
    phases = []
    for p in range(k):
        n = (len(residues) - p) // k
        phases.append([residues[p + i * k : p + i * k + k] for i in range(n)])
    return phases


@dataclass
class Corpus:
    """Result of build_corpus; unpacks as ``docs, vocab = build_corpus(...)``
    while also carrying the kept sequence ids (aligned with doc tags) and
    the ids skipped for being too short."""

    docs: list[TokenizedDoc]
    vocab: Vocabulary
    doc_ids: list[str]
    skipped: list[str]

    def __iter__(self):
        return iter((self.docs, self.vocab))


def build_vocabulary(counts: Counter[str] | dict[str, int], min_count: int = 1,
                     order: Sequence[str] | None = None) -> Vocabulary:
    """Vocabulary over ``counts`` with tokens below ``min_count`` removed.

    ``order`` fixes the id order (defaults to the dict's iteration order,
    i.e. first-occurrence order when counts come from a corpus scan).
    """
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")
    if order is None:
        order = list(counts)
    kept = [t for t in order if counts[t] >= min_count]
    return Vocabulary(kept, np.array([counts[t] for t in kept], dtype=np.int64),
                      min_count=min_count)


def build_corpus(
    records: Sequence[SequenceRecord],
    cfg: TokenizerConfig,
    min_count: int = 1,
) -> Corpus:
    """Tokenize ``records`` into documents and build their vocabulary.

    Sequences shorter than the mode's minimum are skipped and reported in
    ``Corpus.skipped``. After rare-token removal, documents that end up
    empty are dropped; doc tags are re-assigned densely over the sequences
    that still own at least one document, preserving input order. Raises
    DataError if nothing survives.
    """
    raw_docs: list[tuple[int, int, list[str]]] = []  # (seq_index, phase, kmers)
    skipped: list[str] = []
    counts: Counter[str] = Counter()
    kept_records: list[SequenceRecord] = []

    for rec in records:
        if len(rec.residues) < cfg.min_length():
            skipped.append(rec.id)
            continue
        seq_index = len(kept_records)
        kept_records.append(rec)
        if cfg.mode == "overlap":
            phases = [kmers_overlapping(rec.residues, cfg.k)]
        else:
            phases = kmers_nonoverlapping(rec.residues, cfg.k)
        for phase, kmers in enumerate(phases):
            raw_docs.append((seq_index, phase, kmers))
            counts.update(kmers)

    if not raw_docs:
        raise DataError("empty corpus: no sequence satisfied the length requirement")

    vocab = build_vocabulary(counts, min_count)
    lookup = vocab.index

    docs: list[TokenizedDoc] = []
    populated: set[int] = set()
    pending: list[tuple[int, int, np.ndarray]] = []
    for seq_index, phase, kmers in raw_docs:
        ids = np.array([lookup[km] for km in kmers if km in lookup], dtype=np.int32)
        if len(ids) == 0:
            continue
        populated.add(seq_index)
        pending.append((seq_index, phase, ids))

    if not pending:
        raise DataError("empty corpus: min_count filtering removed every token")

    # Dense tags over sequences that kept at least one document.
    tag_of = {s: t for t, s in enumerate(sorted(populated))}
    for seq_index, phase, ids in pending:
        docs.append(TokenizedDoc(tag_of[seq_index], phase, ids))
    doc_ids = [kept_records[s].id for s in sorted(populated)]
    return Corpus(docs, vocab, doc_ids, skipped)


def subsample_keep_probs(vocab: Vocabulary, t: float) -> np.ndarray:
    """Per-token keep probability min(1, sqrt(t/f) + t/f) for frequency f."""
    if t <= 0:
        raise ConfigError(f"subsampling threshold must be positive, got {t}")
    f = vocab.token_frequencies()
    return np.minimum(1.0, np.sqrt(t / f) + t / f)


def subsample_filter(
    tokens: Sequence[int] | np.ndarray,
    vocab: Vocabulary,
    t: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Randomly drop high-frequency tokens, preserving survivor order.

    A token with corpus frequency f survives with probability
    min(1, sqrt(t/f) + t/f); one uniform draw is consumed per input token,
    so a fixed generator state reproduces the output exactly.
    """
    keep = subsample_keep_probs(vocab, t)
    tokens = np.asarray(tokens, dtype=np.int32)
    if len(tokens) == 0:
        return tokens
    return tokens[rng.random(len(tokens)) < keep[tokens]]


def build_huffman(vocab: Vocabulary) -> HuffmanCoding:
    """Binary Huffman coding of the vocabulary by token count.

    Ties are broken toward the lower token id (inner nodes compare after
    all leaves of equal count), making the tree deterministic. The lighter
    child of each merge receives bit 0.
    """
    V = len(vocab)
    if V < 2:
        raise DataError(f"Huffman coding needs at least 2 tokens, got {V}")

    # Heap entries: (count, tiebreak, node). Leaves are 0..V-1, inner nodes
    # are numbered V + creation order; children[i] indexes merged nodes.
    heap = [(int(c), i, i) for i, c in enumerate(vocab.counts)]
    heapq.heapify(heap)
    children: list[tuple[int, int]] = []
    while len(heap) > 1:
        c0, _, n0 = heapq.heappop(heap)  # lighter -> bit 0
        c1, _, n1 = heapq.heappop(heap)
        inner = V + len(children)
        children.append((n0, n1))
        heapq.heappush(heap, (c0 + c1, inner, inner))

    codes: list[np.ndarray | None] = [None] * V
    paths: list[np.ndarray | None] = [None] * V
    root = V + len(children) - 1
    stack: list[tuple[int, list[int], list[int]]] = [(root, [], [])]
    while stack:
        node, bits, path = stack.pop()
        if node < V:
            codes[node] = np.array(bits, dtype=np.uint8)
            paths[node] = np.array(path, dtype=np.int32)
            continue
        left, right = children[node - V]
        stack.append((left, bits + [0], path + [node - V]))
        stack.append((right, bits + [1], path + [node - V]))
    return HuffmanCoding(codes, paths, n_inner=len(children))


def ensure_huffman(vocab: Vocabulary) -> HuffmanCoding:
    """Build (once) and cache the Huffman coding on the vocabulary."""
    if vocab.huffman is None:
        vocab.huffman = build_huffman(vocab)
    return vocab.huffman


# --- corpus text format -------------------------------------------------
#
# One document per line: "doc_tag<SP>phase<SP>kmer kmer ...". Lines
# starting with '#' are metadata: "#meta k=3 mode=nonoverlap" and one
# "#doc <tag> <sequence id>" per kept sequence. Files without metadata
# still load; k is then inferred from the kmer length and the mode from
# the phase fields.


def write_corpus(
    corpus: Corpus, stream: IO, cfg: TokenizerConfig | None = None
) -> None:
    if cfg is not None:
        stream.write(f"#meta k={cfg.k} mode={cfg.mode}\n")
    for tag, rid in enumerate(corpus.doc_ids):
        stream.write(f"#doc {tag} {rid}\n")
    tokens = corpus.vocab.tokens
    for doc in corpus.docs:
        kmers = " ".join(tokens[t] for t in doc.tokens)
        stream.write(f"{doc.doc_tag} {doc.phase} {kmers}\n")


def read_corpus(data: bytes | str | IO) -> tuple[Corpus, TokenizerConfig]:
    """Load a tokenized corpus written by write_corpus (or by hand)."""
    from .sequences import _as_text_lines  # shared line normalization

    k = None
    mode = None
    id_of: dict[int, str] = {}
    raw: list[tuple[int, int, list[str]]] = []
    counts: Counter[str] = Counter()
    max_phase = 0
    for lineno, line in enumerate(_as_text_lines(data), start=1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#meta"):
            for fieldspec in line.split()[1:]:
                key, _, value = fieldspec.partition("=")
                if key == "k":
                    k = int(value)
                elif key == "mode":
                    mode = value
            continue
        if line.startswith("#doc"):
            parts = line.split(None, 2)
            if len(parts) == 3:
                try:
                    id_of[int(parts[1])] = parts[2]
                except ValueError as exc:
                    raise DataError(f"line {lineno}: bad doc tag in {line!r}") from exc
            continue
        if line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) < 3:
            raise DataError(
                f"line {lineno}: expected 'doc_tag phase kmer ...', got {line!r}"
            )
        try:
            tag, phase = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise DataError(f"line {lineno}: bad doc_tag/phase in {line!r}") from exc
        kmers = parts[2:]
        raw.append((tag, phase, kmers))
        counts.update(kmers)
        max_phase = max(max_phase, phase)
    if not raw:
        raise DataError("empty corpus file")

    vocab = build_vocabulary(counts, min_count=1)
    lookup = vocab.index
    docs = [
        TokenizedDoc(tag, phase, np.array([lookup[km] for km in kmers], dtype=np.int32))
        for tag, phase, kmers in raw
    ]
    n_docs = max(d.doc_tag for d in docs) + 1
    doc_ids = [id_of.get(tag, f"doc{tag}") for tag in range(n_docs)]
    if k is None:
        k = len(vocab.tokens[0])
    if mode is None:
        mode = "nonoverlap" if max_phase > 0 else "overlap"
    return Corpus(docs, vocab, doc_ids, []), TokenizerConfig(k=k, mode=mode)

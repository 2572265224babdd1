"""Binary model files and the text vector-export format.

Model file layout (all integers little-endian):

    magic  "SQV1" (4 bytes)
    u32    format version (currently 1)
    config block:
        u32 architecture (0=dm 1=dbow 2=cbow 3=sg)
        u32 dim, u32 window
        u32 objective (0=ns 1=hs), u32 negative
        f64 subsample_t, u32 epochs, f64 alpha0, f64 alpha_min, u64 seed
        u32 k, u32 token mode (0=nonoverlap 1=overlap), u32 min_count
    vocabulary block: u64 V, then per token u16 byte length + UTF-8 string
        + u64 count
    doc-tag block: u64 N, then per doc u16 byte length + UTF-8 sequence id
    matrices D (N x dim), W (V x dim), O (V or V-1 x dim) as raw float32,
        row-major

The sampling table and Huffman coding are derived data and are rebuilt
on load. Every read checks remaining bytes first, so a truncated file is
rejected with the offending byte offset instead of producing a partial
model. The text vector format is a "N d" header line followed by one
"id v1 ... vd" line per vector.

Tokenizer settings ride inside the model on purpose: inference must
split query sequences exactly as the training corpus was split.
"""

from __future__ import annotations

import struct
from typing import IO, Sequence

import numpy as np

from .embedding import EmbeddingModel, TrainConfig, ARCHITECTURES, OBJECTIVES
from .errors import DataError
from .tokenizer import MODES, TokenizerConfig, Vocabulary

__all__ = [
    "ModelFormatError",
    "save_model",
    "load_model",
    "write_vectors",
    "read_vectors",
]

MAGIC = b"SQV1"
VERSION = 1
_CONFIG = struct.Struct("<IIIIIdIddQIII")


class ModelFormatError(DataError):
    """Model file rejected; message names the offending byte offset."""


def save_model(model: EmbeddingModel, stream: IO[bytes]) -> None:
    cfg = model.config
    tok = model.tokenizer
    if tok is None:
        # infer from the vocabulary so the file is always self-contained
        k = len(model.vocab.tokens[0]) if model.vocab.tokens else 1
        tok = TokenizerConfig(k=k, mode="overlap")
    doc_ids = model.doc_ids or [f"doc{i}" for i in range(model.n_docs)]
    if len(doc_ids) != model.n_docs:
        raise DataError("doc_ids length does not match the document matrix")

    stream.write(MAGIC)
    stream.write(struct.pack("<I", VERSION))
    stream.write(
        _CONFIG.pack(
            ARCHITECTURES.index(cfg.architecture),
            cfg.dim,
            cfg.window,
            OBJECTIVES.index(cfg.objective),
            cfg.negative,
            cfg.subsample_t,
            cfg.epochs,
            cfg.alpha0,
            cfg.alpha_min,
            cfg.seed,
            tok.k,
            MODES.index(tok.mode),
            model.vocab.min_count,
        )
    )
    stream.write(struct.pack("<Q", len(model.vocab)))
    for token, count in zip(model.vocab.tokens, model.vocab.counts):
        raw = token.encode("utf-8")
        stream.write(struct.pack("<H", len(raw)))
        stream.write(raw)
        stream.write(struct.pack("<Q", int(count)))
    stream.write(struct.pack("<Q", len(doc_ids)))
    for rid in doc_ids:
        raw = rid.encode("utf-8")
        stream.write(struct.pack("<H", len(raw)))
        stream.write(raw)
    for matrix in (model.D, model.W, model.O):
        stream.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.off = 0

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.blob):
            raise ModelFormatError(
                f"truncated model file: needed {n} bytes for {what} at byte "
                f"{self.off}, only {len(self.blob) - self.off} left"
            )
        out = self.blob[self.off : self.off + n]
        self.off += n
        return out

    def unpack(self, fmt: struct.Struct, what: str):
        return fmt.unpack(self.take(fmt.size, what))


_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


def load_model(data: bytes | IO[bytes]) -> EmbeddingModel:
    if not isinstance(data, bytes):
        data = data.read()
    r = _Reader(data)
    if r.take(4, "magic") != MAGIC:
        raise ModelFormatError("bad magic at byte 0: not a model file")
    (version,) = r.unpack(_U32, "version")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version} at byte 4")

    (arch, dim, window, objective, negative, subsample_t, epochs, alpha0,
     alpha_min, seed, k, mode, min_count) = r.unpack(_CONFIG, "config block")
    try:
        cfg = TrainConfig(
            architecture=ARCHITECTURES[arch],
            dim=dim,
            window=window,
            objective=OBJECTIVES[objective],
            negative=negative,
            subsample_t=subsample_t,
            epochs=epochs,
            alpha0=alpha0,
            alpha_min=alpha_min,
            seed=seed,
        )
        tok = TokenizerConfig(k=k, mode=MODES[mode])
    except (IndexError, ValueError) as exc:
        raise ModelFormatError(f"invalid config block: {exc}") from exc

    (V,) = r.unpack(_U64, "vocabulary size")
    tokens: list[str] = []
    counts = np.empty(V, dtype=np.int64)
    for i in range(V):
        (ln,) = r.unpack(_U16, f"token {i} length")
        tokens.append(r.take(ln, f"token {i}").decode("utf-8"))
        (counts[i],) = r.unpack(_U64, f"token {i} count")
    try:
        vocab = Vocabulary(tokens, counts, min_count=min_count)
    except ValueError as exc:
        raise ModelFormatError(f"invalid vocabulary block: {exc}") from exc

    (N,) = r.unpack(_U64, "document count")
    doc_ids = []
    for i in range(N):
        (ln,) = r.unpack(_U16, f"doc id {i} length")
        doc_ids.append(r.take(ln, f"doc id {i}").decode("utf-8"))

    def matrix(rows: int, what: str) -> np.ndarray:
        raw = r.take(rows * dim * 4, what)
        return np.frombuffer(raw, dtype="<f4").reshape(rows, dim).copy()

    D = matrix(N, "document matrix")
    W = matrix(V, "word matrix")
    O = matrix(V if cfg.objective == "ns" else V - 1, "output matrix")
    if r.off != len(r.blob):
        raise ModelFormatError(
            f"{len(r.blob) - r.off} unexpected trailing bytes at byte {r.off}"
        )
    return EmbeddingModel(D, W, O, vocab, cfg, doc_ids, tok)


def write_vectors(ids: Sequence[str], matrix: np.ndarray, stream: IO[str]) -> None:
    """Text export: header "N d", then one "id v1 ... vd" line per vector."""
    matrix = np.asarray(matrix)
    if len(ids) != matrix.shape[0]:
        raise DataError("one id per vector row required")
    stream.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
    for rid, row in zip(ids, matrix):
        stream.write(rid + " " + " ".join(repr(float(v)) for v in row) + "\n")


def read_vectors(data: str | bytes | IO) -> tuple[list[str], np.ndarray]:
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    elif isinstance(data, str):
        text = data
    else:
        text = data.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    lines = text.splitlines()
    if not lines:
        raise DataError("empty vector file")
    head = lines[0].split()
    if len(head) != 2:
        raise DataError(f"line 1: expected header 'N d', got {lines[0]!r}")
    n, d = int(head[0]), int(head[1])
    if len(lines) - 1 != n:
        raise DataError(f"header declares {n} vectors but file has {len(lines) - 1}")
    ids = []
    matrix = np.empty((n, d), dtype=np.float32)
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != d + 1:
            raise DataError(f"line {i}: expected id plus {d} values, got {len(parts) - 1}")
        ids.append(parts[0])
        matrix[i - 2] = [float(v) for v in parts[1:]]
    return ids, matrix

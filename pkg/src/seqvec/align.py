"""Local-alignment retrieval baseline.

Affine-gap Smith-Waterman, score only: a gap of length L costs
gap_open + (L - 1) * gap_extend (both nonpositive, open <= extend).
Scores are computed with the three-matrix recurrence collapsed to two
rolling rows plus a prefix-max scan for horizontal gaps, so a pair costs
O(len(a) * len(b)) time and O(min) memory. No traceback is produced;
retrieval only needs ranks.

The built-in substitution table is BLOSUM62 in half-bit units for the 20
standard amino acids plus B and Z, extended to the full A-Z range by the
usual conventions: X scores -1 against everything (including itself),
U scores as C, O scores as K, and J (I-or-L) takes the rounded mean of
the I and L scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .knn import NeighborResult, majority_vote
from .sequences import SequenceRecord

__all__ = [
    "AlignParams",
    "BLOSUM62",
    "blosum62_params",
    "load_substitution_matrix",
    "smith_waterman",
    "align_topk",
    "align_classify",
]

# Canonical half-bit BLOSUM62 over the 20 standard residues plus the
# B (N/D) and Z (Q/E) ambiguity codes, as distributed with BLAST.
_BLOSUM62_CORE = """
   A  R  N  D  C  Q  E  G  H  I  L  K  M  F  P  S  T  W  Y  V  B  Z
A  4 -1 -2 -2  0 -1 -1  0 -2 -1 -1 -1 -1 -2 -1  1  0 -3 -2  0 -2 -1
R -1  5  0 -2 -3  1  0 -2  0 -3 -2  2 -1 -3 -2 -1 -1 -3 -2 -3 -1  0
N -2  0  6  1 -3  0  0  0  1 -3 -3  0 -2 -3 -2  1  0 -4 -2 -3  3  0
D -2 -2  1  6 -3  0  2 -1 -1 -3 -4 -1 -3 -3 -1  0 -1 -4 -3 -3  4  1
C  0 -3 -3 -3  9 -3 -4 -3 -3 -1 -1 -3 -1 -2 -3 -1 -1 -2 -2 -1 -3 -3
Q -1  1  0  0 -3  5  2 -2  0 -3 -2  1  0 -3 -1  0 -1 -2 -1 -2  0  3
E -1  0  0  2 -4  2  5 -2  0 -3 -3  1 -2 -3 -1  0 -1 -3 -2 -2  1  4
G  0 -2  0 -1 -3 -2 -2  6 -2 -4 -4 -2 -3 -3 -2  0 -2 -2 -3 -3 -1 -2
H -2  0  1 -1 -3  0  0 -2  8 -3 -3 -1 -2 -1 -2 -1 -2 -2  2 -3  0  0
I -1 -3 -3 -3 -1 -3 -3 -4 -3  4  2 -3  1  0 -3 -2 -1 -3 -1  3 -3 -3
L -1 -2 -3 -4 -1 -2 -3 -4 -3  2  4 -2  2  0 -3 -2 -1 -2 -1  1 -4 -3
K -1  2  0 -1 -3  1  1 -2 -1 -3 -2  5 -1 -3 -1  0 -1 -3 -2 -2  0  1
M -1 -1 -2 -3 -1  0 -2 -3 -2  1  2 -1  5  0 -2 -1 -1 -1 -1  1 -3 -1
F -2 -3 -3 -3 -2 -3 -3 -3 -1  0  0 -3  0  6 -4 -2 -2  1  3 -1 -3 -3
P -1 -2 -2 -1 -3 -1 -1 -2 -2 -3 -3 -1 -2 -4  7 -1 -1 -4 -3 -2 -2 -1
S  1 -1  1  0 -1  0  0  0 -1 -2 -2  0 -1 -2 -1  4  1 -3 -2 -2  0  0
T  0 -1  0 -1 -1 -1 -1 -2 -2 -1 -1 -1 -1 -2 -1  1  5 -2 -2  0 -1 -1
W -3 -3 -4 -4 -2 -2 -3 -2 -2 -3 -2 -3 -1  1 -4 -3 -2 11  2 -3 -4 -3
Y -2 -2 -2 -3 -2 -1 -2 -3  2 -1 -1 -2 -1  3 -3 -2 -2  2  7 -1 -3 -2
V  0 -3 -3 -3 -1 -2 -2 -3 -3  3  1 -2  1 -1 -2 -2  0 -3 -1  4 -3 -2
B -2 -1  3  4 -3  0  1 -1  0 -3 -4  0 -3 -3 -2  0 -1 -4 -3 -3  4  1
Z -1  0  0  1 -3  3  4 -2  0 -3 -3  1 -1 -3 -1  0 -1 -3 -2 -2  1  4
"""


def _parse_matrix_text(text: str) -> np.ndarray:
    table = np.zeros((26, 26), dtype=np.int32)
    header: list[int] | None = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            header = []
            for p in parts:
                if len(p) == 1 and "A" <= p.upper() <= "Z":
                    header.append(ord(p.upper()) - 65)
                else:
                    header.append(-1)  # '*' and friends: ignored
            continue
        row = parts[0].upper()
        if len(row) != 1 or not ("A" <= row <= "Z"):
            continue
        r = ord(row) - 65
        for col, value in zip(header, parts[1:]):
            if col >= 0:
                table[r, col] = int(value)
    if header is None:
        raise DataError("substitution matrix text has no header row")
    return table


def _build_blosum62() -> np.ndarray:
    t = _parse_matrix_text(_BLOSUM62_CORE)
    defined = [ord(c) - 65 for c in "ARNDCQEGHILKMFPSTWYVBZ"]
    X, J, U, O_, C, K, I, L = (ord(c) - 65 for c in "XJUOCKIL")
    for a in defined + [X]:
        t[X, a] = t[a, X] = -1
    # J scores: rounded mean of the I and L rows (half toward +inf)
    for a in defined + [X]:
        t[J, a] = t[a, J] = int(np.floor((int(t[I, a]) + int(t[L, a])) / 2 + 0.5))
    t[J, J] = int(np.floor((t[I, I] + t[I, L] + t[L, I] + t[L, L]) / 4 + 0.5))
    for a in defined + [X, J]:
        t[U, a] = t[a, U] = t[C, a]
        t[O_, a] = t[a, O_] = t[K, a]
    t[U, U] = t[C, C]
    t[O_, O_] = t[K, K]
    t[U, O_] = t[O_, U] = t[C, K]
    return t


#: 26x26 integer score table indexed by letter (row/col ord(ch) - ord('A')).
BLOSUM62 = _build_blosum62()
BLOSUM62.setflags(write=False)


@dataclass(frozen=True)
class AlignParams:
    substitution: np.ndarray
    gap_open: int = -11
    gap_extend: int = -1

    def __post_init__(self):
        sub = np.asarray(self.substitution)
        if sub.shape != (26, 26):
            raise ConfigError("substitution table must be 26x26 (letters A-Z)")
        if not np.array_equal(sub, sub.T):
            raise ConfigError("substitution table must be symmetric")
        if not self.gap_open <= self.gap_extend <= 0:
            raise ConfigError(
                "gap penalties must satisfy gap_open <= gap_extend <= 0"
            )
        object.__setattr__(self, "substitution", sub)


def blosum62_params(gap_open: int = -11, gap_extend: int = -1) -> AlignParams:
    """BLOSUM62 with the BLAST protein defaults (open -11, extend -1)."""
    return AlignParams(BLOSUM62, gap_open, gap_extend)


def load_substitution_matrix(data: str | bytes | IO) -> np.ndarray:
    """Read a whitespace score table with letter header row and column.

    Lines starting with '#' are comments; header entries that are not
    single letters (such as '*') are skipped. Letter pairs absent from
    the file score 0.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    elif isinstance(data, str):
        text = data
    else:
        text = data.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    return _parse_matrix_text(text)


def _encode(residues: str, what: str) -> np.ndarray:
    if not residues:
        raise DataError(f"{what} sequence is empty")
    codes = np.frombuffer(residues.upper().encode("ascii"), dtype=np.uint8).astype(
        np.int64
    ) - 65
    if codes.min() < 0 or codes.max() > 25:
        bad = residues[int(np.flatnonzero((codes < 0) | (codes > 25))[0])]
        raise DataError(f"{what} sequence contains non-letter character {bad!r}")
    return codes


def smith_waterman(a: str, b: str, p: AlignParams) -> int:
    """Best local alignment score of ``a`` vs ``b`` (floored at zero)."""
    ca = _encode(a, "first")
    cb = _encode(b, "second")
    if len(cb) > len(ca):
        ca, cb = cb, ca  # table is symmetric; keep the rolling rows short
    m = len(cb)
    sub = p.substitution.astype(np.float64)
    open_, ext = float(p.gap_open), float(p.gap_extend)

    H = np.zeros(m + 1)
    F = np.full(m + 1, -np.inf)
    ladder = ext * np.arange(1, m + 1)  # l * ext for the prefix-max trick
    expand = open_ + ext * np.arange(m)  # open + (j-1) * ext
    G = np.empty(m + 1)
    best = 0.0
    for ai in ca:
        D = H[:-1] + sub[ai, cb]
        Fn = np.maximum(H[1:] + open_, F[1:] + ext)
        B = np.maximum(np.maximum(D, Fn), 0.0)
        # E[j] = open + (j-1-l)*ext + B[l] maximized over l < j, where a
        # horizontal gap never starts from a cell that itself ends in one
        # (open <= extend makes merged gaps at least as good).
        G[0] = 0.0
        G[1:] = B - ladder
        M = np.maximum.accumulate(G)
        E = expand + M[:m]
        Hn = np.maximum(B, E)
        row_best = Hn.max()
        if row_best > best:
            best = row_best
        H[1:] = Hn
        F[1:] = Fn
    return int(best)


def align_topk(
    db: Sequence[SequenceRecord],
    query: SequenceRecord,
    k: int,
    p: AlignParams,
) -> list[NeighborResult]:
    """Exact top-k database records by local alignment score, descending.

    Ties order by smaller id; a record sharing the query's id is skipped.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    if not db:
        raise DataError("alignment database is empty")
    scored = [
        (rec.id, smith_waterman(query.residues, rec.residues, p))
        for rec in db
        if rec.id != query.id
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return [
        NeighborResult(rid, float(score), rank)
        for rank, (rid, score) in enumerate(scored[:k], start=1)
    ]


def align_classify(
    db: Sequence[SequenceRecord],
    query: SequenceRecord,
    k: int,
    p: AlignParams,
    labels: dict[str, str] | None = None,
) -> str:
    """Family of the query by majority vote over its top-k alignments.

    Labels default to the database records' own family fields; vote ties
    resolve toward the larger summed alignment score.
    """
    if labels is None:
        labels = {rec.id: rec.family for rec in db if rec.family is not None}
    hits = align_topk(db, query, k, p)
    return majority_vote(hits, labels, similarity=True)

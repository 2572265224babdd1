"""Paragraph-vector training over token documents.

Four architectures share one update machinery. At a token position with
sampled context half-width c (uniform in [1, window]):

* ``cbow``: hidden h = mean of input rows of the context tokens; the
  current token is the prediction target. Positions with no context are
  skipped. The document vector is not used.
* ``sg``: for each context token, h = input row of the current token and
  the context token is the target (one update per context token).
* ``dm``: h = mean of the document row and the context input rows; the
  current token is the target. With no context h is the document row
  alone, so single-token documents still train.
* ``dbow``: h = document row; every token of the document is a target in
  turn. Input word rows are never read or written.

Objectives score (h, target) pairs:

* negative sampling: loss = -log s(o_t.h) - sum_j log s(-o_nj.h) with n
  noise rows drawn from the cumulative count^0.75 table (draws equal to
  the target are redrawn up to 16 times, then skipped);
* hierarchical softmax: loss = -sum log s(sign*o_p.h) over the target's
  Huffman path, sign +1 where the code bit is 0 and -1 where it is 1.

SGD applies the analytic gradients: output rows get their own gradient
terms; each row contributing to h receives grad_h scaled by
1/(number of contributors), the exact chain-rule share of the mean. The
learning rate decays linearly from alpha0 toward alpha_min over the total
scheduled token count (document granularity).

Training with ``workers=1`` and a fixed seed is bit-deterministic. With
more workers, threads sweep disjoint document shards and update the
shared matrices without locks; colliding read-modify-writes are accepted
and multi-worker results are not reproducible.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError
from .tokenizer import (
    TokenizedDoc,
    TokenizerConfig,
    Vocabulary,
    ensure_huffman,
    subsample_keep_probs,
)

__all__ = [
    "ARCHITECTURES",
    "OBJECTIVES",
    "TrainConfig",
    "EmbeddingModel",
    "init_model",
    "train",
    "objective_gradient",
    "loss_estimate",
    "infer_doc",
    "infer_docs",
]

ARCHITECTURES = ("dm", "dbow", "cbow", "sg")
OBJECTIVES = ("ns", "hs")

#: Sigmoid inputs are clamped here; s(30) is 1 within float32 resolution.
_MAX_EXP = 30.0


@dataclass(frozen=True)
class TrainConfig:
    architecture: str = "dm"
    dim: int = 250
    window: int = 5
    objective: str = "ns"
    negative: int = 5
    subsample_t: float = 0.0
    epochs: int = 20
    alpha0: float = 0.025
    alpha_min: float | None = None
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ConfigError(f"architecture must be one of {ARCHITECTURES}")
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"objective must be one of {OBJECTIVES}")
        if self.dim < 1:
            raise ConfigError("dim must be positive")
        if self.window < 1:
            raise ConfigError("window must be positive")
        if self.objective == "ns" and self.negative < 1:
            raise ConfigError("negative sample count must be >= 1")
        if self.subsample_t < 0:
            raise ConfigError("subsample_t must be nonnegative")
        if self.epochs < 1:
            raise ConfigError("epochs must be positive")
        if not 0 < self.alpha0 <= 1.0:
            raise ConfigError("alpha0 must be in (0, 1]")
        if self.alpha_min is None:
            object.__setattr__(self, "alpha_min", self.alpha0 / 10_000.0)
        if not 0 <= self.alpha_min < self.alpha0:
            raise ConfigError("alpha_min must satisfy 0 <= alpha_min < alpha0")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class EmbeddingModel:
    """Document matrix D, input word matrix W, output parameters O.

    O has one row per token under negative sampling and one per Huffman
    inner node (V - 1 rows) under hierarchical softmax.
    """

    D: np.ndarray
    W: np.ndarray
    O: np.ndarray
    vocab: Vocabulary
    config: TrainConfig
    doc_ids: list[str] | None = None
    tokenizer: TokenizerConfig | None = None

    @property
    def n_docs(self) -> int:
        return self.D.shape[0]

    @property
    def dim(self) -> int:
        return self.D.shape[1]


def _output_rows(vocab_size: int, objective: str) -> int:
    return vocab_size if objective == "ns" else vocab_size - 1


def init_model(
    vocab: Vocabulary,
    n_docs: int,
    cfg: TrainConfig,
    doc_ids: list[str] | None = None,
    tokenizer: TokenizerConfig | None = None,
) -> EmbeddingModel:
    """Fresh model: D and W uniform in [-0.5/dim, 0.5/dim), O all zeros.

    Deterministic for a fixed cfg.seed (D is drawn before W).
    """
    V = len(vocab)
    if V < 1:
        raise DataError("vocabulary is empty")
    if cfg.objective == "hs" and V < 2:
        raise DataError("hierarchical softmax needs a vocabulary of >= 2 tokens")
    if n_docs < 1:
        raise DataError("need at least one document")
    rng = np.random.default_rng(cfg.seed)
    bound = 0.5 / cfg.dim
    D = rng.uniform(-bound, bound, (n_docs, cfg.dim)).astype(np.float32)
    W = rng.uniform(-bound, bound, (V, cfg.dim)).astype(np.float32)
    O = np.zeros((_output_rows(V, cfg.objective), cfg.dim), dtype=np.float32)
    return EmbeddingModel(D, W, O, vocab, cfg, doc_ids, tokenizer)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_MAX_EXP, _MAX_EXP)))


def draw_negatives(
    rng: np.random.Generator, table: np.ndarray, target: int, n: int
) -> np.ndarray:
    """n indices from the cumulative sampling table, avoiding ``target``.

    A draw that hits the target is redrawn up to 16 times and skipped if
    still colliding, so the result can be shorter than n.
    """
    idx = np.searchsorted(table, rng.random(n), side="right")
    if not (idx == target).any():
        return idx
    out = []
    for j in idx:
        attempts = 0
        while j == target and attempts < 16:
            j = int(np.searchsorted(table, rng.random(), side="right"))
            attempts += 1
        if j != target:
            out.append(j)
    return np.array(out, dtype=idx.dtype)


class _NegSampling:
    """Negative-sampling objective bound to an output matrix."""

    def __init__(self, O: np.ndarray, table: np.ndarray, n: int):
        self.O = O
        self.table = table
        self.n = n

    def apply(self, h, target, alpha, rng, learn_hidden=True):
        """SGD step at (h, target); returns the h-update -alpha * grad_h."""
        O = self.O
        negs = draw_negatives(rng, self.table, target, self.n)
        rows = np.empty(1 + len(negs), dtype=np.int64)
        rows[0] = target
        rows[1:] = negs
        vecs = O[rows]
        f = _sigmoid(vecs @ h)
        g = -f
        g[0] += np.float32(1.0)
        g *= np.float32(alpha)
        e = g @ vecs
        if learn_hidden:
            # negatives may repeat; add.at accumulates duplicate rows
            np.add.at(O, rows, g[:, None] * h)
        return e

    def loss(self, h, target, rng):
        negs = draw_negatives(rng, self.table, target, self.n)
        x = self.O[np.concatenate(([target], negs))].astype(np.float64) @ np.asarray(
            h, dtype=np.float64
        )
        return float(np.logaddexp(0.0, -x[0]) + np.logaddexp(0.0, x[1:]).sum())


class _HierSoftmax:
    """Hierarchical-softmax objective bound to the inner-node matrix."""

    def __init__(self, O: np.ndarray, huffman):
        self.O = O
        self.paths = huffman.paths
        # precomputed (1 - code bit) so the hot loop stays in float32
        self.targets = [np.float32(1.0) - c.astype(np.float32) for c in huffman.codes]
        self.signs = [1.0 - 2.0 * c.astype(np.float64) for c in huffman.codes]

    def apply(self, h, target, alpha, rng, learn_hidden=True):
        O = self.O
        nodes = self.paths[target]
        vecs = O[nodes]
        f = _sigmoid(vecs @ h)
        g = (self.targets[target] - f) * np.float32(alpha)
        e = g @ vecs
        if learn_hidden:
            O[nodes] += g[:, None] * h  # path nodes are distinct
        return e

    def loss(self, h, target, rng):
        x = self.O[self.paths[target]].astype(np.float64) @ np.asarray(
            h, dtype=np.float64
        )
        return float(np.logaddexp(0.0, -self.signs[target] * x).sum())


def _make_objective(model: EmbeddingModel, cfg: TrainConfig):
    if cfg.objective == "ns":
        return _NegSampling(model.O, model.vocab.sampling_table, cfg.negative)
    return _HierSoftmax(model.O, ensure_huffman(model.vocab))


def _context(toks: np.ndarray, pos: int, c: int) -> np.ndarray:
    lo = pos - c
    if lo < 0:
        lo = 0
    return np.concatenate((toks[lo:pos], toks[pos + 1 : pos + 1 + c]))


def _train_doc(arch, D, W, obj, toks, tag, alpha, window, rng, learn_doc=True):
    """One pass over one document's positions. Mutates the matrices."""
    n = len(toks)
    if arch == "dbow":
        for pos in range(n):
            e = obj.apply(D[tag], toks[pos], alpha, rng)
            if learn_doc:
                D[tag] += e
        return
    cs = rng.integers(1, window + 1, size=n)
    if arch == "dm":
        for pos in range(n):
            ctx = _context(toks, pos, cs[pos])
            nc = len(ctx) + 1
            h = (W[ctx].sum(axis=0) + D[tag]) / np.float32(nc)
            e = obj.apply(h, toks[pos], alpha, rng)
            share = e / np.float32(nc)
            if len(ctx):
                np.add.at(W, ctx, share)
            if learn_doc:
                D[tag] += share
    elif arch == "cbow":
        for pos in range(n):
            ctx = _context(toks, pos, cs[pos])
            if len(ctx) == 0:
                continue
            h = W[ctx].sum(axis=0) / np.float32(len(ctx))
            e = obj.apply(h, toks[pos], alpha, rng)
            np.add.at(W, ctx, e / np.float32(len(ctx)))
    elif arch == "sg":
        for pos in range(n):
            c = cs[pos]
            cur = toks[pos]
            lo = max(0, pos - c)
            hi = min(n, pos + 1 + c)
            for j in range(lo, hi):
                if j == pos:
                    continue
                e = obj.apply(W[cur], toks[j], alpha, rng)
                W[cur] += e
    else:  # pragma: no cover - guarded by TrainConfig validation
        raise ConfigError(f"unknown architecture {arch!r}")


def _check_docs(model: EmbeddingModel, docs: Sequence[TokenizedDoc]) -> None:
    if not docs:
        raise DataError("no documents to train on")
    V = len(model.vocab)
    for doc in docs:
        if len(doc.tokens) == 0:
            raise DataError(f"document with tag {doc.doc_tag} is empty")
        if doc.doc_tag < 0 or doc.doc_tag >= model.n_docs:
            raise DataError(f"doc_tag {doc.doc_tag} out of range [0, {model.n_docs})")
        if int(doc.tokens.max()) >= V or int(doc.tokens.min()) < 0:
            raise DataError(f"document {doc.doc_tag} has token ids outside [0, {V})")


def train(
    model: EmbeddingModel,
    docs: Sequence[TokenizedDoc],
    cfg: TrainConfig | None = None,
) -> EmbeddingModel:
    """Run cfg.epochs SGD passes over ``docs``, updating the model in place.

    Document order is reshuffled per epoch from the seeded generator;
    positions within a document run in order. Passing a ``cfg`` overrides
    the training schedule, but its dim/objective must match the model.
    """
    if cfg is None:
        cfg = model.config
    if cfg.dim != model.dim:
        raise ConfigError("cfg.dim does not match the model matrices")
    if _output_rows(len(model.vocab), cfg.objective) != model.O.shape[0]:
        raise ConfigError("cfg.objective does not match the output matrix shape")
    _check_docs(model, docs)

    obj = _make_objective(model, cfg)
    keep = (
        subsample_keep_probs(model.vocab, cfg.subsample_t)
        if cfg.subsample_t > 0
        else None
    )
    total = cfg.epochs * sum(len(d.tokens) for d in docs)
    arch, window = cfg.architecture, cfg.window
    alpha0, alpha_min = cfg.alpha0, cfg.alpha_min

    def sweep(doc_indices, rng, processed_cell):
        for di in doc_indices:
            doc = docs[di]
            frac = min(1.0, processed_cell[0] / total)
            alpha = alpha0 + (alpha_min - alpha0) * frac
            processed_cell[0] += len(doc.tokens)
            toks = doc.tokens
            if keep is not None:
                toks = toks[rng.random(len(toks)) < keep[toks]]
                if len(toks) == 0:
                    continue
            _train_doc(arch, model.D, model.W, obj, toks, doc.doc_tag, alpha,
                       window, rng)

    if cfg.workers == 1:
        rng = np.random.default_rng([cfg.seed, 1])
        processed = [0]
        for _ in range(cfg.epochs):
            sweep(rng.permutation(len(docs)), rng, processed)
    else:
        order_rng = np.random.default_rng([cfg.seed, 1])
        processed = [0]  # shared, unsynchronized: alpha drift is accepted
        for epoch in range(cfg.epochs):
            perm = order_rng.permutation(len(docs))
            threads = [
                threading.Thread(
                    target=sweep,
                    args=(perm[w :: cfg.workers],
                          np.random.default_rng([cfg.seed, 2, epoch, w]),
                          processed),
                )
                for w in range(cfg.workers)
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
    return model


def objective_gradient(
    h: np.ndarray,
    target: int,
    model: EmbeddingModel,
    rng: np.random.Generator | None = None,
    negatives: np.ndarray | None = None,
) -> tuple[float, np.ndarray, dict[int, np.ndarray]]:
    """Loss and analytic gradients of the objective at (h, target).

    Returns ``(loss, grad_h, row_grads)`` in float64, where ``row_grads``
    maps output-row index to the loss gradient with respect to that row
    (an SGD step subtracts alpha times these). Negative-sampling draws
    come from ``rng`` unless ``negatives`` are supplied pre-drawn; the
    result is pure given the generator state.
    """
    cfg = model.config
    h = np.asarray(h, dtype=np.float64)
    O = model.O.astype(np.float64)
    if cfg.objective == "ns":
        if negatives is None:
            if rng is None:
                raise ConfigError("negative sampling needs rng or pre-drawn negatives")
            negatives = draw_negatives(rng, model.vocab.sampling_table, target,
                                       cfg.negative)
        rows = np.concatenate(([target], negatives)).astype(np.int64)
        x = O[rows] @ h
        f = 1.0 / (1.0 + np.exp(-x))
        loss = float(np.logaddexp(0.0, -x[0]) + np.logaddexp(0.0, x[1:]).sum())
        coeff = f.copy()
        coeff[0] -= 1.0  # d loss / d x: (f - label)
        grad_h = coeff @ O[rows]
        row_grads: dict[int, np.ndarray] = {}
        for r, c in zip(rows, coeff):
            r = int(r)
            if r in row_grads:
                row_grads[r] = row_grads[r] + c * h
            else:
                row_grads[r] = c * h
        return loss, grad_h, row_grads

    huff = ensure_huffman(model.vocab)
    nodes = huff.paths[target]
    bits = huff.codes[target].astype(np.float64)
    x = O[nodes] @ h
    f = 1.0 / (1.0 + np.exp(-x))
    sign = 1.0 - 2.0 * bits
    loss = float(np.logaddexp(0.0, -sign * x).sum())
    coeff = f - (1.0 - bits)  # d loss / d x per path node
    grad_h = coeff @ O[nodes]
    row_grads = {int(nd): c * h for nd, c in zip(nodes, coeff)}
    return loss, grad_h, row_grads


def loss_estimate(
    model: EmbeddingModel, docs: Sequence[TokenizedDoc], probe_seed: int = 0
) -> float:
    """Mean objective loss per update over ``docs`` without any updates.

    Documents are walked in the given order; window widths and negative
    draws come from a generator seeded with ``probe_seed``, so repeated
    calls on an unchanged model return the identical value.
    """
    _check_docs(model, docs)
    cfg = model.config
    obj = _make_objective(model, cfg)
    rng = np.random.default_rng([probe_seed, 5])
    D, W = model.D, model.W
    total = 0.0
    count = 0
    for doc in docs:
        toks = doc.tokens
        n = len(toks)
        if cfg.architecture == "dbow":
            h = D[doc.doc_tag]
            for pos in range(n):
                total += obj.loss(h, toks[pos], rng)
                count += 1
            continue
        cs = rng.integers(1, cfg.window + 1, size=n)
        for pos in range(n):
            if cfg.architecture == "sg":
                lo = max(0, pos - cs[pos])
                hi = min(n, pos + 1 + cs[pos])
                for j in range(lo, hi):
                    if j != pos:
                        total += obj.loss(W[toks[pos]], toks[j], rng)
                        count += 1
                continue
            ctx = _context(toks, pos, cs[pos])
            if cfg.architecture == "dm":
                h = (W[ctx].sum(axis=0) + D[doc.doc_tag]) / np.float32(len(ctx) + 1)
            else:  # cbow
                if len(ctx) == 0:
                    continue
                h = W[ctx].sum(axis=0) / np.float32(len(ctx))
            total += obj.loss(h, toks[pos], rng)
            count += 1
    if count == 0:
        raise DataError("no scoreable positions in the probe documents")
    return total / count


def infer_docs(
    model: EmbeddingModel,
    token_lists: Sequence[Sequence[int] | np.ndarray],
    infer_epochs: int | None = None,
    alpha0: float | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Learn one new document vector from the given token documents.

    W and O stay frozen; a freshly initialized vector receives the
    document-side updates of the model's architecture for ``infer_epochs``
    passes (default: twice the training epochs) at a learning rate
    decaying linearly from ``alpha0`` (default: the training alpha0).
    Token ids outside the vocabulary are dropped; multiple documents (the
    phase readings of one sequence) share the single inferred vector.
    Only document architectures (dm, dbow) support inference.
    """
    cfg = model.config
    if cfg.architecture not in ("dm", "dbow"):
        raise ConfigError(
            f"architecture {cfg.architecture!r} has no document pathway to infer with"
        )
    if infer_epochs is None:
        infer_epochs = 2 * cfg.epochs
    if infer_epochs < 0:
        raise ConfigError("infer_epochs must be >= 0")
    if alpha0 is None:
        alpha0 = cfg.alpha0
    V = len(model.vocab)
    kept = []
    for tl in token_lists:
        tl = np.asarray(tl, dtype=np.int32)
        tl = tl[(tl >= 0) & (tl < V)]
        if len(tl):
            kept.append(tl)
    if not kept:
        raise DataError("no in-vocabulary tokens to infer from")

    rng = np.random.default_rng([seed, 3])
    bound = 0.5 / cfg.dim
    vec = rng.uniform(-bound, bound, cfg.dim).astype(np.float32)
    if infer_epochs == 0:
        return vec
    obj = _make_objective(model, cfg)
    W = model.W
    alpha_min = alpha0 / 10_000.0
    total = infer_epochs * sum(len(t) for t in kept)
    processed = 0
    for _ in range(infer_epochs):
        for toks in kept:
            alpha = alpha0 + (alpha_min - alpha0) * (processed / total)
            processed += len(toks)
            n = len(toks)
            if cfg.architecture == "dbow":
                for pos in range(n):
                    vec += obj.apply(vec, toks[pos], alpha, rng, learn_hidden=False)
                continue
            cs = rng.integers(1, cfg.window + 1, size=n)
            for pos in range(n):
                ctx = _context(toks, pos, cs[pos])
                nc = len(ctx) + 1
                h = (W[ctx].sum(axis=0) + vec) / np.float32(nc)
                e = obj.apply(h, toks[pos], alpha, rng, learn_hidden=False)
                vec += e / np.float32(nc)
    return vec


def infer_doc(
    model: EmbeddingModel,
    tokens: Sequence[int] | np.ndarray,
    infer_epochs: int | None = None,
    alpha0: float | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Infer a vector for a single token document (see infer_docs)."""
    return infer_docs(model, [tokens], infer_epochs, alpha0, seed)

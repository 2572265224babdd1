"""Evaluating embedding quality with cross-validated kNN classification.

If an embedding is good, a sequence's nearest neighbors belong to its
own family, so majority-vote kNN accuracy is a direct quality measure.
The same machinery answers ad-hoc retrieval queries.
"""

from seqvec import (
    TokenizerConfig,
    TrainConfig,
    VectorIndex,
    build_corpus,
    init_model,
    knn_cross_validate,
    majority_vote,
    markov_family_corpus,
    neighbors,
    train,
)

records = markov_family_corpus(n_families=4, per_family=30, length=80,
                               seed=3, concentration=0.2)
labels = {r.id: r.family for r in records}

corpus = build_corpus(records, TokenizerConfig(3, "nonoverlap"))
cfg = TrainConfig(architecture="dm", dim=32, epochs=60, alpha0=0.05, seed=2)
model = train(init_model(corpus.vocab, len(corpus.doc_ids), cfg, corpus.doc_ids),
              corpus.docs)

index = VectorIndex(
    model.D, corpus.doc_ids, [labels[i] for i in corpus.doc_ids],
    metric="euclidean",
)

# --- single-query retrieval ----------------------------------------------

query_id = corpus.doc_ids[0]
query_vec = model.D[0]
hits = neighbors(index, query_vec, k=5, exclude_id=query_id)
print(f"nearest neighbors of {query_id}:")
for hit in hits:
    print(f"  rank {hit.rank}: {hit.id}  (distance {hit.score:.3f})")
print("majority vote:", majority_vote(hits, labels))

# --- cross-validated accuracy as a function of k --------------------------

report = knn_cross_validate(index, folds=5, k_values=[1, 3, 5, 10], seed=0)
print("\n5-fold kNN accuracy:")
print("k\tmean\tstd")
for k, summary in report.items():
    print(f"{k}\t{summary.mean:.3f}\t{summary.std:.3f}")

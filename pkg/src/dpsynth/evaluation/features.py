"""TF-IDF featurization written out by hand.

idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the training documents, feature
value = raw count * idf, rows L2-normalized. The vocabulary comes from the
training corpus only, columns ordered lexicographically; unknown tokens map
to nothing, so an all-unknown record becomes the zero vector.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from ..corpus import Corpus, NewsRecord, record_tokens
from ..errors import EmptyCorpus


@dataclass(frozen=True)
class TfIdfModel:
    vocabulary: dict[str, int]  # token -> column, lexicographic
    idf: np.ndarray
    doc_count: int

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(train: Corpus) -> TfIdfModel:
    """Learn vocabulary and idf weights from a training corpus."""
    if not train.records:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    n_docs = len(train.records)
    df: Counter = Counter()
    for rec in train.records:
        df.update(set(record_tokens(rec)))
    vocabulary = {token: j for j, token in enumerate(sorted(df))}
    idf = np.empty(len(vocabulary), dtype=np.float64)
    for token, j in vocabulary.items():
        idf[j] = np.log((1.0 + n_docs) / (1.0 + df[token])) + 1.0
    return TfIdfModel(vocabulary=vocabulary, idf=idf, doc_count=n_docs)


def _row_entries(model: TfIdfModel, record: NewsRecord) -> tuple[list[int], list[float]]:
    counts = Counter(record_tokens(record))
    cols: list[int] = []
    vals: list[float] = []
    for token, count in counts.items():
        j = model.vocabulary.get(token)
        if j is not None:
            cols.append(j)
            vals.append(count * model.idf[j])
    if vals:
        norm = float(np.sqrt(np.dot(vals, vals)))
        if norm > 0:
            vals = [v / norm for v in vals]
    return cols, vals


def transform(model: TfIdfModel, record: NewsRecord) -> sparse.csr_matrix:
    """One record to a 1 x V L2-normalized tf-idf row."""
    cols, vals = _row_entries(model, record)
    return sparse.csr_matrix(
        (vals, (np.zeros(len(cols), dtype=np.int64), cols)),
        shape=(1, model.n_features),
        dtype=np.float64,
    )

def transform_corpus(model: TfIdfModel, corpus: Corpus) -> sparse.csr_matrix:
    """All records to an n x V CSR matrix (row order = record order)."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for rec in corpus.records:
        cols, vals = _row_entries(model, rec)
        order = np.argsort(cols) if cols else []
        indices.extend(cols[k] for k in order)
        data.extend(vals[k] for k in order)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(corpus.records), model.n_features),
    )

"""Sparse term-frequency, composition and tf-idf vectors."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .vocab import VocabOptions, Vocabulary, tokenize


class EmptyDocumentError(ValueError):
    """Raised when a document has no in-vocabulary terms and cannot be anonymized."""


@dataclass
class SparseVector:
    dim: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        for i, v in self.entries.items():
            if not 0 <= i < self.dim:
                raise ValueError(f"index {i} out of range for dim {self.dim}")
            if v <= 0:
                raise ValueError(f"stored values must be positive, got {v} at {i}")

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def total(self) -> float:
        return math.fsum(self.entries.values())

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries.items():
            out[i] = v
        return out

    def to_json(self, doc_id: str, **extra) -> str:
        rec = {"id": doc_id, "dim": self.dim}
        rec.update(extra)
        rec["entries"] = {str(i): self.entries[i] for i in sorted(self.entries)}
        return json.dumps(rec, sort_keys=False)

    @classmethod
    def from_json(cls, line: str) -> tuple[str, "SparseVector"]:
        rec = json.loads(line)
        entries = {int(k): v for k, v in rec["entries"].items()}
        return rec["id"], cls(int(rec["dim"]), entries)


# A composition vector is a SparseVector whose entries form a probability
# distribution; the alias keeps call sites readable.
CompositionVector = SparseVector


def vectorize(doc: str, vocab: Vocabulary, options: VocabOptions = VocabOptions()) -> SparseVector:
    counts = Counter(
        vocab.index[tok.normalized] for tok in tokenize(doc, options) if tok.normalized in vocab.index
    )
    return SparseVector(len(vocab), dict(counts))


def to_composition(v: SparseVector) -> CompositionVector:
    total = v.total()
    if not v.entries or total <= 0:
        raise EmptyDocumentError("empty document: no in-vocabulary terms")
    return SparseVector(v.dim, {i: x / total for i, x in v.entries.items()})


def fit_idf(corpus_vectors: Sequence[SparseVector]) -> np.ndarray:
    """Smoothed idf: ln((1+N)/(1+df)) + 1."""
    if not corpus_vectors:
        raise ValueError("corpus is empty")
    dim = corpus_vectors[0].dim
    df = np.zeros(dim)
    for v in corpus_vectors:
        for i in v.entries:
            df[i] += 1
    n_docs = len(corpus_vectors)
    return np.log((1.0 + n_docs) / (1.0 + df)) + 1.0


def apply_idf(vectors: Sequence[SparseVector], idf: np.ndarray) -> list[SparseVector]:
    out = []
    for v in vectors:
        weighted = {i: x * idf[i] for i, x in v.entries.items()}
        norm = math.sqrt(math.fsum(x * x for x in weighted.values()))
        if norm > 0:
            weighted = {i: x / norm for i, x in weighted.items()}
        out.append(SparseVector(v.dim, weighted))
    return out


def tfidf_transform(corpus_vectors: Sequence[SparseVector]) -> list[SparseVector]:
    return apply_idf(corpus_vectors, fit_idf(corpus_vectors))


def stack(vectors: Sequence[SparseVector], dim: int | None = None) -> sp.csr_matrix:
    """Rows of a CSR matrix, one per vector."""
    if dim is None:
        dim = vectors[0].dim if vectors else 0
    rows, cols, vals = [], [], []
    for r, v in enumerate(vectors):
        for i, x in v.entries.items():
            rows.append(r)
            cols.append(i)
            vals.append(x)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(vectors), dim), dtype=float)


def fit_idf_matrix(X: sp.spmatrix) -> np.ndarray:
    """Same smoothed idf as :func:`fit_idf`, for a CSR document-term matrix."""
    X = sp.csr_matrix(X)
    if X.shape[0] == 0:
        raise ValueError("corpus is empty")
    df = np.bincount(X.indices[X.data > 0], minlength=X.shape[1])
    return np.log((1.0 + X.shape[0]) / (1.0 + df)) + 1.0


def apply_idf_matrix(X: sp.spmatrix, idf: np.ndarray) -> sp.csr_matrix:
    W = sp.csr_matrix(X, dtype=float) @ sp.diags(idf)
    norms = np.sqrt(np.asarray(W.multiply(W).sum(axis=1)).ravel())
    norms[norms == 0] = 1.0
    return sp.csr_matrix(sp.diags(1.0 / norms) @ W)

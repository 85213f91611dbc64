"""Plain-text word vectors (GloVe layout) and cosine similarity."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .vocab import Vocabulary, VocabularyTooSmallError

log = logging.getLogger(__name__)


class EmbeddingParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MissingEmbeddingError(LookupError):
    def __init__(self, terms):
        terms = [terms] if isinstance(terms, str) else list(terms)
        super().__init__("missing embedding for: " + ", ".join(terms))
        self.terms = terms


@dataclass
class EmbeddingTable:
    """Word vectors stored row-wise with a term -> row map; rows are never zero."""

    dim: int
    words: tuple
    matrix: np.ndarray

    def __post_init__(self):
        self.row = {w: i for i, w in enumerate(self.words)}
        self._unit = self.matrix / np.linalg.norm(self.matrix, axis=1, keepdims=True)

    def __contains__(self, term):
        return term in self.row

    def __len__(self):
        return len(self.words)

    def vector(self, term: str) -> np.ndarray:
        try:
            return self.matrix[self.row[term]]
        except KeyError:
            raise MissingEmbeddingError(term) from None

    def unit_vectors(self, terms: Iterable[str]) -> np.ndarray:
        terms = list(terms)
        missing = [t for t in terms if t not in self.row]
        if missing:
            raise MissingEmbeddingError(missing)
        return self._unit[[self.row[t] for t in terms]]

    def missing(self, vocab: Vocabulary) -> list[str]:
        return [t for t in vocab.terms if t not in self.row]


def load_embeddings(path, limit: int | None = None) -> EmbeddingTable:
    """Parse ``word v1 ... vd`` lines.

    The first line fixes ``d``. Repeated words keep their first vector and
    zero-norm vectors are dropped with a warning. ``limit`` reads only the
    first ``limit`` lines.
    """
    words, rows, seen = [], [], set()
    dim = None
    dropped = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if limit is not None and lineno > limit:
                break
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], parts[1:]
            if not values:
                raise EmbeddingParseError(lineno, f"no vector components for {word!r}")
            try:
                vec = np.array([float(x) for x in values])
            except ValueError as exc:
                raise EmbeddingParseError(lineno, str(exc)) from None
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingParseError(lineno, f"expected {dim} components, got {len(vec)}")
            if word in seen:
                continue
            seen.add(word)
            if not np.all(np.isfinite(vec)):
                raise EmbeddingParseError(lineno, f"non-finite component for {word!r}")
            if not np.any(vec):
                dropped.append(word)
                continue
            words.append(word)
            rows.append(vec)
    if dim is None:
        raise EmbeddingParseError(0, f"embedding file {path} is empty")
    if dropped:
        log.warning("dropped %d zero-norm vectors: %s", len(dropped), ", ".join(dropped[:20]))
    if not rows:
        raise EmbeddingParseError(0, f"embedding file {path} has no usable vectors")
    return EmbeddingTable(dim, tuple(words), np.vstack(rows))


def cosine(a: str, b: str, table: EmbeddingTable) -> float:
    va, vb = table.vector(a), table.vector(b)
    c = float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))
    return min(1.0, max(-1.0, c))


def drop_missing(vocab: Vocabulary, table: EmbeddingTable) -> tuple[Vocabulary, list[str]]:
    """Remove vocabulary terms that have no embedding; returns (vocab, removed)."""
    missing = table.missing(vocab)
    if missing:
        log.info("removing %d terms without embeddings: %s", len(missing), ", ".join(missing[:20]))
    kept = vocab.restrict(t for t in vocab.terms if t in table)
    if len(kept) < 2:
        raise VocabularyTooSmallError(
            f"vocabulary too small after dropping terms without embeddings: K={len(kept)}"
        )
    return kept, missing

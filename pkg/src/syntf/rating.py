"""Word-substitution ratings: embedding cosine minus a letter-bigram overlap penalty."""

from __future__ import annotations

import hashlib
import logging
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .embeddings import EmbeddingTable, MissingEmbeddingError, cosine
from .vocab import Vocabulary, VocabularyTooSmallError

log = logging.getLogger(__name__)

CACHE_MAGIC = b"SYNTFRM\x00"
CACHE_VERSION = 1
# rows are dense: K*K float64
LARGE_VOCAB_WARNING = 50_000


@dataclass(frozen=True)
class RatingParams:
    s: float = 0.0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("bigram impact factor s must be >= 0")
        if self.s > 1:
            log.warning("bigram impact factor s=%g is outside [0, 1]", self.s)
        elif self.s > 0.4:
            log.warning("bigram impact factor s=%g is outside the evaluated grid 0..0.4", self.s)


@dataclass
class RatingMatrix:
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"rating matrix must be square, got shape {v.shape}")
        if v.shape[0] < 2:
            raise VocabularyTooSmallError("rating matrix needs K >= 2")
        if not np.all((v >= 0) & (v <= 1)):
            raise ValueError("ratings must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def sensitivity(self) -> float:
        """Largest per-output spread over inputs (column max - min); never above 1."""
        return float(np.max(self.values.max(axis=0) - self.values.min(axis=0)))

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.values - self.values.T)) <= tol)


def bigrams(word: str) -> Counter:
    return Counter(word[i:i + 2] for i in range(len(word) - 1))


def bigram_overlap(v: str, w: str) -> float:
    """Dice coefficient of the letter-bigram multisets of ``v`` and ``w``."""
    bv, bw = bigrams(v), bigrams(w)
    total = sum(bv.values()) + sum(bw.values())
    if total == 0:
        return 1.0 if v == w else 0.0
    return 2.0 * sum((bv & bw).values()) / total


def rate(v: str, w: str, table: EmbeddingTable, params: RatingParams = RatingParams()) -> float:
    r = cosine(v, w, table) - params.s * bigram_overlap(v, w)
    return min(1.0, max(0.0, r))


def bigram_overlap_matrix(terms) -> np.ndarray:
    """All-pairs bigram Dice overlap.

    Multiset intersection is computed as sum_t [a >= t][b >= t] over count
    thresholds t, so every level is a sparse 0/1 matrix product.
    """
    terms = list(terms)
    counters = [bigrams(t) for t in terms]
    ids = {}
    rows, cols, vals = [], [], []
    for r, c in enumerate(counters):
        for bg, n in c.items():
            rows.append(r)
            cols.append(ids.setdefault(bg, len(ids)))
            vals.append(n)
    K = len(terms)
    counts = sp.csr_matrix((vals, (rows, cols)), shape=(K, max(len(ids), 1)), dtype=np.int64)
    sizes = np.asarray(counts.sum(axis=1)).ravel().astype(float)
    inter = np.zeros((K, K))
    level = 1
    max_count = counts.max() if counts.nnz else 0
    while level <= max_count:
        ind = (counts >= level).astype(np.float64)
        inter += (ind @ ind.T).toarray()
        level += 1
    denom = sizes[:, None] + sizes[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(denom > 0, 2.0 * inter / denom, 0.0)
    # pairs of bigram-less words: 1 only for identical words
    empty = np.flatnonzero(sizes == 0)
    for i in empty:
        for j in empty:
            out[i, j] = 1.0 if terms[i] == terms[j] else 0.0
    return out


def build_rating_matrix(vocab: Vocabulary, table: EmbeddingTable,
                        params: RatingParams = RatingParams()) -> RatingMatrix:
    K = len(vocab)
    if K < 2:
        raise VocabularyTooSmallError(f"vocabulary too small: K={K} (need >= 2)")
    if K > LARGE_VOCAB_WARNING:
        log.warning("dense %dx%d rating matrix needs %.1f GiB", K, K, K * K * 8 / 2**30)
    missing = table.missing(vocab)
    if missing:
        raise MissingEmbeddingError(missing)
    unit = table.unit_vectors(vocab.terms)
    cos = unit @ unit.T
    cos = 0.5 * (cos + cos.T)
    if params.s:
        cos -= params.s * bigram_overlap_matrix(vocab.terms)
    return RatingMatrix(np.clip(cos, 0.0, 1.0))


# ---- binary cache ----

def vocab_hash(vocab: Vocabulary) -> str:
    return hashlib.sha256("\n".join(vocab.terms).encode("utf-8")).hexdigest()


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def cache_key(vocab: Vocabulary, embeddings_path, params: RatingParams) -> str:
    raw = f"{vocab_hash(vocab)}:{file_hash(embeddings_path)}:{params.s!r}"
    return hashlib.sha256(raw.encode()).hexdigest()[:32]


def save_rating_cache(path, ratings: RatingMatrix) -> None:
    K = ratings.dim
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(struct.pack("<IQ", CACHE_VERSION, K))
        fh.write(np.ascontiguousarray(ratings.values, dtype="<f8").tobytes())


def load_rating_cache(path) -> RatingMatrix:
    with open(path, "rb") as fh:
        if fh.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
            raise ValueError(f"{path}: not a rating-matrix cache file")
        version, K = struct.unpack("<IQ", fh.read(12))
        if version != CACHE_VERSION:
            raise ValueError(f"{path}: unsupported cache version {version}")
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != K * K:
        raise ValueError(f"{path}: truncated cache ({data.size} of {K * K} values)")
    return RatingMatrix(data.reshape(K, K).astype(np.float64))


def cached_rating_matrix(vocab: Vocabulary, table: EmbeddingTable, params: RatingParams,
                         embeddings_path, cache_dir) -> RatingMatrix:
    """Build the rating matrix, reusing ``cache_dir/ratings-<key>.bin`` when present."""
    path = Path(cache_dir) / f"ratings-{cache_key(vocab, embeddings_path, params)}.bin"
    if path.exists():
        ratings = load_rating_cache(path)
        if ratings.dim == len(vocab):
            return ratings
        log.warning("ignoring stale cache %s", path)
    ratings = build_rating_matrix(vocab, table, params)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_rating_cache(path, ratings)
    return ratings
